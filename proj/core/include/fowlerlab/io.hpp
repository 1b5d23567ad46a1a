#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fowlerlab/sweep.hpp"

namespace fowlerlab {

inline constexpr const char* kToolVersion = "0.1.0";

std::uint64_t fnv1a_hash(const std::string& text);

// '#'-prefixed header block carried by every output file: tool version,
// resolved config hash, the parameter bundle and the profile
std::string file_header(const ProblemParams& pp, const KProfile& profile,
                        std::uint64_t config_hash, const std::string& regime);

std::string outcome_name(ShotOutcome o);
std::string trend_name(Trend t);

void write_trajectory_csv(const std::string& path, const std::string& header,
                          const ProblemParams& pp, const KProfile& profile,
                          const Trajectory& traj);

void write_shots_csv(const std::string& path, const std::string& header,
                     const std::vector<ShotResult>& shots);

void write_diagram_csv(const std::string& path, const std::string& header,
                       const BifurcationDiagram& diagram);

// minimal static plot: log-log polyline of the crossing points of the
// diagram with an R0 marker and a regime annotation
void write_diagram_svg(const std::string& path, const BifurcationDiagram& diagram,
                       const std::string& title);

} // namespace fowlerlab
