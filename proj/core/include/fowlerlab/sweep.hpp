#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "fowlerlab/shoot.hpp"

namespace fowlerlab {

// geometric d-grid, optionally jittered in log space
struct GridSpec {
    double d_min = 1e-2;
    double d_max = 1e6;
    int count = 64;
    double jitter = 0.0; // fraction of the log step, [0, 0.5]
    std::uint64_t seed = 0;
};

std::vector<double> make_grid(const GridSpec& grid);

enum class Regime { Subcritical, Critical, Supercritical };

std::string regime_name(Regime r);

struct FoldInfo {
    double R0 = 0.0;
    double d0 = 0.0;
    bool interior = false; // discrete argmin away from the grid ends
};

struct TailStats {
    bool valid = false;
    double slope = 0.0; // least-squares d log10 R / d log10 d over the last decade
    double min_R = 0.0; // min of R over the last decade
};

struct DiagramPoint {
    double d = 0.0;
    ShotResult shot;
    bool failed = false;   // the shot threw; diagnostics in `error`
    std::string error;
};

struct BifurcationDiagram {
    std::vector<DiagramPoint> points; // ordered by d ascending
    double ell_star = 0.0;
    std::optional<double> ell;
    std::optional<Regime> regime;  // declared from ell vs ell_star
    bool regime_consistent = true; // declared regime vs observed tail
    std::optional<FoldInfo> fold;
    TailStats tail;
};

// Shoots every grid point (parallel over jobs workers, assembled in input
// order), estimates the tail slope over the last decade and checks it
// against the regime declared by ell vs ell_star.
BifurcationDiagram sweep_R(const ProblemParams& pp, const KProfile& profile,
                           const GridSpec& grid, const ShotConfig& cfg, int jobs = 1);

// Global minimum of R over crossing points, refined by golden-section
// between the neighbors of the discrete argmin.  Absent when no point
// crosses.  Interior is false when the argmin sits at a grid end, in which
// case the R0 reading is a boundary value, not a fold.
std::optional<FoldInfo> find_R0(const ProblemParams& pp, const KProfile& profile,
                                const BifurcationDiagram& diagram, const ShotConfig& cfg);

struct RootQuery {
    std::vector<double> roots;     // ascending d with R(d) = R_target
    bool near_fold_warning = false;
};

// Brackets every sign change of R(d) - R_target along the diagram and
// refines each by bisection on fresh shots to relative d-tolerance 1e-8.
RootQuery solve_radius(const ProblemParams& pp, const KProfile& profile,
                       double R_target, const BifurcationDiagram& diagram,
                       const ShotConfig& cfg);

struct EigenQuery {
    RootQuery query;
    double R_target = 0.0;       // lambda^{1/p}
    double w1_residual = 0.0;    // |w(1)| from the lambda-scaled re-integration
    bool cross_checked = false;
};

// solve_radius at R = lambda^{1/p}; one root is cross-checked by
// integrating the lambda-scaled equation and evaluating w at s = 1.
EigenQuery solve_eigenvalue(const ProblemParams& pp, const KProfile& profile,
                            double lambda, const BifurcationDiagram& diagram,
                            const ShotConfig& cfg);

// static-schedule parallel map used for fan-out over independent shots
void parallel_for(int count, int jobs, const std::function<void(int)>& fn);

} // namespace fowlerlab
