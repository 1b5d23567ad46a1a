#pragma once

#include <optional>

#include "fowlerlab/integrate.hpp"

namespace fowlerlab {

enum class ShotOutcome { Crossing, PositiveUpToBudget, Diverged };
enum class Trend { Decaying, NearHomoclinic, Undetermined };

struct ShotConfig {
    IntegratorConfig ivp;
    double init_rel_tol = 1e-8; // local series initialization tolerance
    bool keep_trajectory = true;
};

struct ShotResult {
    double d = 0.0;
    ShotOutcome outcome = ShotOutcome::Diverged;

    // Crossing data: first zero of x at t = T, R = e^T, y at the axis
    double T = 0.0;
    double R = 0.0;
    double y_at_zero = 0.0;

    // PositiveUpToBudget data
    double t_end = 0.0;
    double x_end = 0.0;
    Trend trend = Trend::Undetermined;

    // sign/monotonicity structure observed on samples before the zero:
    // x > 0, y < 0 past the launch neighborhood, u decreasing
    bool sign_structure_ok = true;
    bool u_monotone = true;

    // saddle-passage resolution: the tolerance the run finally used and
    // whether the closest-approach energy stayed above the noise floor
    double rel_tol_used = 0.0;
    bool saddle_resolved = true;

    std::optional<Trajectory> trajectory;
};

// Launches the regular solution u(r; d) from the local expansion and
// integrates watching {XCross, Divergence, Budget}.
ShotResult shoot(const ProblemParams& pp, const KProfile& profile, double d,
                 const ShotConfig& cfg);

// R(d) when the shot crosses, absent otherwise
std::optional<double> first_zero(const ProblemParams& pp, const KProfile& profile,
                                 double d, const ShotConfig& cfg);

enum class JMembership { InJ, NotInJWithinBudget, Unknown };

// budget-bounded surrogate for membership in J; never a proof
JMembership membership_J(const ProblemParams& pp, const KProfile& profile, double d,
                         const ShotConfig& cfg);

} // namespace fowlerlab
