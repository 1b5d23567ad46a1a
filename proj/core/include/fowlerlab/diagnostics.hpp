#pragma once

#include <span>

#include "fowlerlab/shoot.hpp"

namespace fowlerlab {

// admissible segment level a(eps) = (alpha^q eps / ((1+eps) K_over))^{(p-1)/(q-p)}
double a_of_epsilon(const ProblemParams& pp, double eps, double K_over);
// variant built from the limit of K at -inf: K_over := K(-inf) + 1
double a_of_epsilon_hat(const ProblemParams& pp, double eps, double K_minus_inf);

// one regular shot decomposed at the segment L(a): the crossing point Q at
// time tau, the subsequent axis crossing at T_cross, and the energy at Q
struct SegmentCrossingRecord {
    double d = 0.0;
    double a = 0.0;
    double tau = 0.0;     // YLevel event time
    PhaseState Q;         // Q(tau, a)
    double T_cross = 0.0; // XCross event time T(tau, a)
    double Ry = 0.0;      // y at the axis, point R(tau, a)
    double H_at_Q = 0.0;  // H(Q; tau), evaluated at the run's precision
    double rel_tol_used = 0.0;
    Trajectory trajectory;
};

// Throws NotReachedError when the trajectory misses the segment or never
// crosses the axis (e.g. constant K).
SegmentCrossingRecord record_segment_crossing(const ProblemParams& pp,
                                              const KProfile& profile, double d,
                                              double a, const ShotConfig& cfg);

// d whose trajectory meets L(a) near the requested time, found from the
// frozen-orbit estimate d ~ Q_x(-inf) e^{-alpha tau} plus one correction shot
double d_for_segment_tau(const ProblemParams& pp, const KProfile& profile, double a,
                         double tau_target, const ShotConfig& cfg);

// crossing-time bounds: T > tau + (1/alpha) ln(a/|Ry|) for the full system
// and T1 < tau + ((1+eps)/alpha) ln(a/|R1y|) for the system frozen at
// K(tau), plus the ordering T < T1
struct TimeBoundsReport {
    bool skipped = false; // constant K: frozen and full coincide
    double tau = 0.0, a = 0.0;
    double T = 0.0, T1 = 0.0;
    double Ry = 0.0, R1y = 0.0;
    double star1_bound = 0.0, star2_bound = 0.0;
    double star1_slack = 0.0, star2_slack = 0.0, tuno_gap = 0.0;
    bool star1_ok = false, star2_ok = false, tuno_ok = false;
    bool pass = false;
};
TimeBoundsReport check_time_bounds(const SegmentCrossingRecord& rec,
                                   const ProblemParams& pp, const KProfile& profile,
                                   double eps, const ShotConfig& cfg);

// a e^{-alpha (t-tau)} <= |y(t)| <= a e^{-alpha (t-tau)/(1+eps)} between the
// segment and the axis, verified at dense samples with slack 1e-9
struct SandwichReport {
    int samples = 0;
    double worst_lower_slack = 0.0; // min of |y| - a e^{-alpha(t-tau)}
    double worst_upper_slack = 0.0; // min of a e^{-alpha(t-tau)/(1+eps)} - |y|
    bool pass = false;
};
SandwichReport check_gronwall_sandwich(const SegmentCrossingRecord& rec,
                                       const ProblemParams& pp, double eps);

// least-squares slope of ln H(Q(tau, a); tau) against tau (expected ~ ell)
// and of ln |R1y(tau, a)| (expected ~ (p-1) ell / p)
struct H0Fit {
    double slope_H = 0.0;
    double slope_R1y = 0.0;
    std::vector<SegmentCrossingRecord> records;
    std::vector<double> R1y;
};
H0Fit fit_H0_exponent(const ProblemParams& pp, const KProfile& profile,
                      std::span<const double> d_list, double a, const ShotConfig& cfg);

// dH/dt identities along a computed trajectory: the running-K form against
// Kdot |x|^q / q and the frozen form against (K(tau) - K(t)) x|x|^{q-2} xdot;
// for constant K the drift of H per unit time is measured instead
struct EnergyIdentityReport {
    bool constant_K = false;
    double max_rel_err_hder = 0.0;
    double max_rel_err_frozen = 0.0;
    double drift_per_unit_time = 0.0;
    int checked_samples = 0;
    bool pass = false;
};
EnergyIdentityReport check_energy_identities(const ProblemParams& pp,
                                             const KProfile& profile,
                                             const Trajectory& traj,
                                             double rel_tol = 1e-5);

// squeeze of the full trajectory between the constant-K comparison orbits
// launched from the barrier corners, plus the decay-rate fit against
// (n-p)/(p(p-1))
struct BarrierReport {
    bool ordering_ok = false;
    int samples = 0;
    double window = 0.0; // time the full trajectory stayed in dx/dt < 0
    double decay_rate = 0.0;
    double rate_expected = 0.0;
    bool rate_ok = false;
    bool pass = false;
};
BarrierReport check_barrier_estimate(const ProblemParams& pp, const KProfile& profile,
                                     double K_under, double K_over,
                                     const IntegratorConfig& cfg);

// integration launched on the closed-form orbit of the frozen system must
// track it: sup |x - x*| over [t0, t1]
struct HomoclinicReport {
    double sup_err = 0.0;
    double apex_err = 0.0;
    bool pass = false;
};
HomoclinicReport check_homoclinic_tracking(const ProblemParams& pp, double K_value,
                                           double d, double t0, double t1,
                                           const IntegratorConfig& cfg,
                                           double tol = 1e-7);

} // namespace fowlerlab
