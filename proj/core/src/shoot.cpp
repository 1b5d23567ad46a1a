#include "fowlerlab/shoot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fowlerlab {

namespace {

Trend classify_trend(const ProblemParams& pp, const KProfile& profile,
                     const Trajectory& traj) {
    const auto& samples = traj.samples();
    const double t_end = samples.back().t;

    // track of the frozen level set: |H(x, y; K(t))| stays small over the
    // last 10 log-units
    double h_tail_max = 0.0;
    for (const auto& s : samples) {
        if (s.t < t_end - 10.0) continue;
        double H = energy(pp, profile.eval_t(s.t).value, s.x, s.y);
        h_tail_max = std::max(h_tail_max, std::abs(H));
    }
    if (h_tail_max < 1e-4) return Trend::NearHomoclinic;

    const PhaseState& last = samples.back();
    if (last.x < 1e-6 && last.x > 0.0) {
        // log-slope of x over the tail
        for (auto it = samples.rbegin(); it != samples.rend(); ++it) {
            if (it->t < t_end - 10.0 || it->x <= 0.0) break;
            if (t_end - it->t >= 5.0) {
                double slope = (std::log(last.x) - std::log(it->x)) / (t_end - it->t);
                if (slope < -0.5 * pp.alpha) return Trend::Decaying;
                break;
            }
        }
    }
    return Trend::Undetermined;
}

} // namespace

namespace {

// Energy magnitude where the post-apex trajectory passes closest to the
// origin.  This is the conditioning scale of T(d): resolving the crossing
// time to dT requires local errors below ~2 alpha |H| dT.
double closest_approach_energy(const Trajectory& traj) {
    const auto& samples = traj.samples();
    const auto& trace = traj.energy_trace();
    if (trace.size() != samples.size()) return 1.0; // no alignment, assume benign
    size_t apex = 0;
    for (size_t i = 0; i < samples.size(); ++i)
        if (samples[i].x > samples[apex].x) apex = i;
    double best = std::numeric_limits<double>::infinity();
    size_t bi = apex;
    for (size_t i = apex; i < samples.size(); ++i) {
        double m = std::max(std::abs(samples[i].x), std::abs(samples[i].y));
        if (m < best) { best = m; bi = i; }
    }
    return std::abs(trace[bi].H);
}

} // namespace

ShotResult shoot(const ProblemParams& pp, const KProfile& profile, double d,
                 const ShotConfig& cfg) {
    if (!(d > 0.0))
        throw std::invalid_argument("shoot: d must be positive");

    RadialState rs = local_init(pp, profile, d, cfg.init_rel_tol);
    PhaseState launch = to_fowler(pp, rs);

    EventSpec watch{EventKind::XCross, 0.0, true};

    // Escalate the tolerance until the crossing time is resolved: shots
    // that hug the frozen homoclinic carry their shooting information in
    // an energy of order e^{ell tau}, far below the O(1) state scale, and
    // the controller must run below that energy to see it.
    const double knob = cfg.ivp.rel_tol;
    const double t_goal = std::max(100.0 * knob, 1e-9); // target |dT|
    double tol = knob;
    IntegratorConfig icfg = cfg.ivp;
    Trajectory traj;
    bool resolved = true;
    for (int pass = 0; pass < 5; ++pass) {
        icfg.rel_tol = tol;
        icfg.abs_tol = std::min(cfg.ivp.abs_tol, 1e-4 * tol);
        traj = integrate(pp, profile, launch, icfg, {&watch, 1});
        if (!traj.first(EventKind::XCross)) break;
        if (profile.kind() == KKind::Constant) break;
        double h_ca = closest_approach_energy(traj);
        double tol_needed =
            std::clamp(4.0 * pp.alpha * h_ca * t_goal, 1e-26, knob);
        resolved = h_ca > 10.0 * tol;
        if (tol <= tol_needed || tol_needed >= 0.5 * tol) break;
        tol = tol_needed;
    }

    ShotResult res;
    res.d = d;
    res.rel_tol_used = tol;
    res.saddle_resolved = resolved;

    // sign structure and radial monotonicity on samples (Pohozaev picture:
    // y < 0 < x before the first zero, u decreasing)
    double u_prev = std::numeric_limits<double>::infinity();
    for (const auto& s : traj.samples()) {
        if (s.x < 0.0 && &s != &traj.samples().back()) res.sign_structure_ok = false;
        if (s.t > launch.t + 0.5 && s.x > 0.0 && s.y > 1e-12)
            res.sign_structure_ok = false;
        double u = s.x * std::exp(-pp.alpha * s.t);
        if (u > u_prev * (1.0 + 1e-9)) res.u_monotone = false;
        u_prev = u;
    }

    if (const Event* e = traj.first(EventKind::XCross)) {
        res.outcome = ShotOutcome::Crossing;
        res.T = e->t;
        res.R = std::exp(e->t);
        res.y_at_zero = e->state.y;
        res.t_end = e->t;
        res.x_end = e->state.x;
    } else if (traj.first(EventKind::Divergence)) {
        res.outcome = ShotOutcome::Diverged;
        res.t_end = traj.t_end();
        res.x_end = traj.samples().back().x;
    } else {
        res.outcome = ShotOutcome::PositiveUpToBudget;
        res.t_end = traj.t_end();
        res.x_end = traj.samples().back().x;
        res.trend = classify_trend(pp, profile, traj);
    }

    if (cfg.keep_trajectory) res.trajectory = std::move(traj);
    return res;
}

std::optional<double> first_zero(const ProblemParams& pp, const KProfile& profile,
                                 double d, const ShotConfig& cfg) {
    ShotConfig light = cfg;
    light.keep_trajectory = false;
    ShotResult res = shoot(pp, profile, d, light);
    if (res.outcome == ShotOutcome::Crossing) return res.R;
    return std::nullopt;
}

JMembership membership_J(const ProblemParams& pp, const KProfile& profile, double d,
                         const ShotConfig& cfg) {
    ShotConfig light = cfg;
    light.keep_trajectory = false;
    ShotResult res = shoot(pp, profile, d, light);
    switch (res.outcome) {
    case ShotOutcome::Crossing:
        return JMembership::InJ;
    case ShotOutcome::PositiveUpToBudget:
        if (res.trend == Trend::Decaying || res.trend == Trend::NearHomoclinic)
            return JMembership::NotInJWithinBudget;
        return JMembership::Unknown;
    case ShotOutcome::Diverged:
        return JMembership::Unknown;
    }
    return JMembership::Unknown;
}

} // namespace fowlerlab
