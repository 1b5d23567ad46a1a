// Acceptance suite: one pass/fail line per criterion, exit code equal to
// the number of failures.  Optional arguments select criteria by number.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "fowlerlab/diagnostics.hpp"
#include "fowlerlab/sweep.hpp"

using namespace fowlerlab;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool pass = true;
    std::string detail;
};

void note(Outcome& o, bool ok, const char* fmt, ...) {
    if (!ok) {
        o.pass = false;
        char buf[256];
        va_list ap;
        va_start(ap, fmt);
        std::vsnprintf(buf, sizeof(buf), fmt, ap);
        va_end(ap);
        if (!o.detail.empty()) o.detail += "; ";
        o.detail += buf;
    }
}

ShotConfig baseline_cfg() {
    ShotConfig cfg; // rel 1e-10, abs 1e-12 defaults
    cfg.keep_trajectory = false;
    return cfg;
}

constexpr int kJobs = 8;

// criterion-4 sweeps cached for reuse by criteria 5 and 10
std::map<int, BifurcationDiagram> g_baseline;
std::map<int, double> g_sweep_seconds;

const BifurcationDiagram& baseline_diagram(const ProblemParams& pp, int ell) {
    auto it = g_baseline.find(ell);
    if (it != g_baseline.end()) return it->second;
    KProfile prof = parse_profile("1+r^" + std::to_string(ell));
    GridSpec grid; // 64 points over [1e-2, 1e6]
    Clock::time_point t0 = Clock::now();
    BifurcationDiagram d = sweep_R(pp, prof, grid, baseline_cfg(), kJobs);
    d.fold = find_R0(pp, prof, d, baseline_cfg());
    g_sweep_seconds[ell] = seconds_since(t0);
    return g_baseline.emplace(ell, std::move(d)).first->second;
}

// ---------------------------------------------------------------- criteria

Outcome criterion1_homoclinic() {
    Outcome o;
    ProblemParams pp = make_params(4, 2.0);
    KProfile prof = KProfile::constant(1.0);
    IntegratorConfig cfg;
    cfg.rel_tol = 1e-12;
    cfg.abs_tol = 1e-14;

    Clock::time_point t0 = Clock::now();
    for (double d : {0.5, 1.0, 2.0}) {
        HomoclinicOrbit orbit(pp, {1.0}, d);
        RadialState rs = local_init(pp, prof, d, 1e-10);
        PhaseState launch = to_fowler(pp, rs);
        note(o, launch.t <= -8.0, "d=%g launch after t=-8", d);
        Trajectory tr = integrate(pp, prof, launch, cfg, {}, 4.0);

        double sup = 0.0, max_x = 0.0;
        int arg = 0;
        const int N = 2400;
        const double dt_grid = 12.0 / N;
        for (int i = 0; i <= N; ++i) {
            double t = -8.0 + dt_grid * i;
            double x = tr.sample(t).x;
            sup = std::max(sup, std::abs(x - orbit.x(t)));
            if (x > max_x) {
                max_x = x;
                arg = i;
            }
        }
        // parabolic refinement of the sampled apex
        if (arg > 0 && arg < N) {
            double xm = tr.sample(-8.0 + dt_grid * (arg - 1)).x;
            double xp = tr.sample(-8.0 + dt_grid * (arg + 1)).x;
            double denom = 2.0 * max_x - xm - xp;
            if (denom > 0.0)
                max_x += (xp - xm) * (xp - xm) / (8.0 * denom);
        }
        note(o, sup <= 1e-6, "d=%g sup err %.3g", d, sup);
        note(o, std::abs(max_x - std::sqrt(2.0)) <= 1e-6, "d=%g apex err %.3g", d,
             std::abs(max_x - std::sqrt(2.0)));
    }
    double dt = seconds_since(t0);
    note(o, dt < 1.0, "runtime %.2fs >= 1s", dt);
    return o;
}

Outcome criterion2_energy(double p) {
    Outcome o;
    ProblemParams pp = make_params(4, p);
    KProfile prof = parse_profile("1+r^2");
    ShotConfig cfg;
    cfg.ivp.rel_tol = 1e-12;
    cfg.ivp.abs_tol = 1e-14;

    std::mt19937_64 rng(20240901u);
    std::uniform_real_distribution<double> uni(-1.0, 2.0);
    for (int i = 0; i < 10; ++i) {
        double d = std::pow(10.0, uni(rng));
        ShotResult res = shoot(pp, prof, d, cfg);
        EnergyIdentityReport er = check_energy_identities(pp, prof, *res.trajectory);
        note(o, er.max_rel_err_hder <= 1e-5, "d=%.3g Hder err %.3g", d,
             er.max_rel_err_hder);
        note(o, er.max_rel_err_frozen <= 1e-5, "d=%.3g frozen err %.3g", d,
             er.max_rel_err_frozen);
    }

    KProfile cprof = KProfile::constant(1.0);
    ShotResult res = shoot(pp, cprof, 1.0, cfg);
    EnergyIdentityReport er = check_energy_identities(pp, cprof, *res.trajectory);
    note(o, er.drift_per_unit_time <= 1e-9, "const-K drift %.3g", er.drift_per_unit_time);
    return o;
}

Outcome criterion3_crossing(double p) {
    Outcome o;
    ProblemParams pp = make_params(4, p);
    KProfile prof = parse_profile("1+r^2");
    ShotConfig cfg = baseline_cfg();
    cfg.keep_trajectory = true;
    for (double d : make_grid({1e-2, 1e4, 16, 0.0, 0})) {
        ShotResult res = shoot(pp, prof, d, cfg);
        note(o, res.outcome == ShotOutcome::Crossing, "d=%.3g not crossing", d);
        if (res.outcome != ShotOutcome::Crossing) continue;
        note(o, res.y_at_zero < 0.0, "d=%.3g y(T) >= 0", d);
        note(o, res.u_monotone, "d=%.3g u not decreasing", d);
    }
    return o;
}

Outcome criterion4_trichotomy() {
    Outcome o;
    ProblemParams pp = make_params(4, 2.0);

    const BifurcationDiagram& d1 = baseline_diagram(pp, 1);
    note(o, d1.tail.slope < -0.05, "l=1 tail slope %.3g", d1.tail.slope);
    {
        const auto& pts = d1.points;
        double R_end = pts.back().shot.R;
        double want_d = pts.back().d / 100.0;
        const DiagramPoint* near = &pts.front();
        for (const auto& pt : pts)
            if (std::abs(std::log(pt.d / want_d)) <
                std::abs(std::log(near->d / want_d)))
                near = &pt;
        note(o, R_end < 0.5 * near->shot.R, "l=1 tail not halving: %.3g vs %.3g", R_end,
             near->shot.R);
    }

    const BifurcationDiagram& d3 = baseline_diagram(pp, 3);
    note(o, d3.tail.slope > 0.05, "l=3 tail slope %.3g", d3.tail.slope);
    note(o, d3.fold && d3.fold->interior, "l=3 fold not interior");

    const BifurcationDiagram& d2 = baseline_diagram(pp, 2);
    {
        double mid_min = 1e300;
        for (const auto& pt : d2.points)
            if (pt.shot.outcome == ShotOutcome::Crossing && pt.d >= std::pow(10, 1.5) &&
                pt.d <= std::pow(10, 2.5))
                mid_min = std::min(mid_min, pt.shot.R);
        note(o, d2.tail.valid && d2.tail.min_R >= 0.5 * mid_min,
             "l=2 tail min %.3g below half of middle-decade min %.3g", d2.tail.min_R,
             mid_min);
    }

    for (int ell : {1, 2, 3})
        note(o, g_sweep_seconds[ell] < 180.0, "l=%d sweep took %.0fs", ell,
             g_sweep_seconds[ell]);
    return o;
}

Outcome criterion5_counts() {
    Outcome o;
    ProblemParams pp = make_params(4, 2.0);
    KProfile prof = parse_profile("1+r^3");
    BifurcationDiagram d3 = baseline_diagram(pp, 3); // fold already refined
    ShotConfig cfg = baseline_cfg();
    if (!d3.fold) {
        o.pass = false;
        o.detail = "no fold";
        return o;
    }
    double R0 = d3.fold->R0;

    RootQuery below = solve_radius(pp, prof, 0.8 * R0, d3, cfg);
    note(o, below.roots.empty(), "%zu roots below the fold", below.roots.size());

    for (double f : {1.2, 2.0, 5.0}) {
        double Rt = f * R0;
        RootQuery rq = solve_radius(pp, prof, Rt, d3, cfg);
        note(o, rq.roots.size() >= 2, "R=%.2fR0 has %zu roots", f, rq.roots.size());

        EigenQuery eq = solve_eigenvalue(pp, prof, radius_to_lambda(Rt, pp.p), d3, cfg);
        note(o, eq.query.roots.size() == rq.roots.size(),
             "eigenvalue root count mismatch at %.2fR0", f);
        for (size_t i = 0; i < std::min(rq.roots.size(), eq.query.roots.size()); ++i)
            note(o, std::abs(eq.query.roots[i] - rq.roots[i]) <= 1e-6 * rq.roots[i],
                 "root %zu differs between forms", i);
        note(o, eq.cross_checked && eq.w1_residual <= 1e-6,
             "lambda-scaled w(1) residual %.3g at %.2fR0", eq.w1_residual, f);
    }
    return o;
}

Outcome criterion6_small_d() {
    Outcome o;
    ProblemParams pp = make_params(4, 2.0);
    KProfile prof = parse_profile("1+r^2");
    ShotConfig cfg = baseline_cfg();
    double prev = 0.0;
    for (int k = 1; k <= 4; ++k) {
        auto r = first_zero(pp, prof, std::pow(10.0, -k), cfg);
        note(o, r.has_value(), "d=1e-%d no crossing", k);
        if (!r) continue;
        note(o, *r > prev, "R(1e-%d)=%.4g not increasing", k, *r);
        prev = *r;
    }
    return o;
}

ShotConfig deep_cfg() {
    ShotConfig cfg;
    cfg.ivp.rel_tol = 1e-13;
    cfg.ivp.abs_tol = 1e-17;
    cfg.init_rel_tol = 1e-10;
    return cfg;
}

Outcome criterion7_sandwich_bounds() {
    Outcome o;
    ProblemParams pp = make_params(4, 2.0);
    KProfile base = parse_profile("1+r^2");
    KProfile prof = base.truncate(base.check_tzero_window());
    const double eps = 0.5;
    double a = a_of_epsilon(pp, eps, prof.bounds().over);
    ShotConfig cfg = deep_cfg();

    for (double tau : {-8.3, -9.95, -11.6, -13.3, -15.0}) {
        double d = d_for_segment_tau(pp, prof, a, tau, cfg);
        SegmentCrossingRecord rec = record_segment_crossing(pp, prof, d, a, cfg);
        note(o, rec.tau >= -16.0 && rec.tau <= -8.0, "tau=%.2f outside [-16,-8]",
             rec.tau);

        SandwichReport sw = check_gronwall_sandwich(rec, pp, eps);
        note(o, sw.worst_lower_slack > -1e-9, "tau=%.1f lower sandwich %.3g", rec.tau,
             sw.worst_lower_slack);
        note(o, sw.worst_upper_slack > -1e-9, "tau=%.1f upper sandwich %.3g", rec.tau,
             sw.worst_upper_slack);

        TimeBoundsReport tb = check_time_bounds(rec, pp, prof, eps, cfg);
        note(o, tb.star1_ok, "tau=%.1f star1 slack %.3g", rec.tau, tb.star1_slack);
        note(o, tb.star2_ok, "tau=%.1f star2 slack %.3g", rec.tau, tb.star2_slack);
        note(o, tb.tuno_ok, "tau=%.1f T >= T1 (gap %.3g)", rec.tau, tb.tuno_gap);
    }
    return o;
}

Outcome criterion8_h0_scaling() {
    Outcome o;
    ProblemParams pp = make_params(4, 2.0);
    ShotConfig cfg = deep_cfg();
    struct Window {
        int ell;
        double lo, hi;
    };
    for (Window w :
         {Window{1, -14.0, -8.0}, Window{2, -13.0, -7.0}, Window{3, -9.0, -3.0}}) {
        KProfile base = parse_profile("1+r^" + std::to_string(w.ell));
        KProfile prof = base.truncate(base.check_tzero_window());
        double a = a_of_epsilon(pp, 0.5, prof.bounds().over);
        std::vector<double> ds;
        for (int i = 0; i < 6; ++i)
            ds.push_back(
                d_for_segment_tau(pp, prof, a, w.lo + (w.hi - w.lo) * i / 5.0, cfg));
        H0Fit fit = fit_H0_exponent(pp, prof, ds, a, cfg);
        double ell = w.ell;
        note(o, std::abs(fit.slope_H - ell) <= 0.05 * ell, "l=%d H slope %.4f", w.ell,
             fit.slope_H);
        double want = (pp.p - 1.0) / pp.p * ell;
        note(o, std::abs(fit.slope_R1y - want) <= 0.05 * want, "l=%d R1y slope %.4f",
             w.ell, fit.slope_R1y);
    }
    return o;
}

Outcome criterion9_barrier() {
    Outcome o;
    ProblemParams pp = make_params(4, 2.0);
    KProfile base = parse_profile("1+r^2");
    KProfile prof = base.truncate(base.check_tzero_window());
    IntegratorConfig cfg;
    BarrierReport br = check_barrier_estimate(pp, prof, 1.0, 2.0, cfg);
    note(o, br.ordering_ok, "ordering violated");
    note(o, std::abs(br.decay_rate - br.rate_expected) <= 0.10 * br.rate_expected,
         "decay rate %.4f vs %.1f", br.decay_rate, br.rate_expected);
    return o;
}

Outcome criterion10_robustness() {
    Outcome o;
    ProblemParams pp = make_params(4, 2.0);
    for (int ell : {1, 2, 3}) {
        const BifurcationDiagram& base = baseline_diagram(pp, ell);
        KProfile prof = parse_profile("1+r^" + std::to_string(ell));
        GridSpec grid;

        ShotConfig tighter = baseline_cfg();
        tighter.ivp.rel_tol = 1e-12;
        BifurcationDiagram vt = sweep_R(pp, prof, grid, tighter, kJobs);

        ShotConfig finer_init = baseline_cfg();
        finer_init.init_rel_tol = 1e-10;
        BifurcationDiagram vi = sweep_R(pp, prof, grid, finer_init, kJobs);

        double worst_rel = 0.0, worst_init = 0.0;
        for (size_t i = 0; i < base.points.size(); ++i) {
            const auto& b = base.points[i];
            if (b.shot.outcome != ShotOutcome::Crossing) continue;
            if (vt.points[i].shot.outcome == ShotOutcome::Crossing)
                worst_rel = std::max(
                    worst_rel, std::abs(vt.points[i].shot.R - b.shot.R) / b.shot.R);
            else
                note(o, false, "l=%d d=%.3g lost crossing at 1e-12", ell, b.d);
            if (vi.points[i].shot.outcome == ShotOutcome::Crossing)
                worst_init = std::max(
                    worst_init, std::abs(vi.points[i].shot.R - b.shot.R) / b.shot.R);
            else
                note(o, false, "l=%d d=%.3g lost crossing at init 1e-10", ell, b.d);
        }
        note(o, worst_rel <= 1e-6, "l=%d rel-tol sensitivity %.3g", ell, worst_rel);
        note(o, worst_init <= 1e-5, "l=%d init-tol sensitivity %.3g", ell, worst_init);
    }
    return o;
}

Outcome criterion11_p15() {
    Outcome o;
    Outcome c2 = criterion2_energy(1.5);
    note(o, c2.pass, "energy identities: %s", c2.detail.c_str());
    Outcome c3 = criterion3_crossing(1.5);
    note(o, c3.pass, "crossing grid: %s", c3.detail.c_str());

    // trichotomy signs with l in {3, 5, 7} around ell* = 5; the d-range is
    // capped where the tail energies stay above the resolvable floor
    ProblemParams pp = make_params(4, 1.5);
    ShotConfig cfg = baseline_cfg();
    GridSpec grid;
    grid.d_max = 3e3;

    BifurcationDiagram d3 = sweep_R(pp, parse_profile("1+r^3"), grid, cfg, kJobs);
    note(o, d3.tail.slope < -0.05, "l=3 slope %.3g", d3.tail.slope);

    BifurcationDiagram d7 = sweep_R(pp, parse_profile("1+r^7"), grid, cfg, kJobs);
    note(o, d7.tail.slope > 0.05, "l=7 slope %.3g", d7.tail.slope);
    note(o, d7.fold && d7.fold->interior, "l=7 fold not interior");

    BifurcationDiagram d5 = sweep_R(pp, parse_profile("1+r^5"), grid, cfg, kJobs);
    {
        double lo = std::pow(10.0, 0.3), hi = std::pow(10.0, 1.3); // middle decade
        double mid_min = 1e300;
        for (const auto& pt : d5.points)
            if (pt.shot.outcome == ShotOutcome::Crossing && pt.d >= lo && pt.d <= hi)
                mid_min = std::min(mid_min, pt.shot.R);
        note(o, d5.tail.valid && d5.tail.min_R >= 0.5 * mid_min,
             "l=5 tail min %.3g vs middle %.3g", d5.tail.min_R, mid_min);
    }
    return o;
}

} // namespace

int main(int argc, char** argv) {
    struct Item {
        int num;
        const char* name;
        Outcome (*fn)();
    };
    static const Item items[] = {
        {1, "homoclinic fidelity", criterion1_homoclinic},
        {2, "energy identities", [] { return criterion2_energy(2.0); }},
        {3, "Pohozaev crossing", [] { return criterion3_crossing(2.0); }},
        {4, "trichotomy", criterion4_trichotomy},
        {5, "bifurcation counts", criterion5_counts},
        {6, "small-d blowup", criterion6_small_d},
        {7, "Gronwall sandwich + time bounds", criterion7_sandwich_bounds},
        {8, "energy scaling", criterion8_h0_scaling},
        {9, "barrier estimate", criterion9_barrier},
        {10, "tolerance robustness", criterion10_robustness},
        {11, "p = 1.5 smoke suite", criterion11_p15},
    };

    std::set<int> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

    int failures = 0;
    Clock::time_point t0 = Clock::now();
    for (const Item& item : items) {
        if (!selected.empty() && !selected.count(item.num)) continue;
        Clock::time_point ti = Clock::now();
        Outcome o;
        try {
            o = item.fn();
        } catch (const std::exception& ex) {
            o.pass = false;
            o.detail = std::string("exception: ") + ex.what();
        }
        double dt = seconds_since(ti);
        std::printf("[%s] %2d %-32s (%.1fs)%s%s\n", o.pass ? "PASS" : "FAIL", item.num,
                    item.name, dt, o.detail.empty() ? "" : " -- ", o.detail.c_str());
        std::fflush(stdout);
        if (!o.pass) ++failures;
    }
    std::printf("%d criterion(s) failed, total %.1fs\n", failures, seconds_since(t0));
    return failures;
}
