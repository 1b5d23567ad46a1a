#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "fowlerlab/sweep.hpp"

using namespace fowlerlab;

namespace {

ShotConfig sweep_cfg() {
    ShotConfig cfg;
    cfg.keep_trajectory = false;
    return cfg;
}

GridSpec small_grid() {
    GridSpec g;
    g.d_min = 1e-2;
    g.d_max = 1e3;
    g.count = 16;
    return g;
}

} // namespace

TEST_CASE("grid construction rules") {
    CHECK_THROWS_AS(make_grid({1e-2, 1e6, 4, 0.0, 0}), std::invalid_argument);
    CHECK_THROWS_AS(make_grid({1.0, 10.0, 16, 0.0, 0}), std::invalid_argument);
    CHECK_THROWS_AS(make_grid({-1.0, 10.0, 16, 0.0, 0}), std::invalid_argument);

    std::vector<double> g = make_grid({1e-2, 1e6, 64, 0.0, 0});
    CHECK(g.size() == 64);
    CHECK(g.front() == doctest::Approx(1e-2).epsilon(1e-14));
    CHECK(g.back() == doctest::Approx(1e6).epsilon(1e-12));
    for (size_t i = 1; i < g.size(); ++i) CHECK(g[i] > g[i - 1]);

    // jitter is reproducible and keeps the span
    std::vector<double> j1 = make_grid({1e-2, 1e6, 64, 0.3, 42});
    std::vector<double> j2 = make_grid({1e-2, 1e6, 64, 0.3, 42});
    CHECK(j1 == j2);
    CHECK(j1.front() == g.front());
    CHECK(j1.back() == g.back());
    CHECK(j1[5] != g[5]);
}

TEST_CASE("subcritical sweep declares and confirms a decreasing tail") {
    ProblemParams pp = make_params(4, 2.0);
    KProfile prof = parse_profile("1+r");
    BifurcationDiagram d = sweep_R(pp, prof, small_grid(), sweep_cfg(), 4);
    REQUIRE(d.regime.has_value());
    CHECK(*d.regime == Regime::Subcritical);
    CHECK(d.tail.valid);
    CHECK(d.tail.slope < 0.0);
    CHECK(d.regime_consistent);
    REQUIRE(d.fold.has_value());
    CHECK_FALSE(d.fold->interior); // minimum at the grid end
}

TEST_CASE("supercritical sweep finds an interior fold") {
    ProblemParams pp = make_params(4, 2.0);
    KProfile prof = parse_profile("1+r^3");
    BifurcationDiagram d = sweep_R(pp, prof, small_grid(), sweep_cfg(), 4);
    CHECK(*d.regime == Regime::Supercritical);
    CHECK(d.tail.slope > 0.0);
    REQUIRE(d.fold.has_value());
    CHECK(d.fold->interior);

    // R decreases into the fold and increases after it
    int argmin = -1;
    for (size_t i = 0; i < d.points.size(); ++i)
        if (d.points[i].shot.outcome == ShotOutcome::Crossing &&
            (argmin < 0 || d.points[i].shot.R < d.points[argmin].shot.R))
            argmin = static_cast<int>(i);
    REQUIRE(argmin > 0);
    REQUIRE(argmin + 1 < static_cast<int>(d.points.size()));
    CHECK(d.points[argmin - 1].shot.R > d.points[argmin].shot.R);
    CHECK(d.points[argmin + 1].shot.R > d.points[argmin].shot.R);

    auto fold = find_R0(pp, prof, d, sweep_cfg());
    REQUIRE(fold.has_value());
    CHECK(fold->interior);
    CHECK(fold->R0 <= d.fold->R0 + 1e-12);
    CHECK(fold->R0 == doctest::Approx(2.25456).epsilon(1e-3));
}

TEST_CASE("constant K has no crossing points and no fold") {
    ProblemParams pp = make_params(4, 2.0);
    BifurcationDiagram d =
        sweep_R(pp, KProfile::constant(1.0), small_grid(), sweep_cfg(), 4);
    CHECK_FALSE(d.fold.has_value());
    CHECK_FALSE(find_R0(pp, KProfile::constant(1.0), d, sweep_cfg()).has_value());
    CHECK_FALSE(d.regime.has_value());
}

TEST_CASE("solution counts around the fold") {
    ProblemParams pp = make_params(4, 2.0);
    KProfile prof = parse_profile("1+r^3");
    ShotConfig cfg = sweep_cfg();
    BifurcationDiagram d = sweep_R(pp, prof, small_grid(), cfg, 4);
    auto fold = find_R0(pp, prof, d, cfg);
    REQUIRE(fold.has_value());
    double R0 = fold->R0;

    RootQuery below = solve_radius(pp, prof, 0.8 * R0, d, cfg);
    CHECK(below.roots.empty());

    RootQuery above = solve_radius(pp, prof, 1.5 * R0, d, cfg);
    CHECK(above.roots.size() >= 2);
    for (size_t i = 1; i < above.roots.size(); ++i)
        CHECK(above.roots[i] > above.roots[i - 1]);

    // residual of each root: R(root) == target
    for (double root : above.roots) {
        auto r = first_zero(pp, prof, root, cfg);
        REQUIRE(r.has_value());
        CHECK(*r == doctest::Approx(1.5 * R0).epsilon(1e-6));
    }

    d.fold = fold; // queries judge fold proximity against the refined value
    RootQuery near = solve_radius(pp, prof, R0 * (1.0 + 5e-4), d, cfg);
    CHECK(near.near_fold_warning);
    CHECK_FALSE(above.near_fold_warning);
    CHECK_THROWS_AS(solve_radius(pp, prof, -1.0, d, cfg), std::invalid_argument);
}

TEST_CASE("eigenvalue form agrees with the radius form") {
    ProblemParams pp = make_params(4, 2.0);
    KProfile prof = parse_profile("1+r^3");
    ShotConfig cfg = sweep_cfg();
    BifurcationDiagram d = sweep_R(pp, prof, small_grid(), cfg, 4);
    auto fold = find_R0(pp, prof, d, cfg);
    REQUIRE(fold.has_value());

    double R_target = 2.0 * fold->R0;
    double lambda = radius_to_lambda(R_target, pp.p);
    RootQuery rq = solve_radius(pp, prof, R_target, d, cfg);
    EigenQuery eq = solve_eigenvalue(pp, prof, lambda, d, cfg);
    REQUIRE(eq.query.roots.size() == rq.roots.size());
    for (size_t i = 0; i < rq.roots.size(); ++i)
        CHECK(eq.query.roots[i] == doctest::Approx(rq.roots[i]).epsilon(1e-6));
    CHECK(eq.cross_checked);
    CHECK(eq.w1_residual <= 1e-6);
    CHECK_THROWS_AS(solve_eigenvalue(pp, prof, -1.0, d, cfg), std::invalid_argument);
}

TEST_CASE("sweeps are deterministic across parallelism degrees") {
    ProblemParams pp = make_params(4, 2.0);
    KProfile prof = parse_profile("1+r^2");
    GridSpec g = small_grid();
    BifurcationDiagram a = sweep_R(pp, prof, g, sweep_cfg(), 1);
    BifurcationDiagram b = sweep_R(pp, prof, g, sweep_cfg(), 8);
    REQUIRE(a.points.size() == b.points.size());
    for (size_t i = 0; i < a.points.size(); ++i) {
        CHECK(a.points[i].d == b.points[i].d);
        CHECK(a.points[i].shot.T == b.points[i].shot.T); // bitwise equality
        CHECK(a.points[i].shot.R == b.points[i].shot.R);
    }
}

TEST_CASE("per-shot failures are flagged, not fatal") {
    ProblemParams pp = make_params(4, 2.0);
    KProfile prof = parse_profile("1+r^2");
    ShotConfig cfg = sweep_cfg();
    cfg.ivp.overflow_guard = 2.0; // force Diverged outcomes on some shots
    BifurcationDiagram d = sweep_R(pp, prof, small_grid(), cfg, 4);
    CHECK(d.points.size() == 16);
    // shots still report: either a crossing before the guard bites or Diverged
    for (const auto& pt : d.points) CHECK_FALSE(pt.failed);
}
