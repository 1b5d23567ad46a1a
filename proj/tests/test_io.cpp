#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "fowlerlab/io.hpp"

using namespace fowlerlab;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("hash and header carry the resolved configuration") {
    CHECK(fnv1a_hash("abc") == fnv1a_hash("abc"));
    CHECK(fnv1a_hash("abc") != fnv1a_hash("abd"));

    ProblemParams pp = make_params(4, 2.0);
    KProfile prof = parse_profile("1+r^2");
    std::string h = file_header(pp, prof, 0x1234, "critical");
    CHECK(h.find("n=4") != std::string::npos);
    CHECK(h.find("ell_star=2") != std::string::npos);
    CHECK(h.find("1 + 1*r^2") != std::string::npos);
    CHECK(h.find("regime: critical") != std::string::npos);
    CHECK(h.find(kToolVersion) != std::string::npos);
}

TEST_CASE("outcome and trend names") {
    CHECK(outcome_name(ShotOutcome::Crossing) == "crossing");
    CHECK(outcome_name(ShotOutcome::PositiveUpToBudget) == "positive_up_to_budget");
    CHECK(outcome_name(ShotOutcome::Diverged) == "diverged");
    CHECK(trend_name(Trend::Decaying) == "decaying");
    CHECK(trend_name(Trend::NearHomoclinic) == "near_homoclinic");
    CHECK(regime_name(Regime::Subcritical) == "subcritical");
}

TEST_CASE("csv and svg emission are deterministic") {
    ProblemParams pp = make_params(4, 2.0);
    KProfile prof = parse_profile("1+r^3");
    ShotConfig cfg;
    cfg.keep_trajectory = false;
    GridSpec grid{1e-2, 1e2, 12, 0.0, 0};
    BifurcationDiagram diagram = sweep_R(pp, prof, grid, cfg, 4);
    std::string header = file_header(pp, prof, fnv1a_hash("cfg"), "supercritical");

    write_diagram_csv("io_test_a.csv", header, diagram);
    write_diagram_csv("io_test_b.csv", header, diagram);
    std::string a = slurp("io_test_a.csv"), b = slurp("io_test_b.csv");
    CHECK(a == b);
    CHECK(a.find("d,T,R,outcome") != std::string::npos);
    // one row per grid point plus the five header lines and the column line
    int rows = 0;
    for (char c : a)
        if (c == '\n') ++rows;
    CHECK(rows == 12 + 6);

    write_diagram_svg("io_test.svg", diagram, "test");
    std::string svg = slurp("io_test.svg");
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("polyline") != std::string::npos);
    CHECK(svg.find("regime: supercritical") != std::string::npos);

    // trajectory csv has the expected columns
    ShotConfig keep;
    ShotResult res = shoot(pp, prof, 1.0, keep);
    write_trajectory_csv("io_test_traj.csv", header, pp, prof, *res.trajectory);
    std::string tr = slurp("io_test_traj.csv");
    CHECK(tr.find("t,x,y,H,K,dKdt") != std::string::npos);

    std::vector<ShotResult> shots{res};
    write_shots_csv("io_test_shots.csv", header, shots);
    std::string sh = slurp("io_test_shots.csv");
    CHECK(sh.find("d,outcome,T,R,y_at_zero,t_end") != std::string::npos);

    for (const char* f : {"io_test_a.csv", "io_test_b.csv", "io_test.svg",
                          "io_test_traj.csv", "io_test_shots.csv"})
        std::remove(f);
}

TEST_CASE("empty diagrams render a placeholder") {
    ProblemParams pp = make_params(4, 2.0);
    KProfile prof = KProfile::constant(1.0);
    ShotConfig cfg;
    cfg.keep_trajectory = false;
    cfg.ivp.t_budget = 10.0;
    GridSpec grid{1e-2, 1e2, 8, 0.0, 0};
    BifurcationDiagram diagram = sweep_R(pp, prof, grid, cfg, 2);
    write_diagram_svg("io_test_empty.svg", diagram, "empty");
    std::string svg = slurp("io_test_empty.svg");
    CHECK(svg.find("no crossing solutions") != std::string::npos);
    std::remove("io_test_empty.svg");
}
