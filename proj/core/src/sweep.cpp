#include "fowlerlab/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <thread>

namespace fowlerlab {

void parallel_for(int count, int jobs, const std::function<void(int)>& fn) {
    jobs = std::max(1, std::min(jobs, count));
    if (jobs == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int w = 0; w < jobs; ++w)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
        });
    for (auto& th : pool) th.join();
}

std::vector<double> make_grid(const GridSpec& grid) {
    if (grid.count < 8)
        throw std::invalid_argument("make_grid: need at least 8 points");
    if (!(grid.d_min > 0.0) || !(grid.d_max > grid.d_min))
        throw std::invalid_argument("make_grid: need 0 < d_min < d_max");
    if (std::log10(grid.d_max / grid.d_min) < 3.0)
        throw std::invalid_argument("make_grid: grid must span at least 3 decades");

    const double step = std::log(grid.d_max / grid.d_min) / (grid.count - 1);
    std::mt19937_64 rng(grid.seed);
    std::uniform_real_distribution<double> uni(-0.5, 0.5);
    std::vector<double> d(grid.count);
    for (int i = 0; i < grid.count; ++i) {
        double jit = grid.jitter > 0.0 ? grid.jitter * step * uni(rng) : 0.0;
        if (i == 0 || i == grid.count - 1) jit = 0.0; // keep the span exact
        d[i] = grid.d_min * std::exp(step * i + jit);
    }
    return d;
}

std::string regime_name(Regime r) {
    switch (r) {
    case Regime::Subcritical: return "subcritical";
    case Regime::Critical: return "critical";
    case Regime::Supercritical: return "supercritical";
    }
    return "?";
}

namespace {

TailStats fit_tail(const std::vector<DiagramPoint>& points) {
    TailStats stats;
    if (points.empty()) return stats;
    const double d_max = points.back().d;
    // least squares of log10 R on log10 d over the last decade
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    double min_R = std::numeric_limits<double>::infinity();
    for (const auto& pt : points) {
        if (pt.failed || pt.shot.outcome != ShotOutcome::Crossing) continue;
        if (pt.d < 0.1 * d_max) continue;
        double lx = std::log10(pt.d), ly = std::log10(pt.shot.R);
        sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
        min_R = std::min(min_R, pt.shot.R);
        ++n;
    }
    if (n < 2) return stats;
    stats.valid = true;
    stats.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    stats.min_R = min_R;
    return stats;
}

} // namespace

BifurcationDiagram sweep_R(const ProblemParams& pp, const KProfile& profile,
                           const GridSpec& grid, const ShotConfig& cfg, int jobs) {
    std::vector<double> d = make_grid(grid);

    BifurcationDiagram diagram;
    diagram.ell_star = pp.ell_star;
    diagram.ell = profile.flatness_order();
    if (diagram.ell) {
        if (*diagram.ell < pp.ell_star) diagram.regime = Regime::Subcritical;
        else if (*diagram.ell > pp.ell_star) diagram.regime = Regime::Supercritical;
        else diagram.regime = Regime::Critical;
    }

    diagram.points.resize(d.size());
    ShotConfig light = cfg;
    light.keep_trajectory = false;
    parallel_for(static_cast<int>(d.size()), jobs, [&](int i) {
        DiagramPoint& pt = diagram.points[i];
        pt.d = d[i];
        try {
            pt.shot = shoot(pp, profile, d[i], light);
        } catch (const std::exception& ex) {
            pt.failed = true;
            pt.error = ex.what();
        }
    });

    diagram.tail = fit_tail(diagram.points);

    // discrete fold candidate
    int argmin = -1;
    for (size_t i = 0; i < diagram.points.size(); ++i) {
        const auto& pt = diagram.points[i];
        if (pt.failed || pt.shot.outcome != ShotOutcome::Crossing) continue;
        if (argmin < 0 || pt.shot.R < diagram.points[argmin].shot.R)
            argmin = static_cast<int>(i);
    }
    if (argmin >= 0) {
        FoldInfo fold;
        fold.R0 = diagram.points[argmin].shot.R;
        fold.d0 = diagram.points[argmin].d;
        fold.interior = argmin > 0 && argmin + 1 < static_cast<int>(diagram.points.size());
        diagram.fold = fold;
    }

    if (diagram.regime && diagram.tail.valid) {
        switch (*diagram.regime) {
        case Regime::Subcritical:
            diagram.regime_consistent = diagram.tail.slope < 0.0;
            break;
        case Regime::Supercritical:
            diagram.regime_consistent = diagram.tail.slope > 0.0;
            break;
        case Regime::Critical:
            diagram.regime_consistent = diagram.tail.min_R > 0.0;
            break;
        }
    }
    return diagram;
}

std::optional<FoldInfo> find_R0(const ProblemParams& pp, const KProfile& profile,
                                const BifurcationDiagram& diagram, const ShotConfig& cfg) {
    if (!diagram.fold) return std::nullopt;
    FoldInfo fold = *diagram.fold;
    if (!fold.interior) return fold; // boundary minimum: no interior refinement

    // neighbors of the discrete argmin
    int idx = -1;
    for (size_t i = 0; i < diagram.points.size(); ++i)
        if (diagram.points[i].d == fold.d0) idx = static_cast<int>(i);
    if (idx <= 0 || idx + 1 >= static_cast<int>(diagram.points.size())) return fold;

    ShotConfig light = cfg;
    light.keep_trajectory = false;
    auto R_of = [&](double d) {
        auto r = first_zero(pp, profile, d, light);
        return r ? *r : std::numeric_limits<double>::infinity();
    };

    // golden-section in log d
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = std::log(diagram.points[idx - 1].d);
    double b = std::log(diagram.points[idx + 1].d);
    double x1 = b - invphi * (b - a), x2 = a + invphi * (b - a);
    double f1 = R_of(std::exp(x1)), f2 = R_of(std::exp(x2));
    for (int i = 0; i < 60 && (b - a) > 1e-7; ++i) {
        if (f1 <= f2) {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = R_of(std::exp(x1));
        } else {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = R_of(std::exp(x2));
        }
    }
    fold.d0 = std::exp(0.5 * (a + b));
    double R_ref = R_of(fold.d0);
    if (std::isfinite(R_ref)) fold.R0 = std::min({R_ref, f1, f2});
    return fold;
}

RootQuery solve_radius(const ProblemParams& pp, const KProfile& profile,
                       double R_target, const BifurcationDiagram& diagram,
                       const ShotConfig& cfg) {
    if (!(R_target > 0.0))
        throw std::invalid_argument("solve_radius: R_target must be positive");

    RootQuery out;
    if (diagram.fold &&
        std::abs(R_target - diagram.fold->R0) <= 1e-3 * diagram.fold->R0)
        out.near_fold_warning = true; // count is ill-conditioned at tangency

    ShotConfig light = cfg;
    light.keep_trajectory = false;
    auto val = [&](double d) -> std::optional<double> {
        auto r = first_zero(pp, profile, d, light);
        if (!r) return std::nullopt;
        return *r - R_target;
    };

    std::vector<double> roots;
    const auto& pts = diagram.points;
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
        const auto& L = pts[i];
        const auto& Rp = pts[i + 1];
        if (L.failed || Rp.failed) continue;
        if (L.shot.outcome != ShotOutcome::Crossing ||
            Rp.shot.outcome != ShotOutcome::Crossing)
            continue;
        double gl = L.shot.R - R_target;
        double gr = Rp.shot.R - R_target;
        if (gl == 0.0) { roots.push_back(L.d); continue; }
        if (gl * gr > 0.0) continue;

        // bisection on fresh shots
        double lo = L.d, hi = Rp.d, glo = gl;
        bool ok = true;
        while (hi - lo > 1e-8 * lo) {
            double mid = std::sqrt(lo * hi);
            auto gm = val(mid);
            if (!gm) { ok = false; break; }
            if (glo * *gm <= 0.0) hi = mid;
            else { lo = mid; glo = *gm; }
        }
        if (ok) roots.push_back(std::sqrt(lo * hi));
    }
    // trailing grid point hitting the target exactly
    if (!pts.empty() && !pts.back().failed &&
        pts.back().shot.outcome == ShotOutcome::Crossing &&
        pts.back().shot.R == R_target)
        roots.push_back(pts.back().d);

    std::sort(roots.begin(), roots.end());
    for (double r : roots) {
        if (!out.roots.empty() && r - out.roots.back() <= 1e-6 * r) continue;
        out.roots.push_back(r);
    }
    return out;
}

EigenQuery solve_eigenvalue(const ProblemParams& pp, const KProfile& profile,
                            double lambda, const BifurcationDiagram& diagram,
                            const ShotConfig& cfg) {
    if (!(lambda > 0.0))
        throw std::invalid_argument("solve_eigenvalue: lambda must be positive");

    EigenQuery out;
    out.R_target = lambda_to_radius(lambda, pp.p);
    out.query = solve_radius(pp, profile, out.R_target, diagram, cfg);

    if (!out.query.roots.empty()) {
        // re-integrate the lambda-scaled equation with K(s lambda^{1/p}) and
        // read off w at s = 1, i.e. the phase x at t = 0
        KProfile scaled = profile.lambda_scaled(lambda, pp.p);
        double d = out.query.roots.front();
        RadialState rs = local_init(pp, scaled, d, cfg.init_rel_tol);
        PhaseState launch = to_fowler(pp, rs);
        Trajectory tr = integrate(pp, scaled, launch, cfg.ivp, {}, 0.0);
        out.w1_residual = std::abs(tr.sample(0.0).x);
        out.cross_checked = true;
    }
    return out;
}

} // namespace fowlerlab
