#include "fowlerlab/dynsys.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace fowlerlab {

Deriv rhs_k(const ProblemParams& pp, double K_at_t, double x, double y) {
    Deriv d;
    d.dx = pp.alpha * x + signed_pow(y, 1.0 / (pp.p - 1.0));
    d.dy = -pp.alpha * y - K_at_t * signed_pow(x, pp.q - 1.0);
    return d;
}

Deriv rhs(const ProblemParams& pp, const KProfile& profile, const PhaseState& s) {
    return rhs_k(pp, profile.eval_t(s.t).value, s.x, s.y);
}

Deriv rhs_frozen(const ProblemParams& pp, const FrozenSpec& frozen, const PhaseState& s) {
    return rhs_k(pp, frozen.K_value, s.x, s.y);
}

double energy(const ProblemParams& pp, double K_at_t, double x, double y) {
    return pp.alpha * x * y +
           (pp.p - 1.0) / pp.p * std::pow(std::abs(y), pp.p / (pp.p - 1.0)) +
           K_at_t * std::pow(std::abs(x), pp.q) / pp.q;
}

Point2 equilibrium(const ProblemParams& pp, const FrozenSpec& frozen) {
    if (!(frozen.K_value > 0.0))
        throw std::invalid_argument("equilibrium: K must be positive");
    Point2 e;
    e.x = std::pow(std::pow(pp.alpha, pp.p) / frozen.K_value, 1.0 / (pp.q - pp.p));
    e.y = -std::pow(std::pow(pp.alpha, pp.q) / frozen.K_value,
                    (pp.p - 1.0) / (pp.q - pp.p));
    return e;
}

namespace {

// x*(t; C) and y*(t; C) of the closed-form orbit for a trial constant C
struct ClosedForm {
    const ProblemParams& pp;
    double K, d, C;

    double x(double t) const {
        return d * std::pow(std::exp(-t) + C * std::exp(t / (pp.p - 1.0)), -pp.alpha);
    }
    // y = Phi_{p-1}(u') e^{beta t} from u(r) = d (1 + C r^{p/(p-1)})^{-alpha}
    double y(double t) const {
        const double p = pp.p;
        const double m = p / (p - 1.0);
        double base = 1.0 + C * std::exp(m * t);
        return -std::pow(d * pp.alpha * m * C, p - 1.0) *
               std::exp((1.0 + pp.beta) * t) *
               std::pow(base, -(pp.alpha + 1.0) * (p - 1.0));
    }
    double ydot(double t) const {
        const double p = pp.p;
        const double m = p / (p - 1.0);
        double w = C * std::exp(m * t);
        return y(t) * ((1.0 + pp.beta) - (pp.alpha + 1.0) * (p - 1.0) * m * w / (1.0 + w));
    }
    // residual of the second equation of the frozen system at time t
    double residual(double t) const {
        return ydot(t) - (-pp.alpha * y(t) - K * signed_pow(x(t), pp.q - 1.0));
    }
};

} // namespace

double calibrate_C(const ProblemParams& pp, const FrozenSpec& frozen, double d) {
    if (!(d > 0.0))
        throw std::invalid_argument("calibrate_C: d must be positive");
    if (!(frozen.K_value > 0.0))
        throw std::invalid_argument("calibrate_C: K must be positive");

    auto g = [&](double C) {
        ClosedForm cf{pp, frozen.K_value, d, C};
        return energy(pp, frozen.K_value, cf.x(0.0), cf.y(0.0));
    };

    // energy-zero condition: g > 0 as C -> 0+, bracket the sign change on a
    // log grid (sign comparison, not products, which can underflow)
    double lo = 1e-30, hi = lo;
    bool glo_neg = g(lo) < 0.0;
    bool bracketed = false;
    for (int i = 0; i < 400; ++i) {
        hi = lo * 1.5;
        double ghi = g(hi);
        if (ghi == 0.0) { lo = hi; bracketed = true; break; }
        if ((ghi < 0.0) != glo_neg) { bracketed = true; break; }
        lo = hi;
    }
    if (!bracketed)
        throw std::runtime_error("calibrate_C: energy-zero condition not bracketed");
    for (int i = 0; i < 200 && hi - lo > 4e-16 * hi; ++i) {
        double mid = std::sqrt(lo * hi);
        if (mid <= lo || mid >= hi) break;
        double gm = g(mid);
        if (gm == 0.0) { lo = hi = mid; break; }
        if ((gm < 0.0) == glo_neg) lo = mid;
        else hi = mid;
    }
    double C = 0.5 * (lo + hi);

    // Newton refinement on the ODE residual at t = 0
    for (int i = 0; i < 3; ++i) {
        ClosedForm cf{pp, frozen.K_value, d, C};
        double r = cf.residual(0.0);
        double h = 1e-7 * C;
        ClosedForm cfp{pp, frozen.K_value, d, C + h};
        ClosedForm cfm{pp, frozen.K_value, d, C - h};
        double dr = (cfp.residual(0.0) - cfm.residual(0.0)) / (2.0 * h);
        if (dr == 0.0) break;
        double step = r / dr;
        if (!std::isfinite(step) || std::abs(step) > 0.5 * C) break;
        C -= step;
    }
    ClosedForm cf{pp, frozen.K_value, d, C};
    double scale = frozen.K_value * std::pow(cf.x(0.0), pp.q - 1.0);
    if (!(std::abs(cf.residual(0.0)) <= 1e-8 * (1.0 + scale))) {
        std::ostringstream msg;
        msg << "calibrate_C: residual " << cf.residual(0.0) << " too large at C = " << C;
        throw std::runtime_error(msg.str());
    }
    return C;
}

HomoclinicOrbit::HomoclinicOrbit(const ProblemParams& pp, const FrozenSpec& frozen,
                                 double d)
    : pp_(pp), K_(frozen.K_value), d_(d), C_(calibrate_C(pp, frozen, d)) {}

double HomoclinicOrbit::x(double t) const {
    return ClosedForm{pp_, K_, d_, C_}.x(t);
}

double HomoclinicOrbit::y(double t) const {
    return ClosedForm{pp_, K_, d_, C_}.y(t);
}

double HomoclinicOrbit::apex_t() const {
    // minimize e^{-t} + C e^{t/(p-1)}: balance point of the two exponentials
    const double p = pp_.p;
    return -std::log(C_ / (p - 1.0)) * (p - 1.0) / p;
}

double HomoclinicOrbit::apex_x() const { return x(apex_t()); }

double homoclinic_x(const ProblemParams& pp, const FrozenSpec& frozen, double d,
                    double t) {
    return HomoclinicOrbit(pp, frozen, d).x(t);
}

bool gamma_membership(const ProblemParams& pp, const FrozenSpec& frozen, double x,
                      double y, double tol) {
    if (!(tol > 0.0))
        throw std::invalid_argument("gamma_membership: tol must be positive");
    return x > 0.0 && std::abs(energy(pp, frozen.K_value, x, y)) <= tol;
}

BarrierCorners barrier_corners(const ProblemParams& pp, double K_under, double K_over) {
    if (!(K_under > 0.0) || !(K_over >= K_under))
        throw std::invalid_argument("barrier_corners: need 0 < K_under <= K_over");
    BarrierCorners c;
    // Gamma_over meets dx/dt = 0 where -(1/p)(alpha x)^p + K_over x^q / q = 0
    c.g_over.x = std::pow(pp.q * std::pow(pp.alpha, pp.p) / (pp.p * K_over),
                          1.0 / (pp.q - pp.p));
    c.g_over.y = -std::pow(pp.alpha * c.g_over.x, pp.p - 1.0);

    // Gamma_under at the same abscissa, below the isocline
    c.g_under.x = c.g_over.x;
    auto H_under = [&](double y) { return energy(pp, K_under, c.g_over.x, y); };
    double yhi = c.g_over.y; // H_under(yhi) <= 0 since K_under <= K_over
    if (H_under(yhi) >= 0.0) { c.g_under.y = yhi; return c; } // degenerate K_under == K_over
    double ylo = 2.0 * yhi;
    for (int i = 0; i < 200 && H_under(ylo) < 0.0; ++i) ylo *= 2.0;
    while (yhi - ylo > 1e-15 * std::max(1.0, std::abs(ylo))) {
        double mid = 0.5 * (ylo + yhi);
        if (H_under(mid) >= 0.0) ylo = mid;
        else yhi = mid;
    }
    c.g_under.y = 0.5 * (ylo + yhi);
    return c;
}

BarrierRegion barrier_sets(const ProblemParams& pp, double K_under, double K_over,
                           double x, double y, double tol) {
    if (!(K_under > 0.0) || !(K_over >= K_under))
        throw std::invalid_argument("barrier_sets: need 0 < K_under <= K_over");
    if (x < 0.0) return BarrierRegion::Outside;

    BarrierCorners c = barrier_corners(pp, K_under, K_over);
    double H_over = energy(pp, K_over, x, y);
    double H_under = energy(pp, K_under, x, y);
    double xdot = pp.alpha * x + signed_pow(y, 1.0 / (pp.p - 1.0));

    bool inside = x > tol && x < c.g_over.x - tol && xdot < -tol && H_over > tol &&
                  H_under < -tol;
    if (inside) return BarrierRegion::InsideB;

    bool near = x > -tol && x < c.g_over.x + tol && xdot < tol && H_over > -tol &&
                H_under < tol;
    if (near) return BarrierRegion::OnBoundary;
    return BarrierRegion::Outside;
}

} // namespace fowlerlab
