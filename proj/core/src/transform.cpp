#include "fowlerlab/transform.hpp"

#include <cmath>
#include <stdexcept>

namespace fowlerlab {

PhaseState to_fowler(const ProblemParams& pp, const RadialState& s) {
    if (!(s.r > 0.0))
        throw std::invalid_argument("to_fowler: radius must be positive");
    PhaseState out;
    out.t = std::log(s.r);
    out.x = s.u * std::pow(s.r, pp.alpha);
    out.y = signed_pow(s.du, pp.p - 1.0) * std::pow(s.r, pp.beta);
    return out;
}

RadialState from_fowler(const ProblemParams& pp, const PhaseState& s) {
    RadialState out;
    out.r = std::exp(s.t);
    out.u = s.x * std::exp(-pp.alpha * s.t);
    out.du = signed_pow(s.y, 1.0 / (pp.p - 1.0)) *
             std::exp(-pp.beta * s.t / (pp.p - 1.0));
    return out;
}

RadialState regular_expansion(const ProblemParams& pp, const KProfile& profile,
                              double d, double r) {
    const double K0 = profile.eval_r(0.0).value;
    const double p = pp.p;
    const double slope = std::pow(K0 * std::pow(d, pp.q - 1.0) / pp.n, 1.0 / (p - 1.0));
    RadialState s;
    s.r = r;
    s.u = d - (p - 1.0) / p * slope * std::pow(r, p / (p - 1.0));
    s.du = -slope * std::pow(r, 1.0 / (p - 1.0));
    return s;
}

double local_init_radius(const ProblemParams& pp, const KProfile& profile, double d,
                         double rel_tol) {
    if (!(d > 0.0))
        throw std::invalid_argument("local_init: d must be positive");
    if (!(rel_tol > 0.0) || rel_tol > 1e-6)
        throw std::invalid_argument("local_init: rel_tol must lie in (0, 1e-6]");
    const double K0 = profile.eval_r(0.0).value;
    const double p = pp.p;
    return std::pow(rel_tol * d * p / (p - 1.0) *
                        std::pow(pp.n / (K0 * std::pow(d, pp.q - 1.0)), 1.0 / (p - 1.0)),
                    (p - 1.0) / p);
}

RadialState local_init(const ProblemParams& pp, const KProfile& profile, double d,
                       double rel_tol) {
    const double r0 = local_init_radius(pp, profile, d, rel_tol);
    return regular_expansion(pp, profile, d, r0);
}

} // namespace fowlerlab
