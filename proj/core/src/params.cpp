#include "fowlerlab/params.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace fowlerlab {

ProblemParams make_params(int n, double p) {
    if (n < 2)
        throw std::invalid_argument("make_params: dimension n must be >= 2");
    if (!std::isfinite(p))
        throw std::invalid_argument("make_params: p must be finite");

    // lower bound 2n/(n+2) compared exactly through the cross product,
    // so the boundary value p = 2n/(n+2) is admitted
    if (p * (n + 2) < 2.0 * n) {
        std::ostringstream msg;
        msg << "make_params: p = " << p << " violates the lower bound 2n/(n+2) = "
            << 2.0 * n / (n + 2);
        throw std::invalid_argument(msg.str());
    }
    if (p > 2.0) {
        std::ostringstream msg;
        msg << "make_params: p = " << p << " violates the upper bound p <= 2";
        throw std::invalid_argument(msg.str());
    }
    if (p <= 1.0) {
        std::ostringstream msg;
        msg << "make_params: p = " << p << " violates p > 1";
        throw std::invalid_argument(msg.str());
    }
    if (p >= static_cast<double>(n)) {
        std::ostringstream msg;
        msg << "make_params: p = " << p << " violates p < n = " << n;
        throw std::invalid_argument(msg.str());
    }

    ProblemParams pp;
    pp.n = n;
    pp.p = p;
    pp.q = static_cast<double>(n) * p / (n - p);
    pp.alpha = (n - p) / p;
    pp.beta = n * (p - 1.0) / p;
    pp.ell_star = (n - p) / (p - 1.0);
    return pp;
}

double lambda_to_radius(double lambda, double p) {
    if (!(lambda > 0.0))
        throw std::invalid_argument("lambda_to_radius: lambda must be positive");
    return std::pow(lambda, 1.0 / p);
}

double radius_to_lambda(double radius, double p) {
    if (!(radius > 0.0))
        throw std::invalid_argument("radius_to_lambda: radius must be positive");
    return std::pow(radius, p);
}

} // namespace fowlerlab
