#pragma once

namespace fowlerlab {

// Scalar parameters of the critical problem class.  All derived quantities
// are computed once in make_params and read everywhere else, so there is a
// single source of truth for the exponents.
struct ProblemParams {
    int n = 0;              // space dimension
    double p = 0.0;         // p-Laplace exponent
    double q = 0.0;         // critical Sobolev exponent np/(n-p)
    double alpha = 0.0;     // (n-p)/p
    double beta = 0.0;      // n(p-1)/p
    double ell_star = 0.0;  // (n-p)/(p-1), flatness-order threshold
};

// Validates the admissibility window 2n/(n+2) <= p <= 2, 1 < p < n and
// derives q, alpha, beta, ell_star.  Throws std::invalid_argument with a
// message naming the violated bound.
ProblemParams make_params(int n, double p);

// Radius <-> eigenvalue correspondence R = lambda^{1/p}.
double lambda_to_radius(double lambda, double p);
double radius_to_lambda(double radius, double p);

} // namespace fowlerlab
