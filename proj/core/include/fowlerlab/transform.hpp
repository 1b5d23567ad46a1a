#pragma once

#include <cmath>

#include "fowlerlab/kprofile.hpp"
#include "fowlerlab/params.hpp"

namespace fowlerlab {

// point of a trajectory in log-radius phase coordinates
struct PhaseState {
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
};

struct RadialState {
    double r = 0.0;  // > 0
    double u = 0.0;
    double du = 0.0; // u'(r)
};

// odd power s|s|^{m-1} with signed_pow(0, m) = 0; the single place
// fractional powers of signed quantities are taken
inline double signed_pow(double s, double m) {
    if (s == 0.0) return 0.0;
    return s > 0.0 ? std::pow(s, m) : -std::pow(-s, m);
}

// x = u r^alpha, y = u'|u'|^{p-2} r^beta, t = ln r
PhaseState to_fowler(const ProblemParams& pp, const RadialState& s);
RadialState from_fowler(const ProblemParams& pp, const PhaseState& s);

// State of the regular solution u(r; d) at a starting radius r0 chosen so
// the second term of the expansion
//   u(r) ~ d - ((p-1)/p) (K(0) d^{q-1} / n)^{1/(p-1)} r^{p/(p-1)}
//   u'(r) ~ -(K(0) d^{q-1} r / n)^{1/(p-1)}
// is rel_tol * d.
RadialState local_init(const ProblemParams& pp, const KProfile& profile, double d,
                       double rel_tol = 1e-8);

// starting radius used by local_init
double local_init_radius(const ProblemParams& pp, const KProfile& profile, double d,
                         double rel_tol = 1e-8);

// the expansion itself, exposed so tests can probe it at radii below r0
RadialState regular_expansion(const ProblemParams& pp, const KProfile& profile,
                              double d, double r);

} // namespace fowlerlab
