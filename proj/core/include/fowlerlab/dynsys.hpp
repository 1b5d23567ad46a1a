#pragma once

#include "fowlerlab/kprofile.hpp"
#include "fowlerlab/params.hpp"
#include "fowlerlab/transform.hpp"

namespace fowlerlab {

// the autonomous system with K(t) frozen at a constant value
struct FrozenSpec {
    double K_value = 0.0; // > 0
};

struct Deriv {
    double dx = 0.0;
    double dy = 0.0;
};

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

// dx/dt = alpha x + y|y|^{(2-p)/(p-1)},  dy/dt = -alpha y - K(t) x|x|^{q-2}
Deriv rhs(const ProblemParams& pp, const KProfile& profile, const PhaseState& s);
Deriv rhs_frozen(const ProblemParams& pp, const FrozenSpec& frozen, const PhaseState& s);
Deriv rhs_k(const ProblemParams& pp, double K_at_t, double x, double y);

// Pohozaev-type energy alpha x y + ((p-1)/p)|y|^{p/(p-1)} + K |x|^q / q
double energy(const ProblemParams& pp, double K_at_t, double x, double y);

// sample of the energy along a trajectory together with the derivative
// identity dH/dt = Kdot(t) |x|^q / q evaluated at the same point
struct EnergyReading {
    double t = 0.0;
    double H = 0.0;
    double dH_dt_identity = 0.0;
};

// equilibrium of the frozen system in {x > 0, y < 0}
Point2 equilibrium(const ProblemParams& pp, const FrozenSpec& frozen);

// Closed-form homoclinic trajectory of the frozen system through the
// regular ground state with u(0) = d:
//   x*(t) = d [e^{-t} + C e^{t/(p-1)}]^{-(n-p)/p}
// y* follows by differentiating the radial closed form.  C is calibrated
// from the energy-zero condition refined by Newton steps on the ODE
// residual at t = 0.
class HomoclinicOrbit {
public:
    HomoclinicOrbit(const ProblemParams& pp, const FrozenSpec& frozen, double d);

    double x(double t) const;
    double y(double t) const;
    double C() const { return C_; }
    // max_t x*, attained where the orbit meets the isocline dx/dt = 0
    double apex_x() const;
    double apex_t() const;

private:
    ProblemParams pp_;
    double K_ = 0.0;
    double d_ = 0.0;
    double C_ = 0.0;
};

double calibrate_C(const ProblemParams& pp, const FrozenSpec& frozen, double d);
double homoclinic_x(const ProblemParams& pp, const FrozenSpec& frozen, double d, double t);

// x > 0 and |H(x, y; K)| <= tol
bool gamma_membership(const ProblemParams& pp, const FrozenSpec& frozen, double x,
                      double y, double tol = 1e-10);

// corner points of the barrier box of the squeezed system:
// g_over on Gamma_over at the isocline dx/dt = 0, g_under vertically below
// on Gamma_under
struct BarrierCorners {
    Point2 g_over;
    Point2 g_under;
};
BarrierCorners barrier_corners(const ProblemParams& pp, double K_under, double K_over);

enum class BarrierRegion { InsideB, OnBoundary, Outside };

// classifies (x, y) against the compact set enclosed by the segment
// x = g_over.x and the dx/dt <= 0 branches of Gamma_over and Gamma_under
BarrierRegion barrier_sets(const ProblemParams& pp, double K_under, double K_over,
                           double x, double y, double tol = 1e-10);

} // namespace fowlerlab
