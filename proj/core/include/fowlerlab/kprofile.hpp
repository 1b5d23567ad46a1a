#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fowlerlab/params.hpp"

namespace fowlerlab {

enum class KKind { Constant, PowerPerturbed, Truncated, Tabulated };

// one term c * r^m of the perturbation h(r); every exponent must exceed ell
struct PowerTerm {
    double coeff = 0.0;
    double exponent = 0.0;
};

struct KBounds {
    double under = 0.0; // K_under, strictly positive
    double over = 0.0;  // K_over
};

// Curvature profile K(r), also evaluated in the log-radius variable
// t = ln r as K(t) = K(e^t).  Immutable after construction.
//
// PowerPerturbed represents K(r) = A + B r^ell + sum_i c_i r^{m_i} with
// m_i > ell, so the remainder condition (|h| + r|h'|)/r^ell -> 0 holds by
// construction.  Truncated equals its base profile for t <= T_hat0 and
// saturates to A+1 with a C1 exponential tail.  Tabulated interpolates
// user samples of K over t with a monotone cubic and constant extension.
class KProfile {
public:
    struct Eval {
        double value = 0.0;
        double deriv = 0.0;
    };

    static KProfile constant(double A);
    static KProfile power(double A, double B, double ell,
                          std::vector<PowerTerm> h_terms = {});
    static KProfile tabulated(std::vector<double> t_knots,
                              std::vector<double> k_values);

    KKind kind() const { return kind_; }
    double A() const { return A_; }
    double B() const { return B_; }

    // flatness order ell; absent for Constant and Tabulated profiles
    std::optional<double> flatness_order() const;

    const std::vector<PowerTerm>& h_terms() const { return h_terms_; }

    // K and dK/dr; r = 0 returns (A, limit derivative)
    Eval eval_r(double r) const;
    // K(t) = K(e^t) and dK/dt = e^t K'(e^t), evaluated without the exp
    // round trip for power profiles so very negative t stays accurate
    Eval eval_t(double t) const;

    // limit of K(t) as t -> -inf
    double limit_at_minus_inf() const;
    // finite limit as t -> +inf when one exists (Constant, Truncated,
    // Tabulated); absent for unbounded power profiles
    std::optional<double> limit_at_plus_inf() const;

    // K' >= 0 on a dense sample grid
    bool increasing() const { return increasing_; }
    bool bounded() const;

    // explicit bounds if set, otherwise inf/sup over a sampled t-grid
    // [-50, 50] widened by 10% (exact for Constant)
    KBounds bounds() const;
    // declares K_under < K(r) < K_over; validated on a sample grid
    KProfile with_bounds(KBounds b) const;

    // C1 truncation equal to this profile on t <= T_hat0, strictly
    // increasing, with limit A+1 at t -> +inf.  Requires a PowerPerturbed
    // base satisfying the (tzero) sandwich up to T_hat0.
    KProfile truncate(double T_hat0) const;
    std::optional<double> truncation_point() const { return T_hat0_; }

    // saturating-tail parameters of a Truncated profile, for evaluation at
    // extended precision: K(t > T0) = limit - (limit - K0) e^{-k (t - T0)}
    struct TruncTail {
        double T0, limit, k, K0;
    };
    std::optional<TruncTail> truncation_tail() const;

    // largest value T_hat0 from a fixed search grid such that
    // 0 < (1/2) B ell e^{ell t} < dK/dt < 2 B ell e^{ell t} holds on a
    // verification grid over t <= T_hat0 and K(T_hat0) < A+1
    double check_tzero_window() const;

    // eigenvalue rescaling: returns the profile s -> lambda * K(s lambda^{1/p});
    // supported for Constant and PowerPerturbed kinds
    KProfile lambda_scaled(double lambda, double p) const;

    // source text when built by parse_profile, else a synthetic description
    const std::string& describe() const { return describe_; }

private:
    KProfile() = default;
    void validate_and_flag();
    Eval base_eval_t(double t) const; // power-profile eval ignoring truncation

    KKind kind_ = KKind::Constant;
    double A_ = 1.0;
    double B_ = 0.0;
    double ell_ = 0.0;
    std::vector<PowerTerm> h_terms_;

    // truncation data
    std::optional<double> T_hat0_;
    double trunc_limit_ = 0.0; // A+1
    double trunc_k_ = 0.0;     // tail rate
    double trunc_K0_ = 0.0;    // K(T_hat0)

    // tabulated data (knots in t, monotone cubic slopes)
    std::vector<double> tab_t_, tab_k_, tab_m_;

    std::optional<KBounds> bounds_;
    bool increasing_ = false;
    std::string describe_;
};

// Mini-language used by the CLI and the config file:
//   "const A"                      constant profile
//   "A + B*r^L [+ c*r^m ...]"      power profile (terms in any order,
//                                  smallest exponent is ell, coefficient
//                                  1 may be omitted: "1+r^2")
//   "table:<path>"                 CSV/whitespace file of rows "t K"
KProfile parse_profile(const std::string& text);

} // namespace fowlerlab
