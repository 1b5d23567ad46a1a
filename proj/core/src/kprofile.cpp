#include "fowlerlab/kprofile.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace fowlerlab {

namespace {

constexpr double kGridLo = -50.0;
constexpr double kGridHi = 50.0;
constexpr int kGridCount = 2001;

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

} // namespace

KProfile KProfile::constant(double A) {
    if (!(A > 0.0))
        throw std::invalid_argument("KProfile::constant: A must be positive");
    KProfile k;
    k.kind_ = KKind::Constant;
    k.A_ = A;
    std::ostringstream d;
    d << "const " << A;
    k.describe_ = d.str();
    k.validate_and_flag();
    return k;
}

KProfile KProfile::power(double A, double B, double ell,
                         std::vector<PowerTerm> h_terms) {
    if (!(A > 0.0))
        throw std::invalid_argument("KProfile::power: A must be positive (K may not vanish at r=0)");
    if (!(B > 0.0))
        throw std::invalid_argument("KProfile::power: B must be positive");
    if (!(ell > 0.0))
        throw std::invalid_argument("KProfile::power: ell must be positive");
    for (const auto& term : h_terms)
        if (!(term.exponent > ell))
            throw std::invalid_argument(
                "KProfile::power: every h exponent must exceed ell");
    KProfile k;
    k.kind_ = KKind::PowerPerturbed;
    k.A_ = A;
    k.B_ = B;
    k.ell_ = ell;
    k.h_terms_ = std::move(h_terms);
    std::ostringstream d;
    d << A << " + " << B << "*r^" << ell;
    for (const auto& term : k.h_terms_)
        d << " + " << term.coeff << "*r^" << term.exponent;
    k.describe_ = d.str();
    k.validate_and_flag();
    return k;
}

KProfile KProfile::tabulated(std::vector<double> t_knots,
                             std::vector<double> k_values) {
    if (t_knots.size() != k_values.size() || t_knots.size() < 2)
        throw std::invalid_argument("KProfile::tabulated: need >= 2 matching knots");
    for (size_t i = 1; i < t_knots.size(); ++i)
        if (!(t_knots[i] > t_knots[i - 1]))
            throw std::invalid_argument("KProfile::tabulated: t knots must increase");
    for (double v : k_values)
        if (!(v > 0.0))
            throw std::invalid_argument("KProfile::tabulated: K values must be positive");

    KProfile k;
    k.kind_ = KKind::Tabulated;
    k.tab_t_ = std::move(t_knots);
    k.tab_k_ = std::move(k_values);

    // Fritsch-Carlson monotone cubic slopes; endpoint slopes 0 so the
    // constant extension outside the table is C1
    const size_t n = k.tab_t_.size();
    std::vector<double> delta(n - 1);
    for (size_t i = 0; i + 1 < n; ++i)
        delta[i] = (k.tab_k_[i + 1] - k.tab_k_[i]) / (k.tab_t_[i + 1] - k.tab_t_[i]);
    k.tab_m_.assign(n, 0.0);
    for (size_t i = 1; i + 1 < n; ++i) {
        if (delta[i - 1] * delta[i] <= 0.0)
            k.tab_m_[i] = 0.0;
        else
            k.tab_m_[i] = 0.5 * (delta[i - 1] + delta[i]);
    }
    for (size_t i = 0; i + 1 < n; ++i) {
        if (delta[i] == 0.0) {
            k.tab_m_[i] = k.tab_m_[i + 1] = 0.0;
            continue;
        }
        double a = k.tab_m_[i] / delta[i];
        double b = k.tab_m_[i + 1] / delta[i];
        double s = a * a + b * b;
        if (s > 9.0) {
            double tau = 3.0 / std::sqrt(s);
            k.tab_m_[i] = tau * a * delta[i];
            k.tab_m_[i + 1] = tau * b * delta[i];
        }
    }

    std::ostringstream d;
    d << "table(" << n << " knots, t in [" << k.tab_t_.front() << ", "
      << k.tab_t_.back() << "])";
    k.describe_ = d.str();
    k.validate_and_flag();
    return k;
}

std::optional<double> KProfile::flatness_order() const {
    if (kind_ == KKind::PowerPerturbed || kind_ == KKind::Truncated)
        return ell_;
    return std::nullopt;
}

std::optional<KProfile::TruncTail> KProfile::truncation_tail() const {
    if (kind_ != KKind::Truncated) return std::nullopt;
    return TruncTail{*T_hat0_, trunc_limit_, trunc_k_, trunc_K0_};
}

KProfile::Eval KProfile::base_eval_t(double t) const {
    Eval e;
    e.value = A_ + B_ * std::exp(ell_ * t);
    e.deriv = B_ * ell_ * std::exp(ell_ * t);
    for (const auto& term : h_terms_) {
        double w = std::exp(term.exponent * t);
        e.value += term.coeff * w;
        e.deriv += term.coeff * term.exponent * w;
    }
    return e;
}

KProfile::Eval KProfile::eval_t(double t) const {
    switch (kind_) {
    case KKind::Constant:
        return {A_, 0.0};
    case KKind::PowerPerturbed:
        return base_eval_t(t);
    case KKind::Truncated: {
        if (t <= *T_hat0_) return base_eval_t(t);
        double w = std::exp(-trunc_k_ * (t - *T_hat0_));
        double gap = trunc_limit_ - trunc_K0_;
        return {trunc_limit_ - gap * w, trunc_k_ * gap * w};
    }
    case KKind::Tabulated: {
        if (t <= tab_t_.front()) return {tab_k_.front(), 0.0};
        if (t >= tab_t_.back()) return {tab_k_.back(), 0.0};
        size_t i = std::upper_bound(tab_t_.begin(), tab_t_.end(), t) - tab_t_.begin() - 1;
        double h = tab_t_[i + 1] - tab_t_[i];
        double s = (t - tab_t_[i]) / h;
        double s2 = s * s, s3 = s2 * s;
        double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
        double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
        double value = tab_k_[i] * h00 + h * tab_m_[i] * h10 + tab_k_[i + 1] * h01 +
                       h * tab_m_[i + 1] * h11;
        double d00 = 6 * s2 - 6 * s, d10 = 3 * s2 - 4 * s + 1;
        double d01 = -6 * s2 + 6 * s, d11 = 3 * s2 - 2 * s;
        double deriv = (tab_k_[i] * d00 + h * tab_m_[i] * d10 + tab_k_[i + 1] * d01 +
                        h * tab_m_[i + 1] * d11) / h;
        return {value, deriv};
    }
    }
    return {};
}

KProfile::Eval KProfile::eval_r(double r) const {
    if (r < 0.0)
        throw std::invalid_argument("KProfile::eval_r: negative radius");
    if (r == 0.0) {
        // limit derivative of B ell r^{ell-1} as r -> 0
        double dv = 0.0;
        if (kind_ == KKind::PowerPerturbed || kind_ == KKind::Truncated) {
            if (ell_ < 1.0) dv = std::numeric_limits<double>::infinity();
            else if (ell_ == 1.0) dv = B_;
        }
        return {limit_at_minus_inf(), dv};
    }
    if (kind_ == KKind::PowerPerturbed) {
        Eval e;
        e.value = A_ + B_ * std::pow(r, ell_);
        e.deriv = B_ * ell_ * std::pow(r, ell_ - 1.0);
        for (const auto& term : h_terms_) {
            e.value += term.coeff * std::pow(r, term.exponent);
            e.deriv += term.coeff * term.exponent * std::pow(r, term.exponent - 1.0);
        }
        return e;
    }
    Eval et = eval_t(std::log(r));
    return {et.value, et.deriv / r};
}

double KProfile::limit_at_minus_inf() const {
    if (kind_ == KKind::Tabulated) return tab_k_.front();
    return A_;
}

std::optional<double> KProfile::limit_at_plus_inf() const {
    switch (kind_) {
    case KKind::Constant: return A_;
    case KKind::Truncated: return trunc_limit_;
    case KKind::Tabulated: return tab_k_.back();
    case KKind::PowerPerturbed: return std::nullopt;
    }
    return std::nullopt;
}

bool KProfile::bounded() const { return limit_at_plus_inf().has_value(); }

void KProfile::validate_and_flag() {
    increasing_ = true;
    for (int i = 0; i < kGridCount; ++i) {
        double t = kGridLo + (kGridHi - kGridLo) * i / (kGridCount - 1);
        Eval e = eval_t(t);
        if (!(e.value > 0.0) && std::isfinite(e.value)) {
            std::ostringstream msg;
            msg << "KProfile: profile not positive at t = " << t
                << " (K = " << e.value << ")";
            throw std::invalid_argument(msg.str());
        }
        if (e.deriv < -1e-12 * (1.0 + std::abs(e.value))) increasing_ = false;
    }
}

KBounds KProfile::bounds() const {
    if (bounds_) return *bounds_;
    if (kind_ == KKind::Constant) return {A_, A_};
    if (kind_ == KKind::Truncated) return {A_, trunc_limit_}; // exact by construction
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (int i = 0; i < kGridCount; ++i) {
        double t = kGridLo + (kGridHi - kGridLo) * i / (kGridCount - 1);
        double v = eval_t(t).value;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return {0.9 * lo, 1.1 * hi};
}

KProfile KProfile::with_bounds(KBounds b) const {
    if (!(b.under > 0.0) || !(b.over > b.under))
        throw std::invalid_argument("KProfile::with_bounds: need 0 < K_under < K_over");
    for (int i = 0; i < kGridCount; ++i) {
        double t = kGridLo + (kGridHi - kGridLo) * i / (kGridCount - 1);
        double v = eval_t(t).value;
        if (!(b.under < v && v < b.over)) {
            std::ostringstream msg;
            msg << "KProfile::with_bounds: claimed bounds violated at t = " << t;
            throw std::invalid_argument(msg.str());
        }
    }
    KProfile k = *this;
    k.bounds_ = b;
    return k;
}

namespace {

// dK/dt divided by B ell e^{ell t}, computed term-wise so very negative t
// does not underflow: 1 + sum c_i m_i e^{(m_i - ell) t} / (B ell)
double tzero_ratio(double B, double ell, const std::vector<PowerTerm>& h, double t) {
    double ratio = 1.0;
    for (const auto& term : h)
        ratio += term.coeff * term.exponent / (B * ell) *
                 std::exp((term.exponent - ell) * t);
    return ratio;
}

bool tzero_ok_upto(double B, double ell, const std::vector<PowerTerm>& h, double T0) {
    // verification grid over ]-inf, T0]; below T0-40 the perturbation terms
    // are dominated and the ratio is within any fixed band around 1
    for (int i = 0; i <= 400; ++i) {
        double t = T0 - 40.0 + 0.1 * i;
        double ratio = tzero_ratio(B, ell, h, t);
        if (!(ratio > 0.5 && ratio < 2.0)) return false;
    }
    return true;
}

} // namespace

double KProfile::check_tzero_window() const {
    if (kind_ != KKind::PowerPerturbed)
        throw std::invalid_argument(
            "check_tzero_window: requires a PowerPerturbed profile");
    for (double T0 = 0.0; T0 >= -40.0; T0 -= 0.5) {
        if (!(base_eval_t(T0).value < A_ + 1.0)) continue;
        if (tzero_ok_upto(B_, ell_, h_terms_, T0)) return T0;
    }
    throw std::runtime_error(
        "check_tzero_window: no grid value satisfies the derivative sandwich");
}

KProfile KProfile::truncate(double T_hat0) const {
    if (kind_ != KKind::PowerPerturbed)
        throw std::invalid_argument("truncate: base profile must be PowerPerturbed");
    Eval e0 = base_eval_t(T_hat0);
    if (!(e0.value < A_ + 1.0))
        throw std::invalid_argument("truncate: requires K(T_hat0) < A+1");
    if (!tzero_ok_upto(B_, ell_, h_terms_, T_hat0))
        throw std::invalid_argument(
            "truncate: derivative sandwich violated on t <= T_hat0");

    KProfile k = *this;
    k.kind_ = KKind::Truncated;
    k.T_hat0_ = T_hat0;
    k.trunc_limit_ = A_ + 1.0;
    k.trunc_K0_ = e0.value;
    k.trunc_k_ = e0.deriv / (k.trunc_limit_ - e0.value);
    std::ostringstream d;
    d << "truncate(" << describe_ << ", T0=" << T_hat0 << ")";
    k.describe_ = d.str();
    k.validate_and_flag();
    return k;
}

KProfile KProfile::lambda_scaled(double lambda, double p) const {
    if (!(lambda > 0.0))
        throw std::invalid_argument("lambda_scaled: lambda must be positive");
    switch (kind_) {
    case KKind::Constant:
        return constant(lambda * A_);
    case KKind::PowerPerturbed: {
        double s = std::pow(lambda, 1.0 / p);
        std::vector<PowerTerm> h = h_terms_;
        for (auto& term : h) term.coeff *= lambda * std::pow(s, term.exponent);
        return power(lambda * A_, lambda * B_ * std::pow(s, ell_), ell_, std::move(h));
    }
    default:
        throw std::invalid_argument(
            "lambda_scaled: only Constant and PowerPerturbed profiles supported");
    }
}

KProfile parse_profile(const std::string& text) {
    std::string s = trim(text);
    if (s.empty()) throw std::invalid_argument("parse_profile: empty spec");

    if (s.rfind("const", 0) == 0) {
        std::istringstream in(s.substr(5));
        double A;
        if (!(in >> A))
            throw std::invalid_argument("parse_profile: expected 'const <A>'");
        return KProfile::constant(A);
    }

    if (s.rfind("table:", 0) == 0) {
        std::string path = trim(s.substr(6));
        std::ifstream in(path);
        if (!in)
            throw std::invalid_argument("parse_profile: cannot open table file " + path);
        std::vector<double> ts, ks;
        std::string line;
        while (std::getline(in, line)) {
            line = trim(line);
            if (line.empty() || line[0] == '#') continue;
            std::replace(line.begin(), line.end(), ',', ' ');
            std::istringstream ls(line);
            double t, k;
            if (!(ls >> t >> k))
                throw std::invalid_argument("parse_profile: bad table row: " + line);
            ts.push_back(t);
            ks.push_back(k);
        }
        return KProfile::tabulated(std::move(ts), std::move(ks));
    }

    // sum of signed terms: number, number*r^m, r^m, r
    std::string compact;
    for (char c : s)
        if (!std::isspace(static_cast<unsigned char>(c))) compact.push_back(c);

    double A = 0.0;
    bool have_const = false;
    std::vector<PowerTerm> terms;
    size_t i = 0;
    while (i < compact.size()) {
        double sign = 1.0;
        if (compact[i] == '+') { ++i; }
        else if (compact[i] == '-') { sign = -1.0; ++i; }
        if (i >= compact.size())
            throw std::invalid_argument("parse_profile: dangling sign in: " + s);

        double coeff = 1.0;
        bool have_coeff = false;
        if (std::isdigit(static_cast<unsigned char>(compact[i])) || compact[i] == '.') {
            size_t used = 0;
            coeff = std::stod(compact.substr(i), &used);
            i += used;
            have_coeff = true;
            if (i < compact.size() && compact[i] == '*') ++i;
        }
        if (i < compact.size() && compact[i] == 'r') {
            ++i;
            double expo = 1.0;
            if (i < compact.size() && compact[i] == '^') {
                ++i;
                size_t used = 0;
                expo = std::stod(compact.substr(i), &used);
                if (used == 0)
                    throw std::invalid_argument("parse_profile: missing exponent in: " + s);
                i += used;
            }
            terms.push_back({sign * coeff, expo});
        } else if (have_coeff) {
            A += sign * coeff;
            have_const = true;
        } else {
            throw std::invalid_argument("parse_profile: cannot parse term in: " + s);
        }
    }

    if (terms.empty()) {
        if (!have_const)
            throw std::invalid_argument("parse_profile: no terms in: " + s);
        return KProfile::constant(A);
    }
    if (!have_const)
        throw std::invalid_argument("parse_profile: power profile needs a constant term A > 0");

    // smallest exponent carries (B, ell), the rest form h(r)
    std::sort(terms.begin(), terms.end(),
              [](const PowerTerm& a, const PowerTerm& b) { return a.exponent < b.exponent; });
    double ell = terms.front().exponent;
    double B = 0.0;
    std::vector<PowerTerm> h;
    for (const auto& term : terms) {
        if (term.exponent == ell) B += term.coeff;
        else h.push_back(term);
    }
    return KProfile::power(A, B, ell, std::move(h));
}

} // namespace fowlerlab
