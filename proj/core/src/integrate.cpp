#include "fowlerlab/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <quadmath.h>

namespace fowlerlab {

// write access to the trajectory internals for the stepper
struct TrajectoryBuilder {
    static std::vector<PhaseState>& samples(Trajectory& t) { return t.samples_; }
    static std::vector<Event>& events(Trajectory& t) { return t.events_; }
    static std::vector<EnergyReading>& energy(Trajectory& t) { return t.energy_; }
    static std::vector<Trajectory::DenseSeg>& dense(Trajectory& t) { return t.dense_; }
};

namespace {

// ---- scalar operations for the two stepper instantiations ----------------

template <class Real> struct Ops;

template <> struct Ops<long double> {
    static long double abs(long double v) { return fabsl(v); }
    static long double exp(long double v) { return expl(v); }
    static long double sqrt(long double v) { return sqrtl(v); }
    static long double pow(long double b, long double e) { return powl(b, e); }
};

template <> struct Ops<__float128> {
    static __float128 abs(__float128 v) { return fabsq(v); }
    static __float128 exp(__float128 v) { return expq(v); }
    static __float128 sqrt(__float128 v) { return sqrtq(v); }
    static __float128 pow(__float128 b, __float128 e) { return powq(b, e); }
};

// s |s|^{m-1} with a repeated-multiplication fast path for small integer m
template <class Real> Real signed_pow_r(Real s, double m) {
    if (s == Real(0)) return Real(0);
    Real a = s < Real(0) ? -s : s;
    Real mag;
    double mr = std::round(m);
    if (mr == m && mr >= 1.0 && mr <= 8.0) {
        mag = a;
        for (int i = 1; i < static_cast<int>(mr); ++i) mag *= a;
    } else {
        mag = Ops<Real>::pow(a, Real(m));
    }
    return s < Real(0) ? -mag : mag;
}

template <class Real> Real abs_pow_r(Real s, double m) {
    Real a = s < Real(0) ? -s : s;
    if (a == Real(0)) return Real(0);
    double mr = std::round(m);
    if (mr == m && mr >= 1.0 && mr <= 8.0) {
        Real mag = a;
        for (int i = 1; i < static_cast<int>(mr); ++i) mag *= a;
        return mag;
    }
    return Ops<Real>::pow(a, Real(m));
}

// ---- curvature profile evaluated at the stepper's precision --------------
//
// Only the exponential-sum kinds gain anything from extra digits; a
// Tabulated profile falls back to its double interpolant.
template <class Real> struct ProfileEval {
    const KProfile& profile;
    KKind kind;
    Real A = 0, B = 0, ell = 0;
    std::vector<std::pair<Real, Real>> terms; // (coeff, exponent)
    Real t0 = 0, limit = 0, rate = 0, K0 = 0;  // truncation tail

    explicit ProfileEval(const KProfile& p) : profile(p), kind(p.kind()) {
        A = p.A();
        if (kind == KKind::PowerPerturbed || kind == KKind::Truncated) {
            B = p.B();
            ell = *p.flatness_order();
            for (const auto& h : p.h_terms())
                terms.push_back({Real(h.coeff), Real(h.exponent)});
        }
        if (auto tail = p.truncation_tail()) {
            t0 = tail->T0;
            limit = tail->limit;
            rate = tail->k;
            K0 = tail->K0;
        }
    }

    void eval(Real t, Real& K, Real& Kdot) const {
        switch (kind) {
        case KKind::Constant:
            K = A;
            Kdot = 0;
            return;
        case KKind::Truncated:
            if (t > t0) {
                Real w = Ops<Real>::exp(-rate * (t - t0));
                K = limit - (limit - K0) * w;
                Kdot = rate * (limit - K0) * w;
                return;
            }
            [[fallthrough]];
        case KKind::PowerPerturbed: {
            Real w = Ops<Real>::exp(ell * t);
            K = A + B * w;
            Kdot = B * ell * w;
            for (const auto& [c, m] : terms) {
                Real wm = Ops<Real>::exp(m * t);
                K += c * wm;
                Kdot += c * m * wm;
            }
            return;
        }
        case KKind::Tabulated: {
            KProfile::Eval e = profile.eval_t(static_cast<double>(t));
            K = e.value;
            Kdot = e.deriv;
            return;
        }
        }
    }
};

// ---- Dormand-Prince 5(4) tableau ------------------------------------------

template <class Real> struct Tableau {
    static constexpr Real c2 = Real(1) / 5, c3 = Real(3) / 10, c4 = Real(4) / 5,
                          c5 = Real(8) / 9;
    static constexpr Real a21 = Real(1) / 5;
    static constexpr Real a31 = Real(3) / 40, a32 = Real(9) / 40;
    static constexpr Real a41 = Real(44) / 45, a42 = Real(-56) / 15,
                          a43 = Real(32) / 9;
    static constexpr Real a51 = Real(19372) / 6561, a52 = Real(-25360) / 2187,
                          a53 = Real(64448) / 6561, a54 = Real(-212) / 729;
    static constexpr Real a61 = Real(9017) / 3168, a62 = Real(-355) / 33,
                          a63 = Real(46732) / 5247, a64 = Real(49) / 176,
                          a65 = Real(-5103) / 18656;
    static constexpr Real a71 = Real(35) / 384, a73 = Real(500) / 1113,
                          a74 = Real(125) / 192, a75 = Real(-2187) / 6784,
                          a76 = Real(11) / 84;
    static constexpr Real e1 = Real(71) / 57600, e3 = Real(-71) / 16695,
                          e4 = Real(71) / 1920, e5 = Real(-17253) / 339200,
                          e6 = Real(22) / 525, e7 = Real(-1) / 40;
    static constexpr Real d1 = Real(-12715105075.0L) / Real(11282082432.0L);
    static constexpr Real d3 = Real(87487479700.0L) / Real(32700410799.0L);
    static constexpr Real d4 = Real(-10690763975.0L) / Real(1880347072.0L);
    static constexpr Real d5 = Real(701980252875.0L) / Real(199316789632.0L);
    static constexpr Real d6 = Real(-1453857185.0L) / Real(822651844.0L);
    static constexpr Real d7 = Real(69997945.0L) / Real(29380423.0L);
};

template <class Real> struct Vec2 {
    Real v[2];
    Real& operator[](int i) { return v[i]; }
    Real operator[](int i) const { return v[i]; }
};

template <class Real> struct DenseSegR {
    Real t0, h;
    Real rcont[5][2];
};

template <class Real> Vec2<Real> interp_r(const DenseSegR<Real>& s, Real t) {
    Real theta = (t - s.t0) / s.h;
    Real theta1 = Real(1) - theta;
    Vec2<Real> out;
    for (int i = 0; i < 2; ++i)
        out[i] = s.rcont[0][i] +
                 theta * (s.rcont[1][i] +
                          theta1 * (s.rcont[2][i] +
                                    theta * (s.rcont[3][i] + theta1 * s.rcont[4][i])));
    return out;
}

struct WatchState {
    EventSpec spec;
    bool active = true;
    long double last_g = 0.0L;
};

template <class Real>
Real event_fn_r(const ProblemParams& pp, const EventSpec& w, Real x, Real y) {
    switch (w.kind) {
    case EventKind::XCross: return x;
    case EventKind::YLevel: return y + Real(w.a);
    case EventKind::RegionExit:
        return Real(pp.alpha) * x + signed_pow_r(y, 1.0 / (pp.p - 1.0));
    default: return Real(0);
    }
}

bool qualifies(const EventSpec& w, long double g_prev, long double g_next) {
    switch (w.kind) {
    case EventKind::XCross: return g_prev > 0.0L && g_next <= 0.0L;
    case EventKind::YLevel: return g_prev < 0.0L && g_next >= 0.0L;
    case EventKind::RegionExit: return g_prev < 0.0L && g_next >= 0.0L;
    default: return false;
    }
}

template <class Real>
Real energy_r(const ProblemParams& pp, Real K, Real x, Real y) {
    return Real(pp.alpha) * x * y +
           Real(pp.p - 1.0) / Real(pp.p) * abs_pow_r(y, pp.p / (pp.p - 1.0)) +
           K * abs_pow_r(x, pp.q) / Real(pp.q);
}

template <class Real>
Trajectory run_integration(const ProblemParams& pp, const KProfile& profile,
                           PhaseState launch, const IntegratorConfig& cfg,
                           std::span<const EventSpec> watch,
                           std::optional<double> t_end_override) {
    using T = Tableau<Real>;
    Trajectory traj;
    const Real t_end = t_end_override ? Real(*t_end_override)
                                      : Real(launch.t) + Real(cfg.t_budget);
    const Real dir = t_end >= Real(launch.t) ? Real(1) : Real(-1);

    const Real alpha = pp.alpha;
    const double yexp = 1.0 / (pp.p - 1.0);
    const double xexp = pp.q - 1.0;
    const ProfileEval<Real> kev(profile);

    auto f = [&](Real t, const Vec2<Real>& s) -> Vec2<Real> {
        Real K, Kd;
        kev.eval(t, K, Kd);
        return {alpha * s[0] + signed_pow_r(s[1], yexp),
                -alpha * s[1] - K * signed_pow_r(s[0], xexp)};
    };
    auto push_energy = [&](Real t, const Vec2<Real>& s) {
        Real K, Kd;
        kev.eval(t, K, Kd);
        TrajectoryBuilder::energy(traj).push_back(
            {static_cast<double>(t), static_cast<double>(energy_r(pp, K, s[0], s[1])),
             static_cast<double>(Kd * abs_pow_r(s[0], pp.q) / Real(pp.q))});
    };
    auto event_energy = [&](Real t, const Vec2<Real>& s) -> double {
        Real K, Kd;
        kev.eval(t, K, Kd);
        return static_cast<double>(energy_r(pp, K, s[0], s[1]));
    };
    auto store_dense = [&](const DenseSegR<Real>& seg) {
        Trajectory::DenseSeg out;
        out.t0 = static_cast<long double>(seg.t0);
        out.h = static_cast<long double>(seg.h);
        for (int c = 0; c < 5; ++c)
            for (int i = 0; i < 2; ++i)
                out.rcont[c][i] = static_cast<long double>(seg.rcont[c][i]);
        TrajectoryBuilder::dense(traj).push_back(out);
    };

    Real t = launch.t;
    Vec2<Real> y{Real(launch.x), Real(launch.y)};
    TrajectoryBuilder::samples(traj).push_back(launch);
    push_energy(t, y);

    std::vector<WatchState> ws;
    for (const auto& w : watch)
        ws.push_back({w, true, (long double)event_fn_r(pp, w, y[0], y[1])});

    Vec2<Real> k1 = f(t, y);

    // conservative initial step from the state/slope scales
    Real sc0 = 0, sc1 = 0;
    for (int i = 0; i < 2; ++i) {
        Real sc = Real(cfg.abs_tol) + Real(cfg.rel_tol) * Ops<Real>::abs(y[i]);
        sc0 = std::max(sc0, Ops<Real>::abs(y[i]) / sc);
        sc1 = std::max(sc1, Ops<Real>::abs(k1[i]) / sc);
    }
    Real h = dir * std::min({Real(cfg.max_step),
                             (sc1 > Real(0) ? Real(0.01) * sc0 / sc1 + Real(1e-6)
                                            : Real(cfg.max_step)),
                             Ops<Real>::abs(t_end - t)});
    if (h == Real(0)) h = dir * Real(1e-8);

    Real errold = Real(1e-4);
    bool done = false;
    int rejects_in_row = 0;

    while (!done) {
        if (dir * (t + h - t_end) > Real(0)) h = t_end - t;
        if (dir * h <= Real(1e-14) * std::max(Real(1), Ops<Real>::abs(t))) {
            if (Ops<Real>::abs(t - t_end) <=
                Real(1e-12) * std::max(Real(1), Ops<Real>::abs(t_end))) {
                TrajectoryBuilder::events(traj).push_back({EventKind::BudgetExceeded, (double)t,
                                        {(double)t, (double)y[0], (double)y[1]}, 0.0,
                                        event_energy(t, y)});
            } else {
                TrajectoryBuilder::events(traj).push_back({EventKind::Divergence, (double)t,
                                        {(double)t, (double)y[0], (double)y[1]}, 0.0,
                                        event_energy(t, y)});
            }
            break;
        }

        Vec2<Real> k2, k3, k4, k5, k6, k7, ynew, yerr, tmp;
        for (int i = 0; i < 2; ++i) tmp[i] = y[i] + h * T::a21 * k1[i];
        k2 = f(t + T::c2 * h, tmp);
        for (int i = 0; i < 2; ++i)
            tmp[i] = y[i] + h * (T::a31 * k1[i] + T::a32 * k2[i]);
        k3 = f(t + T::c3 * h, tmp);
        for (int i = 0; i < 2; ++i)
            tmp[i] = y[i] + h * (T::a41 * k1[i] + T::a42 * k2[i] + T::a43 * k3[i]);
        k4 = f(t + T::c4 * h, tmp);
        for (int i = 0; i < 2; ++i)
            tmp[i] = y[i] + h * (T::a51 * k1[i] + T::a52 * k2[i] + T::a53 * k3[i] +
                                 T::a54 * k4[i]);
        k5 = f(t + T::c5 * h, tmp);
        for (int i = 0; i < 2; ++i)
            tmp[i] = y[i] + h * (T::a61 * k1[i] + T::a62 * k2[i] + T::a63 * k3[i] +
                                 T::a64 * k4[i] + T::a65 * k5[i]);
        k6 = f(t + h, tmp);
        for (int i = 0; i < 2; ++i)
            ynew[i] = y[i] + h * (T::a71 * k1[i] + T::a73 * k3[i] + T::a74 * k4[i] +
                                  T::a75 * k5[i] + T::a76 * k6[i]);
        k7 = f(t + h, ynew);
        for (int i = 0; i < 2; ++i)
            yerr[i] = h * (T::e1 * k1[i] + T::e3 * k3[i] + T::e4 * k4[i] +
                           T::e5 * k5[i] + T::e6 * k6[i] + T::e7 * k7[i]);

        Real err = 0;
        bool finite = true;
        for (int i = 0; i < 2; ++i) {
            if (!std::isfinite((double)ynew[i])) finite = false;
            Real sc = Real(cfg.abs_tol) +
                      Real(cfg.rel_tol) *
                          std::max(Ops<Real>::abs(y[i]), Ops<Real>::abs(ynew[i]));
            err += (yerr[i] / sc) * (yerr[i] / sc);
        }
        err = Ops<Real>::sqrt(Real(0.5) * err);

        // the off-axis power term has unbounded curvature at y = 0 for
        // p < 2: do not let y flip sign in one large step
        bool y_flip_guard = pp.p < 2.0 && y[1] * ynew[1] < Real(0) &&
                            Ops<Real>::abs(y[1]) > Real(100) * Real(cfg.abs_tol) &&
                            Ops<Real>::abs(h) > Real(1e-6);

        if (!finite || !(err <= Real(1)) || y_flip_guard) {
            if (!finite || !std::isfinite((double)err)) h *= Real(0.5);
            else if (y_flip_guard) h *= Real(0.5);
            else {
                Real fac11 = Ops<Real>::pow(err, Real(0.17));
                h /= std::min(Real(5), fac11 / Real(0.9));
            }
            if (++rejects_in_row > 400) {
                TrajectoryBuilder::events(traj).push_back({EventKind::Divergence, (double)t,
                                        {(double)t, (double)y[0], (double)y[1]}, 0.0,
                                        event_energy(t, y)});
                break;
            }
            continue;
        }
        rejects_in_row = 0;

        DenseSegR<Real> seg;
        seg.t0 = t;
        seg.h = h;
        for (int i = 0; i < 2; ++i) {
            Real ydiff = ynew[i] - y[i];
            Real bspl = h * k1[i] - ydiff;
            seg.rcont[0][i] = y[i];
            seg.rcont[1][i] = ydiff;
            seg.rcont[2][i] = bspl;
            seg.rcont[3][i] = ydiff - h * k7[i] - bspl;
            seg.rcont[4][i] = h * (T::d1 * k1[i] + T::d3 * k3[i] + T::d4 * k4[i] +
                                   T::d5 * k5[i] + T::d6 * k6[i] + T::d7 * k7[i]);
        }
        store_dense(seg);

        // scan watched events on dense probes across this step
        struct Candidate {
            Event ev;
            bool stop;
        };
        std::vector<Candidate> fired;
        constexpr int kProbes = 8;
        for (auto& w : ws) {
            if (!w.active) continue;
            long double g_prev = w.last_g;
            Real t_prev = t;
            for (int j = 1; j <= kProbes; ++j) {
                Real tj = t + h * Real(j) / Real(kProbes);
                Vec2<Real> sj = j == kProbes ? ynew : interp_r(seg, tj);
                long double gj = (long double)event_fn_r(pp, w.spec, sj[0], sj[1]);
                if (qualifies(w.spec, g_prev, gj)) {
                    double t_scale = std::max(1.0, std::abs((double)tj));
                    Real lo = t_prev, hi = tj;
                    long double glo = g_prev;
                    while (Ops<Real>::abs(hi - lo) > Real(1e-14) * Real(t_scale)) {
                        Real mid = Real(0.5) * (lo + hi);
                        Vec2<Real> sm = interp_r(seg, mid);
                        long double gm =
                            (long double)event_fn_r(pp, w.spec, sm[0], sm[1]);
                        if (qualifies(w.spec, glo, gm)) hi = mid;
                        else { lo = mid; glo = gm; }
                    }
                    Real te = Real(0.5) * (lo + hi);
                    Vec2<Real> se = interp_r(seg, te);
                    bool ok = true;
                    if (w.spec.kind == EventKind::YLevel) {
                        double xmax = segment_width(pp, w.spec.a);
                        ok = (double)se[0] >= -1e-9 && (double)se[0] <= xmax + 1e-9;
                    }
                    if (ok) {
                        fired.push_back({{w.spec.kind, (double)te,
                                          {(double)te, (double)se[0], (double)se[1]},
                                          w.spec.a, event_energy(te, se)},
                                         w.spec.stop});
                        w.active = false;
                        break;
                    }
                }
                g_prev = gj;
                t_prev = tj;
            }
            if (w.active) w.last_g = g_prev;
        }
        std::sort(fired.begin(), fired.end(),
                  [&](const Candidate& a, const Candidate& b) {
                      return (double)dir * a.ev.t < (double)dir * b.ev.t;
                  });
        for (const auto& c : fired) {
            TrajectoryBuilder::events(traj).push_back(c.ev);
            if (c.stop) {
                TrajectoryBuilder::samples(traj).push_back(c.ev.state);
                push_energy(Real(c.ev.t), {Real(c.ev.state.x), Real(c.ev.state.y)});
                done = true;
                break;
            }
        }
        if (done) break;

        t += h;
        y = ynew;
        k1 = k7; // FSAL
        TrajectoryBuilder::samples(traj).push_back({(double)t, (double)y[0], (double)y[1]});
        push_energy(t, y);

        if (!std::isfinite((double)y[0]) || !std::isfinite((double)y[1]) ||
            Ops<Real>::abs(y[0]) > Real(cfg.overflow_guard) ||
            Ops<Real>::abs(y[1]) > Real(cfg.overflow_guard)) {
            TrajectoryBuilder::events(traj).push_back({EventKind::Divergence, (double)t,
                                    {(double)t, (double)y[0], (double)y[1]}, 0.0,
                                    event_energy(t, y)});
            break;
        }
        if (Ops<Real>::abs(t - t_end) <=
            Real(1e-12) * std::max(Real(1), Ops<Real>::abs(t_end))) {
            TrajectoryBuilder::events(traj).push_back({EventKind::BudgetExceeded, (double)t,
                                    {(double)t, (double)y[0], (double)y[1]}, 0.0,
                                    event_energy(t, y)});
            break;
        }

        Real fac11 = Ops<Real>::pow(err, Real(0.17));
        Real fac = fac11 / Ops<Real>::pow(errold, Real(0.04));
        fac = std::max(Real(0.1), std::min(Real(5), fac / Real(0.9)));
        h = h / fac;
        if (Ops<Real>::abs(h) > Real(cfg.max_step)) h = dir * Real(cfg.max_step);
        errold = std::max(err, Real(1e-4));
    }

    return traj;
}

Vec2<long double> interp_ld(const Trajectory::DenseSeg& s, long double t) {
    long double theta = (t - s.t0) / s.h;
    long double theta1 = 1.0L - theta;
    Vec2<long double> out;
    for (int i = 0; i < 2; ++i)
        out[i] = s.rcont[0][i] +
                 theta * (s.rcont[1][i] +
                          theta1 * (s.rcont[2][i] +
                                    theta * (s.rcont[3][i] + theta1 * s.rcont[4][i])));
    return out;
}

} // namespace

PhaseState Trajectory::sample(double t) const {
    if (dense_.empty()) return samples_.front();
    double lo = t_begin(), hi = t_end();
    if (lo > hi) std::swap(lo, hi);
    t = std::clamp(t, lo, hi);
    const bool fwd = dense_.front().h > 0.0L;
    auto it = std::lower_bound(dense_.begin(), dense_.end(), (long double)t,
                               [fwd](const DenseSeg& s, long double tt) {
                                   return fwd ? (s.t0 + s.h < tt) : (s.t0 + s.h > tt);
                               });
    if (it == dense_.end()) --it;
    Vec2<long double> v = interp_ld(*it, t);
    return {t, static_cast<double>(v[0]), static_cast<double>(v[1])};
}

const Event* Trajectory::first(EventKind kind) const {
    for (const auto& e : events_)
        if (e.kind == kind) return &e;
    return nullptr;
}

double segment_width(const ProblemParams& pp, double a) {
    return std::pow(a, 1.0 / (pp.p - 1.0)) / pp.alpha;
}

Trajectory integrate(const ProblemParams& pp, const KProfile& profile,
                     PhaseState launch, const IntegratorConfig& cfg,
                     std::span<const EventSpec> watch,
                     std::optional<double> t_end_override) {
    if (cfg.rel_tol < 3e-17)
        return run_integration<__float128>(pp, profile, launch, cfg, watch,
                                           t_end_override);
    return run_integration<long double>(pp, profile, launch, cfg, watch,
                                        t_end_override);
}

Event first_y_level_crossing(const ProblemParams& pp, const KProfile& profile,
                             PhaseState launch, double a, const IntegratorConfig& cfg) {
    if (!(a > 0.0))
        throw std::invalid_argument("first_y_level_crossing: a must be positive");
    double Ey = std::abs(equilibrium(pp, {profile.bounds().over}).y);
    if (!(a < Ey))
        throw std::invalid_argument(
            "first_y_level_crossing: a must stay below |E_y| of the frozen system "
            "at the profile upper bound");
    EventSpec spec{EventKind::YLevel, a, true};
    Trajectory tr = integrate(pp, profile, launch, cfg, {&spec, 1});
    if (const Event* e = tr.first(EventKind::YLevel)) return *e;
    throw NotReachedError("first_y_level_crossing: budget exhausted before the segment");
}

} // namespace fowlerlab
