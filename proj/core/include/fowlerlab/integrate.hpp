#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "fowlerlab/dynsys.hpp"

namespace fowlerlab {

// Tolerances below ~3e-17 cannot be met by 80-bit arithmetic; such runs
// are dispatched to a __float128 instantiation of the same stepper.
struct IntegratorConfig {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double max_step = 0.5;
    double t_budget = 60.0;       // integration horizon beyond the launch time
    double overflow_guard = 1e12; // |x| or |y| beyond this raises Divergence
};

enum class EventKind { XCross, YLevel, RegionExit, Divergence, BudgetExceeded };

struct Event {
    EventKind kind = EventKind::BudgetExceeded;
    double t = 0.0;
    PhaseState state;
    double a = 0.0; // level for YLevel
    double H = 0.0; // energy at the event, evaluated at the run's precision
};

// a watched condition; stop ends the integration at the refined event time
struct EventSpec {
    EventKind kind = EventKind::XCross;
    double a = 0.0;
    bool stop = true;
};

struct NotReachedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Dense-output trajectory of one integration run.  Immutable once returned.
// Step accumulation and event refinement run in long double so energies of
// order e^{ell tau} stay resolvable deep in the tau < 0 asymptotic regime;
// the public surface stays double.
class Trajectory {
public:
    struct DenseSeg {
        long double t0, h;       // step start and signed width
        long double rcont[5][2]; // interpolation coefficients per component
    };

    const std::vector<PhaseState>& samples() const { return samples_; }
    const std::vector<Event>& events() const { return events_; }
    const std::vector<EnergyReading>& energy_trace() const { return energy_; }

    double t_begin() const { return samples_.front().t; }
    double t_end() const { return samples_.back().t; }

    // continuous-output interpolation; t clamped to the covered range
    PhaseState sample(double t) const;

    const Event* first(EventKind kind) const;

private:
    friend struct TrajectoryBuilder;
    std::vector<PhaseState> samples_;
    std::vector<Event> events_;
    std::vector<EnergyReading> energy_;
    std::vector<DenseSeg> dense_;
};

// Integrates the non-autonomous system from the launch state until the
// first stopping event, the budget, or t_end_override when given (which
// may lie before the launch time for a backward run).  Watched events are
// bracketed on dense output probes and refined by bisection to a time
// tolerance of 1e-12.
Trajectory integrate(const ProblemParams& pp, const KProfile& profile,
                     PhaseState launch, const IntegratorConfig& cfg,
                     std::span<const EventSpec> watch = {},
                     std::optional<double> t_end_override = std::nullopt);

// segment width of L(a): x ranges over [0, a^{1/(p-1)} / alpha]
double segment_width(const ProblemParams& pp, double a);

// First crossing of y = -a with x inside the segment L(a).  Requires
// 0 < a < |E_y| of the frozen system at the profile's upper bound.
// Throws NotReachedError if the budget runs out first.
Event first_y_level_crossing(const ProblemParams& pp, const KProfile& profile,
                             PhaseState launch, double a, const IntegratorConfig& cfg);

} // namespace fowlerlab
