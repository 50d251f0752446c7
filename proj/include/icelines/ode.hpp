#pragma once

// Adaptive Dormand-Prince 5(4) integration with 4th-order dense output and
// bracketed event location. Generic over the state container: any copyable
// random-access container of double with size() (std::array, std::vector).

#include "icelines/errors.hpp"

#include <boost/math/tools/toms748_solve.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace icelines::ode {

struct IntegratorConfig {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double max_step = 0.5;    // years
    double event_tol = 1e-12; // bound on |event_fn| at a located event
    double max_time = 1e4;    // horizon for event searches, years
    std::int64_t max_steps = 10'000'000;

    bool operator==(const IntegratorConfig&) const = default;

    void validate() const {
        if (!(rel_tol > 0 && abs_tol > 0 && max_step > 0 && event_tol > 0 && max_time > 0 &&
              max_steps > 0)) {
            throw ConfigError("integrator settings must all be positive");
        }
    }
};

enum class Direction { Rising, Falling, Any };

/// Continuous extension of one accepted step, valid on [t0, t1].
template <class State>
struct DenseSegment {
    double t0 = 0.0;
    double t1 = 0.0;
    double h = 0.0;  // length of the underlying step (t1 may be truncated at an event)
    std::array<State, 5> coeffs{};
    int label = 0;

    [[nodiscard]] State operator()(double t) const {
        const double s = h > 0 ? (t - t0) / h : 0.0;
        const double s1 = 1.0 - s;
        State y = coeffs[0];
        for (std::size_t i = 0; i < y.size(); ++i) {
            y[i] = coeffs[0][i] +
                   s * (coeffs[1][i] + s1 * (coeffs[2][i] + s * (coeffs[3][i] + s1 * coeffs[4][i])));
        }
        return y;
    }
};

template <class State>
struct Event {
    double t = 0.0;
    State state{};
    int id = 0;
};

template <class State>
class Trajectory {
public:
    std::vector<double> times;
    std::vector<State> states;
    std::vector<DenseSegment<State>> segments;
    std::vector<Event<State>> events;

    [[nodiscard]] bool empty() const noexcept { return times.empty(); }
    [[nodiscard]] double t_begin() const { return times.front(); }
    [[nodiscard]] double t_end() const { return times.back(); }
    [[nodiscard]] double duration() const { return empty() ? 0.0 : t_end() - t_begin(); }

    /// Dense-output state at t in [t_begin, t_end].
    [[nodiscard]] State at(double t) const {
        if (empty() || t < t_begin() || t > t_end()) {
            throw DomainError("time outside the trajectory span");
        }
        if (segments.empty()) {
            return states.front();
        }
        auto it = std::lower_bound(segments.begin(), segments.end(), t,
                                   [](const DenseSegment<State>& seg, double x) { return seg.t1 < x; });
        if (it == segments.end()) {
            it = std::prev(segments.end());
        }
        if (t == it->t1) {
            // exact sample: return the stored state rather than the interpolant
            const auto idx = static_cast<std::size_t>(std::distance(segments.begin(), it)) + 1;
            return states[idx];
        }
        return (*it)(t);
    }

    [[nodiscard]] int label_at(double t) const {
        if (segments.empty()) {
            return 0;
        }
        auto it = std::lower_bound(segments.begin(), segments.end(), t,
                                   [](const DenseSegment<State>& seg, double x) { return seg.t1 < x; });
        return it == segments.end() ? segments.back().label : it->label;
    }

    void set_label(int label) {
        for (auto& seg : segments) {
            seg.label = label;
        }
    }

    /// Concatenate a trajectory that starts where this one ends.
    void append(const Trajectory& next) {
        if (next.empty()) {
            return;
        }
        if (empty()) {
            *this = next;
            return;
        }
        if (next.t_begin() != t_end()) {
            throw DomainError("appended trajectory is not time-continuous");
        }
        times.insert(times.end(), next.times.begin() + 1, next.times.end());
        states.insert(states.end(), next.states.begin() + 1, next.states.end());
        segments.insert(segments.end(), next.segments.begin(), next.segments.end());
        events.insert(events.end(), next.events.begin(), next.events.end());
    }
};

template <class State>
struct EventResult {
    bool found = false;
    double t = 0.0;
    State state{};
    Trajectory<State> trajectory;
};

namespace detail {

template <class State>
bool all_finite(const State& y) {
    return std::all_of(y.begin(), y.end(), [](double x) { return std::isfinite(x); });
}

struct AlwaysInside {
    template <class State>
    bool operator()(const State&) const noexcept {
        return true;
    }
};

inline bool crosses(double g_prev, double g_new, Direction dir) {
    const bool rising = g_prev < 0.0 && g_new >= 0.0;
    const bool falling = g_prev > 0.0 && g_new <= 0.0;
    switch (dir) {
        case Direction::Rising:
            return rising;
        case Direction::Falling:
            return falling;
        case Direction::Any:
            return rising || falling;
    }
    return false;
}

}  // namespace detail

/// Single-trajectory Dormand-Prince stepper. Forward time only.
template <class State, class Rhs>
class DormandPrince {
public:
    DormandPrince(Rhs rhs, State y0, double t0, const IntegratorConfig& cfg)
        : rhs_(std::move(rhs)), cfg_(cfg), t_(t0), y_(std::move(y0)) {
        cfg_.validate();
        if (!detail::all_finite(y_)) {
            throw DomainError("initial state is not finite");
        }
        k1_ = rhs_(t_, y_);
        h_ = initial_step();
    }

    [[nodiscard]] double t() const noexcept { return t_; }
    [[nodiscard]] const State& y() const noexcept { return y_; }

    /// Take one accepted step, never passing t_limit.
    DenseSegment<State> step(double t_limit) {
        static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
        static constexpr double a21 = 1.0 / 5;
        static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
        static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
        static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                                a54 = -212.0 / 729;
        static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                                a64 = 49.0 / 176, a65 = -5103.0 / 18656;
        static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                                a75 = -2187.0 / 6784, a76 = 11.0 / 84;
        static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                                e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
        static constexpr double d1 = -12715105075.0 / 11282082432.0,
                                d3 = 87487479700.0 / 32700410799.0,
                                d4 = -10690763975.0 / 1880347072.0,
                                d5 = 701980252875.0 / 199316789632.0,
                                d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

        const std::size_t n = y_.size();
        bool rejected = false;
        State tmp = y_;
        for (;;) {
            double h = std::min({h_, cfg_.max_step, t_limit - t_});
            const double h_min = 16.0 * std::numeric_limits<double>::epsilon() *
                                 std::max(1.0, std::abs(t_));
            if (!(h > h_min)) {
                if (t_limit - t_ <= h_min) {
                    h = t_limit - t_;  // final sliver up to the limit
                } else {
                    throw StiffnessError("step size underflow at t = " + std::to_string(t_));
                }
            }

            for (std::size_t i = 0; i < n; ++i) tmp[i] = y_[i] + h * a21 * k1_[i];
            const State k2 = rhs_(t_ + c2 * h, tmp);
            for (std::size_t i = 0; i < n; ++i) tmp[i] = y_[i] + h * (a31 * k1_[i] + a32 * k2[i]);
            const State k3 = rhs_(t_ + c3 * h, tmp);
            for (std::size_t i = 0; i < n; ++i)
                tmp[i] = y_[i] + h * (a41 * k1_[i] + a42 * k2[i] + a43 * k3[i]);
            const State k4 = rhs_(t_ + c4 * h, tmp);
            for (std::size_t i = 0; i < n; ++i)
                tmp[i] = y_[i] + h * (a51 * k1_[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
            const State k5 = rhs_(t_ + c5 * h, tmp);
            for (std::size_t i = 0; i < n; ++i)
                tmp[i] = y_[i] + h * (a61 * k1_[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] +
                                      a65 * k5[i]);
            const State k6 = rhs_(t_ + h, tmp);
            State y1 = y_;
            for (std::size_t i = 0; i < n; ++i)
                y1[i] = y_[i] + h * (a71 * k1_[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] +
                                     a76 * k6[i]);
            const State k7 = rhs_(t_ + h, y1);

            double err = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double e = h * (e1 * k1_[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                                      e6 * k6[i] + e7 * k7[i]);
                const double sc = cfg_.abs_tol + cfg_.rel_tol * std::max(std::abs(y_[i]), std::abs(y1[i]));
                err += (e / sc) * (e / sc);
            }
            err = std::sqrt(err / static_cast<double>(n));

            if (!std::isfinite(err) || !detail::all_finite(y1)) {
                h_ = 0.1 * h;
                rejected = true;
                continue;
            }
            if (err <= 1.0) {
                DenseSegment<State> seg;
                seg.t0 = t_;
                seg.t1 = h == t_limit - t_ ? t_limit : t_ + h;
                seg.h = h;
                seg.coeffs.fill(y_);
                for (std::size_t i = 0; i < n; ++i) {
                    const double ydiff = y1[i] - y_[i];
                    const double bspl = h * k1_[i] - ydiff;
                    seg.coeffs[1][i] = ydiff;
                    seg.coeffs[2][i] = bspl;
                    seg.coeffs[3][i] = ydiff - h * k7[i] - bspl;
                    seg.coeffs[4][i] = h * (d1 * k1_[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] +
                                            d6 * k6[i] + d7 * k7[i]);
                }
                const double fac_max = rejected ? 1.0 : 5.0;
                const double fac = err > 0.0 ? std::clamp(0.9 * std::pow(err, -0.2), 0.2, fac_max)
                                             : fac_max;
                h_ = h * fac;
                t_ = seg.t1;
                y_ = std::move(y1);
                k1_ = k7;
                return seg;
            }
            h_ = h * std::max(0.2, 0.9 * std::pow(err, -0.2));
            rejected = true;
        }
    }

private:
    double initial_step() {
        const std::size_t n = y_.size();
        double d0 = 0.0;
        double d1 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double sk = cfg_.abs_tol + cfg_.rel_tol * std::abs(y_[i]);
            d0 += (y_[i] / sk) * (y_[i] / sk);
            d1 += (k1_[i] / sk) * (k1_[i] / sk);
        }
        d0 = std::sqrt(d0 / static_cast<double>(n));
        d1 = std::sqrt(d1 / static_cast<double>(n));
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        h0 = std::min(h0, cfg_.max_step);
        State y1 = y_;
        for (std::size_t i = 0; i < n; ++i) y1[i] = y_[i] + h0 * k1_[i];
        const State f1 = rhs_(t_ + h0, y1);
        double d2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double sk = cfg_.abs_tol + cfg_.rel_tol * std::abs(y_[i]);
            d2 += ((f1[i] - k1_[i]) / sk) * ((f1[i] - k1_[i]) / sk);
        }
        d2 = std::sqrt(d2 / static_cast<double>(n)) / h0;
        const double dmax = std::max(d1, d2);
        const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 0.2);
        return std::min({100.0 * h0, h1, cfg_.max_step});
    }

    Rhs rhs_;
    IntegratorConfig cfg_;
    double t_;
    State y_;
    State k1_{};
    double h_ = 0.0;
};

/// Integrate from t0 to t1. `inside` is checked after every step; leaving it throws
/// BoundaryError.
template <class State, class Rhs, class Domain = detail::AlwaysInside>
Trajectory<State> integrate(Rhs rhs, const State& y0, double t0, double t1,
                            const IntegratorConfig& cfg, Domain inside = {}) {
    if (!(t1 > t0)) {
        throw DomainError("integration span must satisfy t1 > t0");
    }
    DormandPrince<State, Rhs> stepper(std::move(rhs), y0, t0, cfg);
    Trajectory<State> traj;
    traj.times.push_back(t0);
    traj.states.push_back(y0);
    std::int64_t steps = 0;
    while (stepper.t() < t1) {
        if (++steps > cfg.max_steps) {
            throw SolverError("step budget exhausted before reaching t1");
        }
        traj.segments.push_back(stepper.step(t1));
        traj.times.push_back(stepper.t());
        traj.states.push_back(stepper.y());
        if (!inside(stepper.y())) {
            throw BoundaryError("trajectory left the admissible state space at t = " +
                                    std::to_string(stepper.t()),
                                stepper.t());
        }
    }
    return traj;
}

/// Integrate from t0 until event_fn crosses zero in `direction` or t_stop is reached,
/// whichever comes first. A zero of event_fn at t0 itself is never reported.
/// On an event, found is set and (t, state) is the located crossing; otherwise
/// (t, state) is the end point at t_stop.
template <class State, class Rhs, class EventFn, class Domain = detail::AlwaysInside>
EventResult<State> integrate_until_event(Rhs rhs, EventFn event_fn, Direction direction,
                                         const State& y0, double t0, double t_stop,
                                         const IntegratorConfig& cfg, Domain inside = {}) {
    if (!(t_stop > t0)) {
        throw DomainError("integration span must satisfy t_stop > t0");
    }
    DormandPrince<State, Rhs> stepper(std::move(rhs), y0, t0, cfg);
    EventResult<State> result;
    auto& traj = result.trajectory;
    traj.times.push_back(t0);
    traj.states.push_back(y0);

    double g_prev = event_fn(y0);
    std::int64_t steps = 0;
    while (stepper.t() < t_stop) {
        if (++steps > cfg.max_steps) {
            throw SolverError("step budget exhausted during event search");
        }
        DenseSegment<State> seg = stepper.step(t_stop);
        const double g_new = event_fn(stepper.y());

        if (detail::crosses(g_prev, g_new, direction)) {
            double t_star = seg.t1;
            State y_star = stepper.y();
            double g_star = g_new;
            if (g_new != 0.0) {
                auto g = [&](double t) { return event_fn(seg(t)); };
                const double ga = g(seg.t0);
                std::uintmax_t max_iter = 200;
                const auto bracket = boost::math::tools::toms748_solve(
                    g, seg.t0, seg.t1, ga, g_new,
                    boost::math::tools::eps_tolerance<double>(std::numeric_limits<double>::digits),
                    max_iter);
                // keep whichever end of the final bracket has the smaller residual
                const double g_lo = g(bracket.first);
                const double g_hi = g(bracket.second);
                if (std::abs(g_lo) <= std::abs(g_hi) && bracket.first > seg.t0) {
                    t_star = bracket.first;
                    g_star = g_lo;
                } else {
                    t_star = bracket.second;
                    g_star = g_hi;
                }
                y_star = seg(t_star);
            }
            if (!(std::abs(g_star) < cfg.event_tol)) {
                throw SolverError("event located with residual " + std::to_string(g_star) +
                                  " above tolerance");
            }
            seg.t1 = t_star;
            traj.segments.push_back(seg);
            traj.times.push_back(t_star);
            traj.states.push_back(y_star);
            traj.events.push_back({t_star, y_star, 0});
            if (!inside(y_star)) {
                throw BoundaryError("event state lies outside the admissible state space", t_star);
            }
            result.found = true;
            result.t = t_star;
            result.state = y_star;
            return result;
        }

        traj.segments.push_back(seg);
        traj.times.push_back(stepper.t());
        traj.states.push_back(stepper.y());
        if (!inside(stepper.y())) {
            throw BoundaryError("trajectory left the admissible state space at t = " +
                                    std::to_string(stepper.t()),
                                stepper.t());
        }
        g_prev = g_new;
    }
    result.t = stepper.t();
    result.state = stepper.y();
    return result;
}

/// Integrate from t0 until event_fn crosses zero in `direction`; NoEventError if
/// nothing is found within cfg.max_time.
template <class State, class Rhs, class EventFn, class Domain = detail::AlwaysInside>
EventResult<State> integrate_to_event(Rhs rhs, EventFn event_fn, Direction direction,
                                      const State& y0, double t0, const IntegratorConfig& cfg,
                                      Domain inside = {}) {
    auto result = integrate_until_event(std::move(rhs), std::move(event_fn), direction, y0, t0,
                                        t0 + cfg.max_time, cfg, std::move(inside));
    if (!result.found) {
        throw NoEventError("no event before the horizon t = " + std::to_string(t0 + cfg.max_time));
    }
    return result;
}

}  // namespace icelines::ode
