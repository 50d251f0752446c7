#include "icelines/errors.hpp"
#include "icelines/model.hpp"
#include "icelines/ode.hpp"

#include <catch_amalgamated.hpp>

#include <numbers>

using namespace icelines;
using Catch::Matchers::WithinAbs;
using V1 = std::array<double, 1>;
using V2 = std::array<double, 2>;

namespace {

auto decay = [](double, const V1& y) { return V1{-y[0]}; };
// x'' = -x written as (x, x')
auto oscillator = [](double, const V2& y) { return V2{y[1], -y[0]}; };

}  // namespace

TEST_CASE("linear test equation") {
    const auto traj = ode::integrate(decay, V1{1.0}, 0.0, 1.0, ode::IntegratorConfig{});
    CHECK_THAT(traj.states.back()[0], WithinAbs(std::exp(-1.0), 1e-9));
    CHECK(traj.t_end() == 1.0);
    for (std::size_t i = 1; i < traj.times.size(); ++i) CHECK(traj.times[i] > traj.times[i - 1]);
}

TEST_CASE("works with dynamically sized states") {
    auto rhs = [](double, const std::vector<double>& y) { return std::vector<double>{-y[0], -2.0 * y[1]}; };
    const auto traj = ode::integrate(rhs, std::vector<double>{1.0, 1.0}, 0.0, 1.0, ode::IntegratorConfig{});
    CHECK_THAT(traj.states.back()[1], WithinAbs(std::exp(-2.0), 1e-9));
}

TEST_CASE("halving the step size shrinks the error at least fourfold") {
    // loose tolerances so that every step is capped by max_step
    ode::IntegratorConfig cfg;
    cfg.rel_tol = 1.0;
    cfg.abs_tol = 1.0;
    double previous = 0.0;
    for (double h : {0.2, 0.1, 0.05}) {
        cfg.max_step = h;
        const auto traj = ode::integrate(decay, V1{1.0}, 0.0, 2.0, cfg);
        const double err = std::abs(traj.states.back()[0] - std::exp(-2.0));
        if (previous > 0.0) CHECK(previous / err >= 4.0);
        previous = err;
    }
}

TEST_CASE("dense output is consistent with re-integration") {
    const ModelParams p = default_params();
    auto rhs = [&](double, const Vec3& y) { return rhs3(ClimateState3::from_array(y), -10.0, -10.0, p); };
    const ode::IntegratorConfig cfg;
    const auto traj = ode::integrate(rhs, Vec3{0.0, -0.5, 0.5}, 0.0, 30.0, cfg);
    ode::IntegratorConfig tight;
    tight.rel_tol = 1e-13;
    tight.abs_tol = 1e-15;
    for (std::size_t i = 0; i < traj.segments.size(); i += 7) {
        const auto& seg = traj.segments[i];
        const double mid = 0.5 * (seg.t0 + seg.t1);
        const auto ref = ode::integrate(rhs, traj.states[i], seg.t0, mid, tight).states.back();
        const auto dense = traj.at(mid);
        for (std::size_t k = 0; k < 3; ++k) {
            const double local = cfg.abs_tol + cfg.rel_tol * std::abs(ref[k]);
            CHECK(std::abs(dense[k] - ref[k]) <= 10.0 * local);
        }
    }
    // stored samples are returned exactly
    for (std::size_t i = 0; i < traj.times.size(); i += 5) CHECK(traj.at(traj.times[i]) == traj.states[i]);
    CHECK_THROWS_AS(traj.at(31.0), DomainError);
}

TEST_CASE("integration is deterministic") {
    const auto a = ode::integrate(oscillator, V2{1.0, 0.0}, 0.0, 10.0, ode::IntegratorConfig{});
    const auto b = ode::integrate(oscillator, V2{1.0, 0.0}, 0.0, 10.0, ode::IntegratorConfig{});
    CHECK(a.times == b.times);
    CHECK(a.states == b.states);
}

TEST_CASE("error conditions") {
    const ode::IntegratorConfig cfg;
    CHECK_THROWS_AS(ode::integrate(decay, V1{1.0}, 1.0, 1.0, cfg), DomainError);
    CHECK_THROWS_AS(ode::integrate(decay, V1{std::nan("")}, 0.0, 1.0, cfg), DomainError);

    auto drift = [](double, const V1&) { return V1{1.0}; };
    auto below_one = [](const V1& y) { return y[0] < 1.0; };
    try {
        (void)ode::integrate(drift, V1{0.0}, 0.0, 5.0, cfg, below_one);
        FAIL("expected a boundary error");
    } catch (const BoundaryError& e) {
        CHECK(e.time() >= 1.0);
        CHECK(e.time() <= 1.0 + cfg.max_step);
    }

    auto blowup = [](double t, const V1&) { return V1{t > 0.3 ? std::nan("") : 1.0}; };
    CHECK_THROWS_AS(ode::integrate(blowup, V1{0.0}, 0.0, 1.0, cfg), StiffnessError);

    ode::IntegratorConfig bad;
    bad.rel_tol = 0.0;
    CHECK_THROWS_AS(ode::integrate(decay, V1{1.0}, 0.0, 1.0, bad), ConfigError);
}

TEST_CASE("event location on a linear crossing") {
    auto drift = [](double, const V2&) { return V2{1.0, 0.0}; };
    auto g = [](const V2& y) { return y[0] - 0.5; };
    const ode::IntegratorConfig cfg;
    const auto ev = ode::integrate_to_event(drift, g, ode::Direction::Rising, V2{0.0, 0.0}, 0.0, cfg);
    CHECK(ev.found);
    CHECK_THAT(ev.t, WithinAbs(0.5, 1e-10));
    CHECK(std::abs(g(ev.state)) < cfg.event_tol);
    CHECK(ev.trajectory.t_end() == ev.t);
    REQUIRE(ev.trajectory.events.size() == 1);
    CHECK(ev.trajectory.events[0].t == ev.t);
}

TEST_CASE("direction filter") {
    const ode::IntegratorConfig cfg;
    auto x = [](const V2& y) { return y[0]; };
    // x = sin t starts on the event surface moving upward; first downward zero is pi
    const auto falling = ode::integrate_to_event(oscillator, x, ode::Direction::Falling, V2{0.0, 1.0}, 0.0, cfg);
    CHECK_THAT(falling.t, WithinAbs(std::numbers::pi, 1e-9));
    // x = cos t: skip the downward zero at pi/2
    const auto rising = ode::integrate_to_event(oscillator, x, ode::Direction::Rising, V2{1.0, 0.0}, 0.0, cfg);
    CHECK_THAT(rising.t, WithinAbs(1.5 * std::numbers::pi, 1e-9));
    const auto any = ode::integrate_to_event(oscillator, x, ode::Direction::Any, V2{1.0, 0.0}, 0.0, cfg);
    CHECK_THAT(any.t, WithinAbs(0.5 * std::numbers::pi, 1e-9));
    for (const auto* ev : {&falling, &rising, &any}) CHECK(std::abs(ev->state[0]) < cfg.event_tol);
}

TEST_CASE("missing event and bounded search") {
    ode::IntegratorConfig cfg;
    cfg.max_time = 5.0;
    auto g = [](const V1& y) { return y[0] - 2.0; };
    CHECK_THROWS_AS(ode::integrate_to_event(decay, g, ode::Direction::Any, V1{1.0}, 0.0, cfg), NoEventError);
    const auto partial = ode::integrate_until_event(decay, g, ode::Direction::Any, V1{1.0}, 0.0, 3.0, cfg);
    CHECK_FALSE(partial.found);
    CHECK(partial.t == 3.0);
    CHECK_THAT(partial.state[0], WithinAbs(std::exp(-3.0), 1e-9));
}

TEST_CASE("retreat field relaxes toward the warm equilibrium") {
    const ModelParams p = default_params();
    auto rhs = [&](double, const Vec4& y) { return rhs4(Branch::Retreat, ClimateState4::from_array(y), p); };
    const auto traj = ode::integrate(rhs, Vec4{0.0, -0.8, 0.8, 0.5}, 0.0, 80.0, ode::IntegratorConfig{});
    CHECK_THAT(traj.states.back()[0], WithinAbs(5.188, 5e-3));
    CHECK_THAT(traj.states.back()[2], WithinAbs(0.955, 5e-3));
}

TEST_CASE("trajectory append and labels") {
    const ode::IntegratorConfig cfg;
    auto a = ode::integrate(decay, V1{1.0}, 0.0, 1.0, cfg);
    auto b = ode::integrate(decay, a.states.back(), 1.0, 2.0, cfg);
    a.set_label(0);
    b.set_label(1);
    const std::size_t n = a.times.size() + b.times.size() - 1;
    a.append(b);
    CHECK(a.times.size() == n);
    CHECK(a.label_at(0.5) == 0);
    CHECK(a.label_at(1.5) == 1);
    CHECK_THAT(a.at(1.7)[0], WithinAbs(std::exp(-1.7), 1e-9));
    auto gap = ode::integrate(decay, V1{1.0}, 3.0, 4.0, cfg);
    CHECK_THROWS_AS(a.append(gap), DomainError);
}
