#include "icelines/flipflop.hpp"

#include "icelines/errors.hpp"

#include <string>

namespace icelines {

FlipFlopRun simulate_flipflop(const ClimateState4& start, double t_end, const ModelParams& p,
                              const ode::IntegratorConfig& cfg) {
    if (!(t_end > 0.0)) {
        throw DomainError("flip-flop horizon must be positive");
    }
    if (!in_interior(start)) {
        throw DomainError("initial state is outside the interior of the state space");
    }
    auto h = [&p](const Vec4& y) { return mass_balance(ClimateState4::from_array(y), p); };
    auto inside = [](const Vec4& y) { return in_interior(ClimateState4::from_array(y)); };

    FlipFlopRun run;
    Branch branch = region_branch(start, p, cfg.event_tol);
    Vec4 y = start.to_array();
    double t = 0.0;
    while (t < t_end) {
        auto rhs = [&p, branch](double, const Vec4& s) { return rhs4(branch, ClimateState4::from_array(s), p); };
        const auto dir = branch == Branch::Advance ? ode::Direction::Rising : ode::Direction::Falling;
        auto piece = ode::integrate_until_event(rhs, h, dir, y, t, t_end, cfg, inside);
        piece.trajectory.set_label(static_cast<int>(branch));
        piece.trajectory.events.clear();
        run.trajectory.append(piece.trajectory);
        t = piece.t;
        y = piece.state;
        if (!piece.found) break;

        SwitchEvent ev;
        ev.t = piece.t;
        ev.state = ClimateState4::from_array(piece.state);
        ev.sigma = classify_sigma_point(ev.state, p, cfg.event_tol);
        const SigmaLabel expected =
            branch == Branch::Advance ? SigmaLabel::CrossingMinus : SigmaLabel::CrossingPlus;
        if (ev.sigma.label != expected) {
            throw SolverError("trajectory reached " + std::string(to_string(ev.sigma.label)) +
                              " at t = " + std::to_string(ev.t));
        }
        ev.from = branch;
        ev.to = opposite(branch);
        run.events.push_back(ev);
        run.trajectory.events.push_back({ev.t, piece.state, static_cast<int>(ev.to)});
        branch = ev.to;
    }
    return run;
}

}  // namespace icelines
