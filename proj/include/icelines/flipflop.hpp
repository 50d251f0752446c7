#pragma once

#include "icelines/limit_cycle.hpp"

#include <vector>

namespace icelines {

struct SwitchEvent {
    double t = 0.0;
    ClimateState4 state;
    SigmaClass sigma;
    Branch from = Branch::Advance;
    Branch to = Branch::Retreat;
};

struct FlipFlopRun {
    Trajectory4 trajectory;  // segment labels hold static_cast<int>(branch)
    std::vector<SwitchEvent> events;
};

/// Integrate the switched system from `start` over [0, t_end], changing branch at every
/// crossing of the switching surface. Reaching the sliding or tangency set throws
/// SolverError; leaving the interior throws BoundaryError.
[[nodiscard]] FlipFlopRun simulate_flipflop(const ClimateState4& start, double t_end, const ModelParams& params,
                                            const ode::IntegratorConfig& cfg = {});

}  // namespace icelines
