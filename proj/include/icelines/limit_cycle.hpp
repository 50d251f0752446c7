#pragma once

#include "icelines/model.hpp"
#include "icelines/ode.hpp"
#include "icelines/switching.hpp"

#include <optional>
#include <vector>

namespace icelines {

using Trajectory4 = ode::Trajectory<Vec4>;

/// Stable equilibria of the retreat and advance reduced fields placed on the switching
/// surface. The advance map is started from `plus`.
struct AnchorPoints {
    ClimateState4 plus;
    ClimateState4 minus;
};

/// Throws SolverError if either reduced field lacks an interior stable equilibrium.
[[nodiscard]] AnchorPoints anchor_points(const ModelParams& params);

/// Flow of the branch field through its region until it returns to the surface.
struct HalfMapResult {
    ClimateState4 exit;
    double duration = 0.0;
    SigmaClass exit_class;
    Trajectory4 trajectory;  // segment labels hold static_cast<int>(branch)
};

/// Advance starts in the crossing-plus region and must exit through crossing-minus;
/// Retreat the other way round. Throws DomainError for a start outside the required
/// region, NoEventError if the flow never returns, SolverError for a sliding exit.
[[nodiscard]] HalfMapResult half_map(Branch branch, const ClimateState4& start, const ModelParams& params,
                                     const ode::IntegratorConfig& cfg = {}, double t0 = 0.0);

struct ReturnMapResult {
    ClimateState4 image;
    HalfMapResult advance;
    HalfMapResult retreat;
};

/// Advance half-map followed by the retreat half-map. Time is continuous across both.
[[nodiscard]] ReturnMapResult return_map(const ClimateState4& start, const ModelParams& params,
                                         const ode::IntegratorConfig& cfg = {});

struct CycleMetrics {
    double amplitude_etaN = 0.0;  // peak-to-peak
    double amplitude_etaS = 0.0;
    double amplitude_xiN = 0.0;
    double advance_fraction = 0.0;
    double sync_lag = 0.0;  // fraction of the period, in [0, 0.5]
};

/// Uniformly resampled metrics of one period. Segments labelled Advance count toward
/// the advance fraction. A trajectory of zero length yields all zeros.
[[nodiscard]] CycleMetrics cycle_metrics(const Trajectory4& orbit, int samples = 4000);

struct CycleOptions {
    double tol = 1e-10;
    int max_iter = 200;
    int samples = 4000;
    double contraction_delta = 1e-4;
    bool estimate_contraction = true;
    ode::IntegratorConfig integrator{};

    bool operator==(const CycleOptions&) const = default;
};

struct LimitCycle {
    ClimateState4 fixed_point;
    ClimateState4 crossing_minus_point;
    Trajectory4 advance_segment;
    Trajectory4 retreat_segment;
    double advance_duration = 0.0;
    double retreat_duration = 0.0;
    double period = 0.0;
    int iterations = 0;
    std::vector<double> step_norms;  // |v_{k+1} - v_k| per Picard step
    double closure_error = 0.0;      // |r(v*) - v*|
    std::optional<double> contraction;
    bool separation = true;  // tangency curves ordered on the whole eta_N range
    CycleMetrics metrics;

    [[nodiscard]] Trajectory4 orbit() const;
};

struct HypothesisCheck {
    bool plus_in_crossing_region = false;
    bool minus_in_crossing_region = false;
    bool advance_returns = false;  // advance flow from the plus anchor reaches the surface
    bool retreat_returns = false;  // retreat flow from the minus anchor reaches the surface
    [[nodiscard]] bool ok() const noexcept {
        return plus_in_crossing_region && minus_in_crossing_region && advance_returns && retreat_returns;
    }
};

/// Trial integrations from both anchors.
[[nodiscard]] HypothesisCheck check_hypotheses(const ModelParams& params,
                                               const ode::IntegratorConfig& cfg = {});

/// Picard iteration of the return map. Starts from the plus anchor unless `init`
/// is given. Throws ConvergenceError after max_iter steps.
[[nodiscard]] LimitCycle find_limit_cycle(const ModelParams& params, const CycleOptions& opts = {},
                                          std::optional<ClimateState4> init = std::nullopt);

/// Largest finite-difference stretch of the return map over the three surface-tangent
/// directions (w, eta_S, eta_N with xi_N slaved). Halves delta when a perturbed point
/// leaves the crossing-plus region; throws SolverError after repeated failures.
[[nodiscard]] double contraction_estimate(const ClimateState4& fixed_point, const ModelParams& params,
                                          double delta = 1e-4, const ode::IntegratorConfig& cfg = {});

}  // namespace icelines
