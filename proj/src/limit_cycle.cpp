#include "icelines/limit_cycle.hpp"

#include "icelines/equilibria.hpp"
#include "icelines/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace icelines {

namespace {

ClimateState4 stable_anchor(Branch branch, const ModelParams& p) {
    const auto eqs = find_equilibria3(p.T_cS, critical_temperature_north(branch, p), p);
    const EquilibriumReport* best = nullptr;
    for (const auto& eq : eqs) {
        if (eq.stability != Stability::StableNode) continue;
        if (best == nullptr || eq.point[0] > best->point[0]) best = &eq;
    }
    if (best == nullptr) {
        throw SolverError("the " + std::string(to_string(branch)) +
                          " reduced field has no interior stable equilibrium");
    }
    return lift_to_sigma(best->state3(), p);
}

}  // namespace

AnchorPoints anchor_points(const ModelParams& p) {
    return {stable_anchor(Branch::Retreat, p), stable_anchor(Branch::Advance, p)};
}

HalfMapResult half_map(Branch branch, const ClimateState4& start, const ModelParams& p,
                       const ode::IntegratorConfig& cfg, double t0) {
    const bool advance = branch == Branch::Advance;
    const SigmaLabel required = advance ? SigmaLabel::CrossingPlus : SigmaLabel::CrossingMinus;
    const SigmaLabel target = advance ? SigmaLabel::CrossingMinus : SigmaLabel::CrossingPlus;

    const SigmaClass start_class = classify_sigma_point(start, p, cfg.event_tol);
    if (start_class.label != required) {
        throw DomainError("the " + std::string(to_string(branch)) + " half-map must start in " +
                          std::string(to_string(required)) + ", got " +
                          std::string(to_string(start_class.label)));
    }

    auto rhs = [&p, branch](double, const Vec4& y) { return rhs4(branch, ClimateState4::from_array(y), p); };
    auto h = [&p](const Vec4& y) { return mass_balance(ClimateState4::from_array(y), p); };
    auto inside = [](const Vec4& y) { return in_interior(ClimateState4::from_array(y)); };
    const auto dir = advance ? ode::Direction::Rising : ode::Direction::Falling;

    ode::EventResult<Vec4> ev;
    try {
        ev = ode::integrate_to_event(rhs, h, dir, start.to_array(), t0, cfg, inside);
    } catch (const NoEventError& e) {
        throw NoEventError(std::string("no crossing; check that the anchors lie in the stable sets "
                                       "of the branch fields (") +
                           e.what() + ")");
    }

    HalfMapResult out;
    out.exit = ClimateState4::from_array(ev.state);
    out.duration = ev.t - t0;
    out.exit_class = classify_sigma_point(out.exit, p, cfg.event_tol);
    if (out.exit_class.label != target) {
        throw SolverError("the " + std::string(to_string(branch)) + " flow returned through " +
                          std::string(to_string(out.exit_class.label)) + " instead of " +
                          std::string(to_string(target)));
    }
    out.trajectory = std::move(ev.trajectory);
    out.trajectory.set_label(static_cast<int>(branch));
    return out;
}

ReturnMapResult return_map(const ClimateState4& start, const ModelParams& p, const ode::IntegratorConfig& cfg) {
    ReturnMapResult r;
    r.advance = half_map(Branch::Advance, start, p, cfg, 0.0);
    r.retreat = half_map(Branch::Retreat, r.advance.exit, p, cfg, r.advance.trajectory.t_end());
    r.image = r.retreat.exit;
    return r;
}

Trajectory4 LimitCycle::orbit() const {
    Trajectory4 full = advance_segment;
    full.append(retreat_segment);
    return full;
}

CycleMetrics cycle_metrics(const Trajectory4& orbit, int samples) {
    CycleMetrics m;
    if (orbit.empty() || !(orbit.duration() > 0.0)) {
        return m;
    }
    const auto n = static_cast<std::size_t>(std::max(samples, 2000));
    const double period = orbit.duration();
    std::vector<double> eta_N(n), eta_S(n), xi_N(n);
    for (std::size_t k = 0; k < n; ++k) {
        const Vec4 y = orbit.at(orbit.t_begin() + period * static_cast<double>(k) / static_cast<double>(n));
        eta_S[k] = y[1];
        eta_N[k] = y[2];
        xi_N[k] = y[3];
    }
    const auto ptp = [](const std::vector<double>& v) {
        const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
        return *hi - *lo;
    };
    m.amplitude_etaN = ptp(eta_N);
    m.amplitude_etaS = ptp(eta_S);
    m.amplitude_xiN = ptp(xi_N);

    double advance_time = 0.0;
    for (const auto& seg : orbit.segments) {
        if (seg.label == static_cast<int>(Branch::Advance)) advance_time += seg.t1 - seg.t0;
    }
    m.advance_fraction = advance_time / period;

    // circular cross-correlation of eta_N against -eta_S
    const double mean_N = std::accumulate(eta_N.begin(), eta_N.end(), 0.0) / static_cast<double>(n);
    const double mean_S = std::accumulate(eta_S.begin(), eta_S.end(), 0.0) / static_cast<double>(n);
    std::vector<double> x(n), y(n);
    for (std::size_t k = 0; k < n; ++k) {
        x[k] = eta_N[k] - mean_N;
        y[k] = -(eta_S[k] - mean_S);
    }
    std::size_t best_shift = 0;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t shift = 0; shift < n; ++shift) {
        double c = 0.0;
        for (std::size_t j = 0; j < n; ++j) c += x[j] * y[(j + shift) % n];
        if (c > best) {
            best = c;
            best_shift = shift;
        }
    }
    m.sync_lag = static_cast<double>(std::min(best_shift, n - best_shift)) / static_cast<double>(n);
    return m;
}

HypothesisCheck check_hypotheses(const ModelParams& p, const ode::IntegratorConfig& cfg) {
    HypothesisCheck hc;
    const AnchorPoints anchors = anchor_points(p);
    hc.plus_in_crossing_region =
        classify_sigma_point(anchors.plus, p, cfg.event_tol).label == SigmaLabel::CrossingPlus;
    hc.minus_in_crossing_region =
        classify_sigma_point(anchors.minus, p, cfg.event_tol).label == SigmaLabel::CrossingMinus;
    if (hc.plus_in_crossing_region) {
        try {
            (void)half_map(Branch::Advance, anchors.plus, p, cfg);
            hc.advance_returns = true;
        } catch (const std::exception&) {
        }
    }
    if (hc.minus_in_crossing_region) {
        try {
            (void)half_map(Branch::Retreat, anchors.minus, p, cfg);
            hc.retreat_returns = true;
        } catch (const std::exception&) {
        }
    }
    return hc;
}

LimitCycle find_limit_cycle(const ModelParams& p, const CycleOptions& opts, std::optional<ClimateState4> init) {
    if (!(opts.tol > 0.0) || opts.max_iter < 1) {
        throw ConfigError("cycle search needs tol > 0 and max_iter >= 1");
    }
    const auto& cfg = opts.integrator;
    const HypothesisCheck hc = check_hypotheses(p, cfg);
    if (!hc.ok()) {
        std::string why;
        if (!hc.plus_in_crossing_region) why += " plus anchor outside crossing_plus;";
        if (!hc.minus_in_crossing_region) why += " minus anchor outside crossing_minus;";
        if (!hc.advance_returns) why += " advance flow from the plus anchor does not return;";
        if (!hc.retreat_returns) why += " retreat flow from the minus anchor does not return;";
        throw SolverError("cycle hypotheses fail:" + why);
    }

    LimitCycle cycle;
    ClimateState4 v = init.value_or(anchor_points(p).plus);
    bool converged = false;
    for (int k = 1; k <= opts.max_iter; ++k) {
        const ClimateState4 next = return_map(v, p, cfg).image;
        const double step = distance(next, v);
        cycle.step_norms.push_back(step);
        v = next;
        if (step < opts.tol) {
            cycle.iterations = k;
            converged = true;
            break;
        }
    }
    if (!converged) {
        throw ConvergenceError("return-map iteration did not converge in " + std::to_string(opts.max_iter) +
                               " steps (last step " + std::to_string(cycle.step_norms.back()) + ")");
    }

    ReturnMapResult last = return_map(v, p, cfg);
    cycle.fixed_point = v;
    cycle.closure_error = distance(last.image, v);
    cycle.crossing_minus_point = last.advance.exit;
    cycle.advance_duration = last.advance.duration;
    cycle.retreat_duration = last.retreat.duration;
    cycle.period = cycle.advance_duration + cycle.retreat_duration;
    cycle.advance_segment = std::move(last.advance.trajectory);
    cycle.retreat_segment = std::move(last.retreat.trajectory);
    cycle.separation = separation_holds(p);
    cycle.metrics = cycle_metrics(cycle.orbit(), opts.samples);
    if (opts.estimate_contraction) {
        cycle.contraction = contraction_estimate(v, p, opts.contraction_delta, cfg);
    }
    return cycle;
}

double contraction_estimate(const ClimateState4& v, const ModelParams& p, double delta,
                            const ode::IntegratorConfig& cfg) {
    if (!(delta > 0.0)) {
        throw DomainError("contraction delta must be positive");
    }
    const ClimateState4 base = return_map(v, p, cfg).image;
    double worst = 0.0;
    for (int dir = 0; dir < 3; ++dir) {
        bool done = false;
        for (double d = delta; !done && d > delta * 1e-3; d *= 0.5) {
            Vec3 s = v.reduced().to_array();
            s[static_cast<std::size_t>(dir)] += d;
            const ClimateState3 s3 = ClimateState3::from_array(s);
            if (!in_interior(s3)) continue;
            const ClimateState4 moved = lift_to_sigma(s3, p);
            if (!in_interior(moved) ||
                classify_sigma_point(moved, p, cfg.event_tol).label != SigmaLabel::CrossingPlus) {
                continue;
            }
            ClimateState4 image;
            try {
                image = return_map(moved, p, cfg).image;
            } catch (const SolverError&) {
                continue;
            } catch (const DomainError&) {
                continue;
            }
            worst = std::max(worst, distance(image, base) / distance(moved, v));
            done = true;
        }
        if (!done) {
            throw SolverError("contraction estimate failed: perturbations along coordinate " +
                              std::to_string(dir) + " leave the crossing region");
        }
    }
    return worst;
}

}  // namespace icelines
