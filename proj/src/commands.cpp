#include "icelines/commands.hpp"

#include "icelines/equilibria.hpp"
#include "icelines/errors.hpp"
#include "icelines/flipflop.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <thread>

namespace icelines {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json state_json(const ClimateState4& s) {
    return {{"w", s.w}, {"eta_S", s.eta_S}, {"eta_N", s.eta_N}, {"xi_N", s.xi_N}};
}

json sigma_json(const SigmaClass& c) {
    return {{"label", to_string(c.label)}, {"margin_plus", c.margin_plus}, {"margin_minus", c.margin_minus}};
}

json equilibrium_json(const EquilibriumReport& eq, const ModelParams& p) {
    json j;
    j["point"] = {{"w", eq.point[0]}, {"eta_S", eq.point[1]}, {"eta_N", eq.point[2]}};
    if (eq.point.size() == 4) {
        j["point"]["xi_N"] = eq.point[3];
        j["mass_balance"] = mass_balance(eq.state4(), p);
    }
    json ev = json::array();
    for (const auto& z : eq.eigenvalues) ev.push_back({{"re", z.real()}, {"im", z.imag()}});
    j["eigenvalues"] = ev;
    j["jacobian"] = eq.jacobian;
    j["stability"] = to_string(eq.stability);
    j["filippov_class"] = to_string(eq.filippov_class);
    j["branch"] = eq.branch ? json(to_string(*eq.branch)) : json(nullptr);
    j["residual"] = eq.residual;
    return j;
}

void write_text(const fs::path& file, const std::string& text) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + file.string() + "'");
    out << text;
    if (!out) throw ConfigError("write failed for '" + file.string() + "'");
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory '" + dir.string() + "': " + ec.message());
}

std::string csv_row(double t, const Vec4& y, std::string_view branch) {
    std::string row = format_double(t);
    for (double x : y) row += "," + format_double(x);
    row += ",";
    row += branch;
    row += "\n";
    return row;
}

std::string branch_name(int label) { return std::string(to_string(static_cast<Branch>(label))); }

std::vector<double> sample_times(double t0, double t1, double dt) {
    std::vector<double> ts;
    for (long k = 0;; ++k) {
        const double t = t0 + static_cast<double>(k) * dt;
        if (t > t1) break;
        ts.push_back(t);
    }
    if (ts.back() < t1) ts.push_back(t1);
    return ts;
}

// `count` evenly spaced samples of a segment, both ends included.
std::string segment_csv(const Trajectory4& seg, int count) {
    std::string text = std::string(trajectory_csv_header) + "\n";
    const int n = std::max(count, 2);
    for (int k = 0; k < n; ++k) {
        const double t = k + 1 == n ? seg.t_end() : seg.t_begin() + seg.duration() * k / (n - 1);
        text += csv_row(t, seg.at(t), branch_name(seg.label_at(t)));
    }
    return text;
}

std::string csv_field(double x) { return std::isfinite(x) ? format_double(x) : "nan"; }

std::string csv_quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out.push_back(c == '\n' ? ' ' : c);
    }
    return out + "\"";
}

}  // namespace

json equilibria_report(const ScenarioConfig& config) {
    const ModelParams& p = config.params;
    json j;
    j["T_cS"] = p.T_cS;
    j["T_cN"] = config.reduced_T_cN;
    j["insolation"] = {{"beta", p.insolation.beta}, {"M", p.insolation.M}, {"s_coeffs", p.insolation.s_coeffs}};
    json list = json::array();
    for (const auto& eq : find_equilibria3(p.T_cS, config.reduced_T_cN, p)) list.push_back(equilibrium_json(eq, p));
    j["equilibria"] = list;
    json lifted;
    for (Branch b : {Branch::Retreat, Branch::Advance}) {
        json arr = json::array();
        for (const auto& eq : branch_equilibria(b, p)) arr.push_back(equilibrium_json(eq, p));
        lifted[std::string(to_string(b))] = {{"T_cN", critical_temperature_north(b, p)},
                                             {"ablation", ablation_rate(b, p)},
                                             {"equilibria", arr}};
    }
    j["lifted"] = lifted;
    return j;
}

json cycle_report(const LimitCycle& cycle, const ModelParams& p, double on_sigma_tol) {
    json j;
    j["self_derived"] = true;
    j["note"] = "cycle quantities are computed by this tool and have no external reference values";
    j["eps"] = p.eps;
    j["T_cN_plus"] = p.T_cN_plus;
    j["T_cN_minus"] = p.T_cN_minus;
    j["epsilon_bound"] = epsilon_bound(p);
    j["separation_regime"] = cycle.separation;
    j["regime_tag"] = cycle.separation ? "within separation regime" : "outside separation regime";
    j["iterations"] = cycle.iterations;
    j["step_norms"] = cycle.step_norms;
    j["closure_error"] = cycle.closure_error;
    j["fixed_point"] = state_json(cycle.fixed_point);
    j["fixed_point_class"] = sigma_json(classify_sigma_point(cycle.fixed_point, p, on_sigma_tol));
    j["crossing_minus_point"] = state_json(cycle.crossing_minus_point);
    j["crossing_minus_class"] = sigma_json(classify_sigma_point(cycle.crossing_minus_point, p, on_sigma_tol));
    j["advance_duration"] = cycle.advance_duration;
    j["retreat_duration"] = cycle.retreat_duration;
    j["period"] = cycle.period;
    j["contraction"] = cycle.contraction ? json(*cycle.contraction) : json(nullptr);
    const auto& m = cycle.metrics;
    j["metrics"] = {{"amplitude_etaN", m.amplitude_etaN}, {"amplitude_etaS", m.amplitude_etaS},
                    {"amplitude_xiN", m.amplitude_xiN},   {"advance_fraction", m.advance_fraction},
                    {"sync_lag", m.sync_lag}};
    const AnchorPoints anchors = anchor_points(p);
    j["anchors"] = {{"plus", state_json(anchors.plus)}, {"minus", state_json(anchors.minus)}};
    return j;
}

json classify_report(const ScenarioConfig& config) {
    const ModelParams& p = config.params;
    const auto& c = config.classify;
    if (!(c.eta_S <= c.eta_N)) throw ConfigError("classify point needs eta_S <= eta_N");
    const ClimateState4 v = lift_to_sigma({c.w, c.eta_S, c.eta_N}, p);
    json j = sigma_json(classify_sigma_point(v, p));
    j["point"] = state_json(v);
    j["mass_balance"] = mass_balance(v, p);
    j["h_plus"] = tangency_w(Branch::Retreat, v.eta_N, p);
    j["h_minus"] = tangency_w(Branch::Advance, v.eta_N, p);
    j["normal_flux_retreat"] = normal_flux(Branch::Retreat, v, p);
    j["normal_flux_advance"] = normal_flux(Branch::Advance, v, p);
    j["epsilon_bound"] = epsilon_bound(p);
    j["separation_regime"] = separation_holds(p);
    return j;
}

SweepRow sweep_point(const ScenarioConfig& config, double eps, double T_cN_minus) {
    SweepRow row;
    row.eps = eps;
    row.T_cN_minus = T_cN_minus;
    try {
        ModelParams p = config.params;
        p.eps = eps;
        p.T_cN_minus = T_cN_minus;
        p.validate();
        row.separation = separation_holds(p);
        const LimitCycle cycle = find_limit_cycle(p, config.cycle_options());
        row.found = true;
        row.iterations = cycle.iterations;
        row.period = cycle.period;
        row.metrics = cycle.metrics;
        row.contraction = cycle.contraction;
    } catch (const std::exception& e) {
        row.error = e.what();
    }
    return row;
}

std::string sweep_csv_line(const SweepRow& r) {
    const double nan = std::nan("");
    const auto val = [&](double x) { return csv_field(r.found ? x : nan); };
    std::string line = format_double(r.eps) + "," + format_double(r.T_cN_minus) + "," +
                       (r.found ? "true" : "false") + "," + std::to_string(r.iterations) + "," + val(r.period) +
                       "," + val(r.metrics.advance_fraction) + "," + val(r.metrics.amplitude_etaN) + "," +
                       val(r.metrics.amplitude_etaS) + "," + val(r.metrics.amplitude_xiN) + "," +
                       val(r.metrics.sync_lag) + "," + csv_field(r.contraction.value_or(nan)) + "," +
                       (r.separation ? "true" : "false") + "," + csv_quote(r.error);
    return line + "\n";
}

std::vector<fs::path> run_equilibria(const ScenarioConfig& config, const fs::path& out) {
    ensure_dir(out);
    const json report = equilibria_report(config);
    const fs::path file = out / "equilibria.json";
    write_text(file, report.dump(2) + "\n");
    if (report["equilibria"].empty()) {
        throw SolverError("no interior equilibrium found for T_cN = " + format_double(config.reduced_T_cN));
    }
    return {file};
}

std::vector<fs::path> run_simulate(const ScenarioConfig& config, const fs::path& out) {
    ensure_dir(out);
    const ModelParams& p = config.params;
    const auto& opt = config.simulate;
    std::string csv = std::string(trajectory_csv_header) + "\n";
    json events = json::array();

    if (opt.mode == "reduced") {
        const ClimateState3 s0{opt.w0, opt.eta_S0, opt.eta_N0};
        const double T_cN = config.reduced_T_cN;
        auto rhs = [&](double, const Vec3& y) { return rhs3(ClimateState3::from_array(y), p.T_cS, T_cN, p); };
        auto inside = [](const Vec3& y) { return in_interior(ClimateState3::from_array(y)); };
        const auto traj = ode::integrate(rhs, s0.to_array(), 0.0, opt.t_end, config.integrator, inside);
        const auto times = opt.output_dt > 0 ? sample_times(0.0, opt.t_end, opt.output_dt) : traj.times;
        for (double t : times) {
            const Vec3 y = traj.at(t);
            csv += format_double(t) + "," + format_double(y[0]) + "," + format_double(y[1]) + "," +
                   format_double(y[2]) + ",nan,none\n";
        }
    } else {
        const ClimateState4 s0{opt.w0, opt.eta_S0, opt.eta_N0, opt.xi_N0};
        const FlipFlopRun run = simulate_flipflop(s0, opt.t_end, p, config.integrator);
        const auto& traj = run.trajectory;
        const auto times = opt.output_dt > 0 ? sample_times(0.0, traj.t_end(), opt.output_dt) : traj.times;
        for (double t : times) csv += csv_row(t, traj.at(t), branch_name(traj.label_at(t)));
        for (const auto& ev : run.events) {
            events.push_back({{"t", ev.t},
                              {"label", to_string(ev.sigma.label)},
                              {"w", ev.state.w},
                              {"eta_S", ev.state.eta_S},
                              {"eta_N", ev.state.eta_N},
                              {"xi_N", ev.state.xi_N},
                              {"margin_plus", ev.sigma.margin_plus},
                              {"margin_minus", ev.sigma.margin_minus}});
        }
    }
    const fs::path csv_file = out / "trajectory.csv";
    const fs::path events_file = out / "events.json";
    write_text(csv_file, csv);
    write_text(events_file, events.dump(2) + "\n");
    return {csv_file, events_file};
}

std::vector<fs::path> run_cycle(const ScenarioConfig& config, const fs::path& out) {
    ensure_dir(out);
    const ModelParams& p = config.params;
    const CycleOptions opts = config.cycle_options();
    const LimitCycle cycle = find_limit_cycle(p, opts);
    const fs::path summary = out / "cycle.json";
    const fs::path adv = out / "advance.csv";
    const fs::path ret = out / "retreat.csv";
    write_text(summary, cycle_report(cycle, p, opts.integrator.event_tol).dump(2) + "\n");
    const auto share = [&](double d) { return static_cast<int>(std::lround(opts.samples * d / cycle.period)) + 1; };
    write_text(adv, segment_csv(cycle.advance_segment, share(cycle.advance_duration)));
    write_text(ret, segment_csv(cycle.retreat_segment, share(cycle.retreat_duration)));
    return {summary, adv, ret};
}

std::vector<fs::path> run_sweep(const ScenarioConfig& config, const fs::path& out, int jobs) {
    if (jobs < 1) throw ConfigError("--jobs must be >= 1");
    ensure_dir(out);
    std::vector<std::pair<double, double>> grid;
    for (double e : config.sweep.eps) {
        for (double t : config.sweep.T_cN_minus) grid.emplace_back(e, t);
    }
    std::vector<SweepRow> rows(grid.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next++; i < grid.size(); i = next++) {
            rows[i] = sweep_point(config, grid[i].first, grid[i].second);
        }
    };
    {
        std::vector<std::jthread> pool;
        const auto n = std::min<std::size_t>(static_cast<std::size_t>(jobs), std::max<std::size_t>(grid.size(), 1));
        for (std::size_t k = 1; k < n; ++k) pool.emplace_back(worker);
        worker();
    }
    std::string csv = std::string(sweep_csv_header) + "\n";
    for (const auto& r : rows) csv += sweep_csv_line(r);
    const fs::path file = out / "sweep.csv";
    write_text(file, csv);
    return {file};
}

std::vector<fs::path> run_classify(const ScenarioConfig& config, const fs::path& out) {
    ensure_dir(out);
    const fs::path file = out / "classify.json";
    write_text(file, classify_report(config).dump(2) + "\n");
    return {file};
}

}  // namespace icelines
