#pragma once

#include "icelines/limit_cycle.hpp"
#include "icelines/model.hpp"
#include "icelines/ode.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace icelines {

struct SimulateOptions {
    std::string mode = "reduced";  // reduced | flipflop
    double w0 = 0.0;
    double eta_S0 = -0.5;
    double eta_N0 = 0.5;
    double xi_N0 = 0.3;  // flip-flop mode only
    double t_end = 200.0;
    double output_dt = 0.1;  // 0 writes every accepted step

    bool operator==(const SimulateOptions&) const = default;
};

struct SweepOptions {
    std::vector<double> eps{0.03};
    std::vector<double> T_cN_minus{-8.0, -5.0};

    bool operator==(const SweepOptions&) const = default;
};

struct ClassifyOptions {
    // xi_N is placed on the switching surface
    double w = 5.18772;
    double eta_S = -0.954694;
    double eta_N = 0.954694;

    bool operator==(const ClassifyOptions&) const = default;
};

/// Everything a subcommand needs. Defaults reproduce the reference regime.
struct ScenarioConfig {
    std::string scenario = "equilibria";
    ModelParams params = default_params();
    double reduced_T_cN = -10.0;  // northern critical temperature for the reduced system
    SimulateOptions simulate;
    CycleOptions cycle;  // its integrator member is ignored; the top-level one is used
    SweepOptions sweep;
    ClassifyOptions classify;
    ode::IntegratorConfig integrator;
    std::string output_dir = "out";

    /// Cycle options with the shared integrator settings filled in.
    [[nodiscard]] CycleOptions cycle_options() const {
        CycleOptions opts = cycle;
        opts.integrator = integrator;
        return opts;
    }

    bool operator==(const ScenarioConfig&) const = default;

    /// Recompute derived members (insolation coefficients) and check every invariant.
    /// Throws ConfigError.
    void finalize();
};

/// Parse a TOML document. Unknown sections or keys are errors. The result is finalized.
[[nodiscard]] ScenarioConfig parse_config(std::string_view text, ScenarioConfig base = {});
[[nodiscard]] ScenarioConfig load_config(const std::string& path);

/// Apply one KEY=VALUE override. KEY is `section.key` or a bare key; bare keys resolve
/// to [params] first, then to the unique section that has them. Does not finalize.
void apply_override(ScenarioConfig& config, std::string_view assignment);

/// Serialize every setting; parse_config(dump_config(c)) == c.
[[nodiscard]] std::string dump_config(const ScenarioConfig& config);

/// "%.17g" formatting shared by every text output.
[[nodiscard]] std::string format_double(double x);

}  // namespace icelines
