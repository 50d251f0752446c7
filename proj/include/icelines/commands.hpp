#pragma once

#include "icelines/config.hpp"
#include "icelines/limit_cycle.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace icelines {

/// Header shared by every trajectory CSV.
inline constexpr const char* trajectory_csv_header = "t,w,eta_S,eta_N,xi_N,branch";

/// Field order of a switching-event record.
inline const std::vector<std::string> event_fields{"t",     "label",   "w",           "eta_S",
                                                   "eta_N", "xi_N",    "margin_plus", "margin_minus"};

inline constexpr const char* sweep_csv_header =
    "eps,T_cN_minus,cycle_found,iterations,period,advance_fraction,amplitude_etaN,amplitude_etaS,"
    "amplitude_xiN,sync_lag,contraction,separation_regime,error";

struct SweepRow {
    double eps = 0.0;
    double T_cN_minus = 0.0;
    bool found = false;
    int iterations = 0;
    double period = 0.0;
    CycleMetrics metrics;
    std::optional<double> contraction;
    bool separation = false;
    std::string error;
};

// Report builders, separated from file output so they can be tested directly.
[[nodiscard]] nlohmann::json equilibria_report(const ScenarioConfig& config);
[[nodiscard]] nlohmann::json cycle_report(const LimitCycle& cycle, const ModelParams& params,
                                          double on_sigma_tol = 1e-12);
[[nodiscard]] nlohmann::json classify_report(const ScenarioConfig& config);
[[nodiscard]] SweepRow sweep_point(const ScenarioConfig& config, double eps, double T_cN_minus);
[[nodiscard]] std::string sweep_csv_line(const SweepRow& row);

// Each writes into `out` (created if missing) and returns the files written.
// Solver failures propagate as SolverError after any partial report is written.
std::vector<std::filesystem::path> run_equilibria(const ScenarioConfig& config, const std::filesystem::path& out);
std::vector<std::filesystem::path> run_simulate(const ScenarioConfig& config, const std::filesystem::path& out);
std::vector<std::filesystem::path> run_cycle(const ScenarioConfig& config, const std::filesystem::path& out);
std::vector<std::filesystem::path> run_sweep(const ScenarioConfig& config, const std::filesystem::path& out,
                                             int jobs = 1);
std::vector<std::filesystem::path> run_classify(const ScenarioConfig& config, const std::filesystem::path& out);

}  // namespace icelines
