#include "icelines/commands.hpp"
#include "icelines/errors.hpp"

#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace icelines;
using Catch::Matchers::WithinAbs;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("icelines_cmd_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& file) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(slurp(file));
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        rows.push_back(cells);
    }
    return rows;
}

ScenarioConfig finalized(ScenarioConfig c) {
    c.finalize();
    return c;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(ICELINES_EXE) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("equilibria report") {
    const json j = equilibria_report(finalized({}));
    REQUIRE(j["equilibria"].size() == 2);
    const auto& node = j["equilibria"][1];
    CHECK_THAT(node["point"]["w"].get<double>(), WithinAbs(5.188, 5e-3));
    CHECK_THAT(node["point"]["eta_N"].get<double>(), WithinAbs(0.955, 5e-3));
    CHECK(node["stability"] == "stable node");
    CHECK(node["eigenvalues"].size() == 3);
    for (const char* b : {"retreat", "advance"}) {
        const auto& lifted = j["lifted"][b]["equilibria"];
        REQUIRE_FALSE(lifted.empty());
        for (const auto& eq : lifted) {
            CHECK(eq["eigenvalues"].size() == 4);
            CHECK(eq["point"].contains("xi_N"));
        }
    }

    ScenarioConfig asym;
    asym.reduced_T_cN = -5.0;
    const json a = equilibria_report(finalized(asym));
    bool found = false;
    for (const auto& eq : a["equilibria"]) {
        if (eq["stability"] != "stable node") continue;
        found = true;
        CHECK_THAT(eq["point"]["eta_S"].get<double>(), WithinAbs(-0.907, 5e-3));
        CHECK_THAT(eq["point"]["eta_N"].get<double>(), WithinAbs(0.795, 5e-3));
    }
    CHECK(found);
}

TEST_CASE("reduced simulation endpoints order with the northern threshold") {
    std::vector<double> final_eta_N;
    for (double T : {-10.0, -5.0, -2.0}) {
        ScenarioConfig c;
        c.scenario = "simulate";
        c.reduced_T_cN = T;
        c.simulate.eta_S0 = -0.5;
        c.simulate.eta_N0 = 0.5;
        c.simulate.t_end = 200.0;
        const fs::path out = scratch("sim" + std::to_string(static_cast<int>(-T)));
        const auto files = run_simulate(finalized(c), out);
        REQUIRE(files.size() == 2);
        const auto rows = read_csv(out / "trajectory.csv");
        REQUIRE(rows.size() > 2);
        CHECK(rows.front() == std::vector<std::string>{"t", "w", "eta_S", "eta_N", "xi_N", "branch"});
        CHECK(rows.back()[0] == "200");
        CHECK(rows.back()[4] == "nan");
        CHECK(rows.back()[5] == "none");
        final_eta_N.push_back(std::stod(rows.back()[3]));
        CHECK(json::parse(slurp(out / "events.json")).empty());
        fs::remove_all(out);
    }
    CHECK_THAT(final_eta_N[0], WithinAbs(0.955, 5e-3));
    CHECK(final_eta_N[2] < final_eta_N[1]);
    CHECK(final_eta_N[1] < final_eta_N[0]);
}

TEST_CASE("flip-flop simulation output") {
    ScenarioConfig c;
    c.scenario = "simulate";
    c.simulate.mode = "flipflop";
    c.simulate.w0 = 5.0;
    c.simulate.eta_S0 = -0.95;
    c.simulate.eta_N0 = 0.95;
    c.simulate.xi_N0 = 0.9;
    c.simulate.t_end = 400.0;
    c.simulate.output_dt = 0.5;
    const fs::path out = scratch("flipflop");
    (void)run_simulate(finalized(c), out);
    const auto rows = read_csv(out / "trajectory.csv");
    CHECK(rows.front() == std::vector<std::string>{"t", "w", "eta_S", "eta_N", "xi_N", "branch"});
    int switches = 0;
    for (std::size_t i = 2; i < rows.size(); ++i) {
        CHECK((rows[i][5] == "advance" || rows[i][5] == "retreat"));
        if (rows[i][5] != rows[i - 1][5]) ++switches;
    }
    CHECK(switches >= 4);

    const json events = json::parse(slurp(out / "events.json"));
    REQUIRE(events.is_array());
    REQUIRE(events.size() >= 4);
    for (std::size_t i = 0; i < events.size(); ++i) {
        std::vector<std::string> keys;
        for (const auto& [k, v] : events[i].items()) keys.push_back(k);
        std::vector<std::string> expected = event_fields;
        std::sort(expected.begin(), expected.end());
        CHECK(keys == expected);
        if (i > 0) CHECK(events[i]["label"] != events[i - 1]["label"]);
    }

    // byte-identical on a rerun
    const std::string first_csv = slurp(out / "trajectory.csv");
    const std::string first_events = slurp(out / "events.json");
    (void)run_simulate(finalized(c), out);
    CHECK(slurp(out / "trajectory.csv") == first_csv);
    CHECK(slurp(out / "events.json") == first_events);
    fs::remove_all(out);
}

TEST_CASE("cycle output") {
    ScenarioConfig c;
    c.scenario = "cycle";
    const fs::path out = scratch("cycle");
    const auto files = run_cycle(finalized(c), out);
    REQUIRE(files.size() == 3);
    const json j = json::parse(slurp(out / "cycle.json"));
    CHECK(j["closure_error"].get<double>() < 1e-8);
    CHECK(j["fixed_point_class"]["label"] == "crossing_plus");
    CHECK(j["crossing_minus_class"]["label"] == "crossing_minus");
    CHECK(j["separation_regime"] == true);
    CHECK(j["self_derived"] == true);
    CHECK(j["contraction"].get<double>() < 1.0);
    CHECK(j["metrics"]["advance_fraction"].get<double>() > 0.5);

    const auto adv = read_csv(out / "advance.csv");
    const auto ret = read_csv(out / "retreat.csv");
    CHECK(adv.front() == std::vector<std::string>{"t", "w", "eta_S", "eta_N", "xi_N", "branch"});
    CHECK(adv[1][5] == "advance");
    CHECK(ret[1][5] == "retreat");
    CHECK(adv.back()[0] == ret[1][0]);
    CHECK_THAT(std::stod(ret.back()[0]), WithinAbs(j["period"].get<double>(), 1e-12));
    fs::remove_all(out);
}

TEST_CASE("classify report") {
    ScenarioConfig c;
    c.scenario = "classify";
    const json j = classify_report(finalized(c));
    CHECK(j["label"] == "crossing_plus");
    CHECK(std::abs(j["mass_balance"].get<double>()) < 1e-14);
    CHECK(j["normal_flux_retreat"].get<double>() < 0.0);
    CHECK(j["normal_flux_advance"].get<double>() < 0.0);
    c.classify.w = 20.0;
    CHECK(classify_report(finalized(c))["label"] == "crossing_minus");
}

TEST_CASE("sweep table") {
    ScenarioConfig c;
    c.scenario = "sweep";
    c.sweep.eps = {0.03, 0.3};
    c.sweep.T_cN_minus = {-8.0, -5.0};
    c.cycle.estimate_contraction = false;
    c = finalized(c);
    const fs::path one = scratch("sweep1");
    const fs::path two = scratch("sweep2");
    (void)run_sweep(c, one, 1);
    (void)run_sweep(c, two, 3);
    const std::string text = slurp(one / "sweep.csv");
    CHECK(slurp(two / "sweep.csv") == text);

    const auto rows = read_csv(one / "sweep.csv");
    REQUIRE(rows.size() == 5);
    CHECK(rows[0].size() == 13);
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i][2] == "true");
    // eps major, threshold minor, in input order
    CHECK(rows[1][0] == "0.029999999999999999");
    CHECK(rows[1][1] == "-8");
    CHECK(rows[2][1] == "-5");
    CHECK(std::stod(rows[2][6]) > std::stod(rows[1][6]));
    CHECK(rows[1][11] == "true");
    CHECK(rows[3][11] == "false");

    c.sweep.eps = {};
    const fs::path empty = scratch("sweep_empty");
    (void)run_sweep(c, empty, 2);
    CHECK(slurp(empty / "sweep.csv") == std::string(sweep_csv_header) + "\n");
    CHECK_THROWS_AS(run_sweep(c, empty, 0), ConfigError);
    for (const auto& d : {one, two, empty}) fs::remove_all(d);
}

TEST_CASE("failed sweep points are reported, not thrown") {
    ScenarioConfig c;
    c.cycle.max_iter = 1;
    const SweepRow row = sweep_point(finalized(c), 0.03, -5.0);
    CHECK_FALSE(row.found);
    CHECK_FALSE(row.error.empty());
    const std::string line = sweep_csv_line(row);
    CHECK(line.find(",false,") != std::string::npos);
    CHECK(line.find("nan") != std::string::npos);
}

TEST_CASE("command-line exit codes") {
    const fs::path out = scratch("cli");
    const std::string o = " --out " + out.string();
    CHECK(run_cli("equilibria" + o) == 0);
    CHECK(fs::exists(out / "equilibria.json"));
    CHECK(run_cli("classify --set classify.w=-3" + o) == 0);
    CHECK(run_cli("equilibria --set alpha1=0.9" + o) == 2);
    CHECK(run_cli("equilibria --set bogus=1" + o) == 2);
    CHECK(run_cli("--config /nonexistent.toml equilibria" + o) == 2);
    CHECK(run_cli("frobnicate") == 2);
    CHECK(run_cli("") == 2);
    // no equilibrium in the interior: solver failure
    CHECK(run_cli("equilibria --set reduced.T_cN=-40" + o) == 3);
    CHECK(run_cli("cycle --set cycle.max_iter=1" + o) == 3);
    CHECK(run_cli("sweep --set sweep.eps=[] --jobs 2" + o) == 0);
    CHECK(slurp(out / "sweep.csv") == std::string(sweep_csv_header) + "\n");
    fs::remove_all(out);
}

TEST_CASE("dumped configuration reparses identically") {
    const fs::path dir = scratch("dump");
    fs::create_directories(dir);
    const fs::path dumped = dir / "dumped.toml";
    const std::string cmd = std::string(ICELINES_EXE) +
                            " cycle --set eps=0.3 --set sweep.T_cN_minus=[-7.5] --out somewhere --dump-config > " +
                            dumped.string();
    REQUIRE(std::system(cmd.c_str()) == 0);
    const ScenarioConfig c = load_config(dumped.string());
    CHECK(c.scenario == "cycle");
    CHECK(c.params.eps == 0.3);
    CHECK(c.sweep.T_cN_minus == std::vector<double>{-7.5});
    CHECK(c.output_dir == "somewhere");
    CHECK(dump_config(c) == slurp(dumped));
    fs::remove_all(dir);
}
