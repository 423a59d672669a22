// sdc-experiment: runs one experiment suite and writes a run directory with
// the config snapshot, CSV tables and summary.json.
//
// Exit codes: 0 all assertions pass, 1 an assertion (or the run) failed,
// 2 bad command line or config.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sdc/config.hpp"
#include "sdc/experiments.hpp"

namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw sdc::Error("cannot write " + path.string());
    out << content;
}

std::string grids_override(const std::vector<int>& grids) {
    std::string s = "stability.decay_grids=[";
    for (std::size_t k = 0; k < grids.size(); ++k) s += (k ? "," : "") + std::to_string(grids[k]);
    return s + "]";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Semi-discrete Carleman estimate experiments"};
    app.require_subcommand(1, 1);

    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir;
    std::vector<int> grids;

    for (const auto& name : sdc::suite_names()) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("-c,--config", config_path, "JSON config file (defaults when omitted)")->check(CLI::ExistingFile);
        sub->add_option("-s,--set", overrides, "Override a config key, e.g. --set stability.runs=10");
        sub->add_option("-o,--out", out_dir, "Run directory (default runs/<suite>)");
        if (name == "stability") sub->add_option("--grids", grids, "Decay grids as 1/h, e.g. 16,32,64")->delimiter(',');
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    const std::string suite = app.get_subcommands().front()->get_name();
    if (!grids.empty()) overrides.push_back(grids_override(grids));

    sdc::ExperimentConfig cfg;
    try {
        cfg = config_path.empty() ? sdc::parse_config("{}", overrides) : sdc::load_config(config_path, overrides);
    } catch (const sdc::ConfigError& e) {
        std::cerr << e.what() << '\n';
        return 2;
    }

    const fs::path dir = out_dir.empty() ? fs::path("runs") / suite : fs::path(out_dir);
    sdc::SuiteResult result;
    double wall = 0.0;
    try {
        fs::create_directories(dir);
        write_file(dir / "config.json", sdc::config_to_json(cfg));
        write_file(dir / "seed", std::to_string(cfg.seed) + "\n");
        const auto start = std::chrono::steady_clock::now();
        result = sdc::run_suite(suite, cfg);
        wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        for (const auto& t : result.tables) write_file(dir / t.file, t.content);
    } catch (const std::exception& e) {
        std::cerr << suite << ": " << e.what() << '\n';
        return 1;
    }

    nlohmann::json summary;
    summary["suite"] = result.suite;
    summary["wall_time_s"] = wall;
    summary["assertions"] = nlohmann::json::array();
    for (const auto& a : result.assertions) {
        summary["assertions"].push_back({{"name", a.name}, {"value", a.value}, {"bound", a.bound}, {"pass", a.pass}});
        std::cout << (a.pass ? "PASS " : "FAIL ") << a.name << " = " << a.value << " (bound " << a.bound << ")\n";
    }
    write_file(dir / "summary.json", summary.dump(2) + "\n");
    std::cout << suite << ": " << (result.passed() ? "passed" : "FAILED") << " -> " << dir.string() << '\n';
    return result.passed() ? 0 : 1;
}
