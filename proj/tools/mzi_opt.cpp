// mzi_opt: scenario-driven phase-sensitivity runs, sweeps and figure presets.
//
//   mzi_opt run <scenario.json>
//   mzi_opt sweep <scenario.json>
//   mzi_opt validate <scenario.json>
//   mzi_opt preset <figN> [--out dir]
//
// Exit codes: 0 ok, 2 invalid scenario, 3 computation error, 4 I/O error.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "mzi/scenario.hpp"

namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kInvalid = 2, kCompute = 3, kIo = 4 };

// Relative output paths are taken relative to the scenario file.
fs::path output_for(const mzi::Scenario& s, const fs::path& scenario_file) {
    fs::path p = s.output_path;
    if (p.is_relative()) p = scenario_file.parent_path() / p;
    return p;
}

int cmd_validate(const fs::path& file) {
    mzi::load_scenario(file);
    std::cout << "ok\n";
    return kOk;
}

int cmd_run(const fs::path& file) {
    const auto s = mzi::load_scenario(file);
    const auto r = mzi::run_scenario(s);
    auto summary = mzi::summary_json(s, r);
    if (s.sweep) {
        const auto out = output_for(s, file);
        mzi::write_atomic(out, mzi::csv_text(s.sweep->variable, r.rows));
        summary["output"] = out.string();
    }
    std::cout << summary.dump() << "\n";
    return kOk;
}

int cmd_sweep(const fs::path& file) {
    const auto s = mzi::load_scenario(file);
    if (!s.sweep) throw mzi::ScenarioInvalid({"sweep: missing"});
    const auto rows = mzi::run_sweep(s);
    const auto text = mzi::csv_text(s.sweep->variable, rows);
    if (s.output_path.empty()) {
        std::cout << text;
    } else {
        const auto out = output_for(s, file);
        mzi::write_atomic(out, text);
        std::cout << mzi::json{{"rows", rows.size()}, {"output", out.string()}}.dump() << "\n";
    }
    return kOk;
}

int cmd_preset(const std::string& id, const fs::path& dir) {
    for (const auto& [name, s] : mzi::preset(id)) {
        mzi::write_atomic(dir / (name + ".json"), mzi::scenario_to_json(s).dump(2) + "\n");
        const auto r = mzi::run_scenario(s);
        mzi::write_atomic(dir / s.output_path, mzi::csv_text(s.sweep->variable, r.rows));
        auto summary = mzi::summary_json(s, r);
        summary["curve"] = name;
        summary["output"] = (dir / s.output_path).string();
        std::cout << summary.dump() << "\n";
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Unbalanced Mach-Zehnder phase-sensitivity optimizer"};
    app.require_subcommand(1);

    std::string scenario_file, preset_id, out_dir = ".";
    auto* run = app.add_subcommand("run", "optimize a scenario and write its sweep CSV");
    run->add_option("scenario", scenario_file, "scenario JSON")->required();
    auto* sweep = app.add_subcommand("sweep", "evaluate the sweep of a scenario");
    sweep->add_option("scenario", scenario_file, "scenario JSON")->required();
    auto* validate = app.add_subcommand("validate", "check a scenario file");
    validate->add_option("scenario", scenario_file, "scenario JSON")->required();
    auto* preset = app.add_subcommand("preset", "reproduce the curves of a figure");
    preset->add_option("figure", preset_id, "fig3 ... fig12")->required()->check(CLI::IsMember(mzi::preset_ids()));
    preset->add_option("--out", out_dir, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kInvalid;
    }

    try {
        if (*run) return cmd_run(scenario_file);
        if (*sweep) return cmd_sweep(scenario_file);
        if (*validate) return cmd_validate(scenario_file);
        if (*preset) return cmd_preset(preset_id, out_dir);
    } catch (const mzi::ScenarioInvalid& e) {
        for (const auto& v : e.violations) std::cerr << "invalid: " << v << "\n";
        return kInvalid;
    } catch (const mzi::IoError& e) {
        std::cerr << "io: " << e.what() << "\n";
        return kIo;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "io: " << e.what() << "\n";
        return kIo;
    } catch (const mzi::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kCompute;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid: " << e.what() << "\n";
        return kInvalid;
    }
    return kOk;
}
