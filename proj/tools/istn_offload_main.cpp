// Command-line runner for the offloading toolkit: solves the two-stage
// allocation, sweeps experiment grids and produces delay-CDF agreement data.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "istn/experiment.hpp"
#include "istn/units.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitSolveError = 1;
constexpr int kExitConfigError = 2;

std::vector<double> parse_grid(const std::string& text, bool capacity) {
    std::vector<double> grid;
    std::string token;
    std::stringstream ss(text);
    while (std::getline(ss, token, ',')) {
        if (token.empty()) continue;
        grid.push_back(capacity ? istn::parse_bits_per_second(token) : std::stod(token));
    }
    return grid;
}

void ensure_dir(const std::string& dir) {
    if (!dir.empty()) fs::create_directories(dir);
}

int cmd_presets() {
    std::printf("%-8s %-18s %-22s %-10s\n", "name", "beam_bandwidth_hz", "sat_capacity_bps",
                "cn_db");
    for (const auto& name : istn::constellation_preset_names()) {
        const auto preset = istn::constellation_preset(name);
        std::printf("%-8s %-18.9g %-22.9g %-10.9g\n", preset.name.c_str(),
                    preset.beam_bandwidth_hz, preset.sat_capacity_bps,
                    preset.carrier_to_noise_db);
    }
    return 0;
}

int cmd_solve(const std::string& scenario_path, const std::string& out_dir,
              const std::string& mode_override, bool solver_trace) {
    istn::Scenario scenario = istn::load_scenario(scenario_path);
    if (!mode_override.empty()) scenario.mode = istn::network_mode_from_string(mode_override);

    const istn::PipelineResult result = istn::run_pipeline(scenario);
    const std::string report = istn::solve_report_json(result, scenario.mode);
    std::cout << report << "\n";

    if (!out_dir.empty()) {
        ensure_dir(out_dir);
        std::ofstream(fs::path(out_dir) / "solve_report.json") << report << "\n";
        std::vector<double> l_embb;
        for (const auto& c : result.cells) l_embb.push_back(c.l_embb_star);
        istn::AssociationSolution assoc = result.association;
        if (scenario.mode == istn::NetworkMode::TerrestrialBenchmark) {
            std::fill(assoc.beta.begin(), assoc.beta.end(), 0.0);
            std::fill(assoc.offloaded_bps.begin(), assoc.offloaded_bps.end(), 0.0);
        }
        istn::write_association_csv((fs::path(out_dir) / "association.csv").string(), assoc,
                                    l_embb);
        const auto& analytics = scenario.mode == istn::NetworkMode::TerrestrialBenchmark
                                    ? result.benchmark
                                    : result.istn;
        istn::write_delay_table_csv((fs::path(out_dir) / "delay_table.csv").string(),
                                    analytics.delay);
        if (solver_trace) {
            for (std::size_t i = 0; i < result.cells.size(); ++i) {
                const auto path =
                    fs::path(out_dir) / ("solver_trace_cell" + std::to_string(i) + ".csv");
                istn::write_solver_trace_csv(path.string(), result.cells[i].trace_rows);
            }
        }
    }

    bool converged = true;
    for (const auto& c : result.cells) converged = converged && c.converged;
    if (!converged) {
        std::cerr << "error: puncturing solver did not converge on every cell\n";
        return kExitSolveError;
    }
    return 0;
}

int cmd_sweep(const std::string& scenario_path, const std::string& out_dir,
              const std::string& variable, const std::string& grid_text,
              const std::vector<std::string>& presets, const std::string& mode_override,
              const std::string& seeds_text, double fixed_rho, const std::string& fixed_capacity,
              int workers) {
    istn::Scenario scenario = istn::load_scenario(scenario_path);

    istn::SweepSpec spec;
    spec.variable = variable == "load" ? istn::SweepSpec::Variable::Load
                                       : istn::SweepSpec::Variable::Capacity;
    spec.workers = workers;
    spec.fixed_rho = fixed_rho;
    if (!fixed_capacity.empty())
        spec.fixed_capacity_bps = istn::parse_bits_per_second(fixed_capacity);

    if (!grid_text.empty()) {
        spec.grid = parse_grid(grid_text, spec.variable == istn::SweepSpec::Variable::Capacity);
    } else if (spec.variable == istn::SweepSpec::Variable::Capacity) {
        for (int c = 10; c <= 100; c += 10) spec.grid.push_back(c * 1e6);
    } else {
        for (int r = 1; r <= 9; ++r) spec.grid.push_back(r / 10.0);
    }

    spec.presets = presets.empty() ? std::vector<std::string>{scenario.constellation.name}
                                   : presets;
    if (!mode_override.empty())
        spec.modes = {istn::network_mode_from_string(mode_override)};
    if (!seeds_text.empty()) {
        spec.seeds.clear();
        std::stringstream ss(seeds_text);
        std::string token;
        while (std::getline(ss, token, ','))
            if (!token.empty()) spec.seeds.push_back(std::stoull(token));
    }

    const istn::SweepResult result = istn::run_sweep(scenario, spec);
    ensure_dir(out_dir.empty() ? "." : out_dir);
    const fs::path dir = out_dir.empty() ? "." : out_dir;
    istn::write_metrics_csv((dir / "metrics.csv").string(), result.rows);
    istn::write_summary_csv((dir / "summary.csv").string(), result.summary);
    if (!result.failures.empty()) {
        istn::write_failures_csv((dir / "failures.csv").string(), result.failures);
        std::cerr << "warning: " << result.failures.size()
                  << " sweep points failed; see failures.csv\n";
    }
    std::cout << "wrote " << result.rows.size() << " metric rows and " << result.summary.size()
              << " summary rows to " << dir.string() << "\n";
    return 0;
}

int cmd_cdf(const std::string& scenario_path, const std::string& out_dir,
            const std::string& trace_out) {
    istn::Scenario scenario = istn::load_scenario(scenario_path);
    const istn::CdfResult result = istn::run_cdf_experiment(scenario);

    ensure_dir(out_dir.empty() ? "." : out_dir);
    const fs::path dir = out_dir.empty() ? "." : out_dir;
    istn::write_cdf_csv((dir / "cdf.csv").string(), result);
    istn::write_cdf_stats_csv((dir / "cdf_ks.csv").string(), result);
    std::printf("KS ISTN        = %.6f  (%lld samples)\n", result.ks_istn,
                static_cast<long long>(result.samples_istn));
    std::printf("KS Terrestrial = %.6f  (%lld samples)\n", result.ks_ter,
                static_cast<long long>(result.samples_ter));

    if (!trace_out.empty()) {
        // Short arrival trace of cell 0 under the scenario's own service law.
        istn::Rng rng(istn::mix_seed(scenario.rng_seed, 0x74726163));
        auto packets = istn::gen_embb_stream(scenario.terrestrial.backhaul_capacity_bps * 0.5,
                                             scenario.terrestrial.embb_packet_bits, 1.0, rng);
        istn::write_trace_csv(trace_out, packets);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Satellite-terrestrial offloading experiments"};
    app.require_subcommand(1);

    std::string scenario_path, out_dir, mode_override, grid_text, seeds_text, fixed_capacity;
    std::string variable = "capacity", trace_out;
    std::vector<std::string> presets;
    double fixed_rho = 0.8;
    int workers = 0;
    bool solver_trace = false;

    auto* solve = app.add_subcommand("solve", "Solve allocation and association for a scenario");
    solve->add_option("--scenario", scenario_path, "Scenario file")->required();
    solve->add_option("--out-dir", out_dir, "Directory for reports");
    solve->add_option("--mode", mode_override, "ISTN or TerrestrialBenchmark");
    solve->add_flag("--solver-trace", solver_trace, "Dump per-cell solver trace CSVs");

    auto* sweep = app.add_subcommand("sweep", "Run a capacity or load sweep");
    sweep->add_option("--scenario", scenario_path, "Scenario file")->required();
    sweep->add_option("--out-dir", out_dir, "Directory for CSV output");
    sweep->add_option("--variable", variable, "capacity or load")
        ->check(CLI::IsMember({"capacity", "load"}));
    sweep->add_option("--grid", grid_text, "Comma-separated grid values");
    sweep->add_option("--presets", presets, "Constellation presets")->delimiter(',');
    sweep->add_option("--mode", mode_override, "Restrict to one mode");
    sweep->add_option("--seeds", seeds_text, "Comma-separated seeds");
    sweep->add_option("--fixed-rho", fixed_rho, "Load for capacity sweeps");
    sweep->add_option("--fixed-capacity", fixed_capacity, "Capacity for load sweeps");
    sweep->add_option("--workers", workers, "Worker threads (ISTN_OFFLOAD_WORKERS fallback)");

    auto* cdf = app.add_subcommand("cdf", "Delay-CDF agreement experiment");
    cdf->add_option("--scenario", scenario_path, "Scenario file")->required();
    cdf->add_option("--out-dir", out_dir, "Directory for CSV output");
    cdf->add_option("--trace-out", trace_out, "Optional arrival-trace CSV path");

    app.add_subcommand("presets", "List the built-in constellation presets");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("presets")) return cmd_presets();
        if (app.got_subcommand("solve"))
            return cmd_solve(scenario_path, out_dir, mode_override, solver_trace);
        if (app.got_subcommand("sweep"))
            return cmd_sweep(scenario_path, out_dir, variable, grid_text, presets, mode_override,
                             seeds_text, fixed_rho, fixed_capacity, workers);
        if (app.got_subcommand("cdf")) return cmd_cdf(scenario_path, out_dir, trace_out);
    } catch (const istn::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const istn::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const istn::UnitError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSolveError;
    }
    return 0;
}
