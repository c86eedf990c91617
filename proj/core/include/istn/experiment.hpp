#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "istn/queueing.hpp"
#include "istn/satellite_assoc.hpp"
#include "istn/scenario.hpp"
#include "istn/simulator.hpp"
#include "istn/terrestrial_alloc.hpp"

namespace istn {

/// Per-cell allocation instance produced from a scenario. The admitted-load
/// budget is target_load times the pooled capacity C_Ter + C_Sat/N, and the
/// per-user eMBB bandwidths are dimensioned so the unpunctured eMBB rate
/// fills the budget left over by the URLLC outage reservation.
struct CellPlan {
    CellGammas gammas;
    PuncturingProblem problem;
};

struct MaterializedScenario {
    Scenario scenario;
    std::vector<CellPlan> cells;
    std::vector<double> weights;
    double budget_bps = 0;              // per-cell admitted-load budget
    double outage_quantile_bps = 0;
    double benchmark_capacity_bps = 0;  // C_Ter + C_Sat/N
};

MaterializedScenario materialize(const Scenario& s);

/// Mode-level arrival/service rates driving both the analytics and the
/// analytic-match simulation. Rates are per cell, averaged over cells.
struct ModeRates {
    double capacity_bps = 0;
    double embb_bps = 0;     // residual eMBB bit rate
    double urllc_bps = 0;    // mean admitted URLLC bit rate
    double lambda_pkts = 0;  // packet arrival rate
    double mu_pkts = 0;      // service rate
    double mean_packet_bits = 0;
};

struct ModeAnalytics {
    ModeRates rates;
    AnalyticDelay delay;            // from the effective simulated rates
    double composed_load = 0;       // utilization from the solved loads L*
    double utilization = 0;         // effective utilization of the queue
};

struct PipelineResult {
    MaterializedScenario mat;
    std::vector<PuncturingSolution> cells;
    AssociationSolution association;  // all-zero beta in benchmark mode
    std::vector<double> residual_bps;
    ModeAnalytics istn;
    ModeAnalytics benchmark;
};

/// Full solve: per-cell puncturing, satellite association, residual loads
/// and delay analytics for both network modes.
PipelineResult run_pipeline(const Scenario& s);

ModeRates mode_rates(const MaterializedScenario& mat,
                     const std::vector<PuncturingSolution>& cells,
                     const AssociationSolution& association, NetworkMode mode);

/// JSON report for the solve command, including feasibility checks.
std::string solve_report_json(const PipelineResult& result, NetworkMode report_mode);

struct SweepSpec {
    enum class Variable { Capacity, Load };
    Variable variable = Variable::Capacity;
    std::vector<double> grid;            // capacities in bits/s or loads
    std::vector<std::string> presets;    // constellation names
    std::vector<NetworkMode> modes = {NetworkMode::Istn, NetworkMode::TerrestrialBenchmark};
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    double fixed_rho = 0.8;              // capacity sweeps
    double fixed_capacity_bps = 20e6;    // load sweeps
    int workers = 0;                     // 0: flag/env/hardware fallback

    void validate() const;
};

struct MetricsRow {
    std::string mode;
    std::string preset;
    double c_ter_bps = 0;
    double rho = 0;
    std::uint64_t seed = 0;
    double mean_urllc_delay_s = 0;
    double dropped_embb_bits = 0;
    double availability = 0;
};

struct SummaryRow {
    std::string mode;
    std::string preset;
    double c_ter_bps = 0;
    double rho = 0;
    int n_seeds = 0;
    double mean_urllc_delay_s_mean = 0, mean_urllc_delay_s_std = 0;
    double dropped_embb_bits_mean = 0, dropped_embb_bits_std = 0;
    double availability_mean = 0, availability_std = 0;
};

struct FailureRow {
    std::string mode;
    std::string preset;
    double c_ter_bps = 0;
    double rho = 0;
    std::uint64_t seed = 0;
    std::string error;
};

struct SweepResult {
    std::vector<MetricsRow> rows;
    std::vector<SummaryRow> summary;
    std::vector<FailureRow> failures;
};

/// Grid x preset x mode x seed pipeline runs. Points are dispatched to a
/// worker pool; rows come back in deterministic grid order.
SweepResult run_sweep(const Scenario& base, const SweepSpec& spec);

void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows);
void write_summary_csv(const std::string& path, const std::vector<SummaryRow>& rows);
void write_failures_csv(const std::string& path, const std::vector<FailureRow>& rows);

struct CdfResult {
    std::vector<double> grid_s;
    std::vector<double> empirical_istn, analytic_istn;
    std::vector<double> empirical_ter, analytic_ter;
    double ks_istn = 0, ks_ter = 0;
    std::int64_t samples_istn = 0, samples_ter = 0;
    ModeAnalytics istn, benchmark;
};

/// Delay-CDF agreement experiment: analytic-match service law forced, both
/// modes simulated, empirical and closed-form sojourn CDFs on a shared grid.
CdfResult run_cdf_experiment(const Scenario& s, std::optional<SimConfig> sim_override = {});

void write_cdf_csv(const std::string& path, const CdfResult& result);
void write_cdf_stats_csv(const std::string& path, const CdfResult& result);

/// Worker count: explicit request, then ISTN_OFFLOAD_WORKERS, then hardware.
int resolve_workers(int requested);

}  // namespace istn
