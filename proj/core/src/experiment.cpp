#include "istn/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <json.hpp>

namespace istn {

using nlohmann::json;

int resolve_workers(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("ISTN_OFFLOAD_WORKERS")) {
        const int parsed = std::atoi(env);
        if (parsed > 0) return parsed;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

namespace {

template <typename Fn>
void parallel_for(std::size_t count, int workers, Fn&& fn) {
    workers = std::min<std::size_t>(std::max(workers, 1), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace

MaterializedScenario materialize(const Scenario& s) {
    validate_scenario(s);
    MaterializedScenario mat;
    mat.scenario = s;
    mat.weights = resolve_weights(s);
    const auto& t = s.terrestrial;

    mat.benchmark_capacity_bps =
        benchmark_capacity(t.backhaul_capacity_bps, s.constellation.sat_capacity_bps, t.num_sbs);
    mat.budget_bps = s.target_load * mat.benchmark_capacity_bps;
    mat.outage_quantile_bps = pareto_quantile(s.outage_epsilon, s.pareto_shape, s.pareto_scale);

    if (mat.outage_quantile_bps >= mat.budget_bps)
        throw ValidationError(
            "URLLC outage quantile exceeds the admitted-load budget; raise target_load, "
            "outage_epsilon or the capacities");

    const double embb_target = (mat.budget_bps - mat.outage_quantile_bps) / t.num_embb;
    mat.cells.reserve(t.num_sbs);
    for (int i = 0; i < t.num_sbs; ++i) {
        CellPlan plan;
        plan.gammas = cell_gammas(s, i);
        PuncturingProblem& p = plan.problem;
        p.gamma_embb = plan.gammas.embb;
        p.gamma_urllc = plan.gammas.urllc;
        p.epsilon = s.outage_epsilon;
        p.pareto_a = s.pareto_shape;
        p.pareto_x_m = s.pareto_scale;
        p.capacity_bps = mat.budget_bps;
        p.bandwidth_hz = t.sbs_bandwidth_hz;
        p.b.resize(t.num_embb);
        double total_b = 0;
        for (int v = 0; v < t.num_embb; ++v) {
            p.b[v] = bandwidth_for_rate(embb_target, p.gamma_embb[v]);
            total_b += p.b[v];
        }
        if (total_b > t.sbs_bandwidth_hz)
            throw ValidationError("cell " + std::to_string(i) +
                                  ": dimensioned eMBB bandwidth exceeds the SBS bandwidth");
        p.validate();
        mat.cells.push_back(std::move(plan));
    }
    return mat;
}

ModeRates mode_rates(const MaterializedScenario& mat,
                     const std::vector<PuncturingSolution>& cells,
                     const AssociationSolution& association, NetworkMode mode) {
    const auto& t = mat.scenario.terrestrial;
    const int n = t.num_sbs;
    ModeRates r;
    r.capacity_bps =
        mode == NetworkMode::Istn ? t.backhaul_capacity_bps : mat.benchmark_capacity_bps;

    double embb = 0;
    for (int i = 0; i < n; ++i) {
        const double beta = mode == NetworkMode::Istn ? association.beta[i] : 0.0;
        embb += (1.0 - beta) * cells[i].l_embb_star;
    }
    r.embb_bps = embb / n;
    const double cap = std::min(r.capacity_bps, mat.benchmark_capacity_bps);
    r.urllc_bps = pareto_truncated_mean(mat.scenario.pareto_shape, mat.scenario.pareto_scale, cap);

    const double embb_pkts = r.embb_bps / t.embb_packet_bits;
    const double urllc_pkts = r.urllc_bps / t.urllc_packet_bits;
    r.lambda_pkts = embb_pkts + urllc_pkts;
    r.mu_pkts = mean_service_rate(r.capacity_bps, embb_pkts, t.embb_packet_bits, urllc_pkts,
                                  t.urllc_packet_bits, mat.scenario.service_rate_embb_only);
    r.mean_packet_bits = r.capacity_bps / r.mu_pkts;
    return r;
}

namespace {

ModeAnalytics build_analytics(const MaterializedScenario& mat,
                              const std::vector<PuncturingSolution>& cells,
                              const AssociationSolution& association, NetworkMode mode) {
    ModeAnalytics a;
    a.rates = mode_rates(mat, cells, association, mode);
    a.delay = analytic_delay(a.rates.lambda_pkts, a.rates.mu_pkts);
    double composed = 0;
    const int n = mat.scenario.terrestrial.num_sbs;
    for (int i = 0; i < n; ++i) {
        const double beta = mode == NetworkMode::Istn ? association.beta[i] : 0.0;
        composed += compose_load(cells[i].l_embb_star, cells[i].l_urllc_star, beta,
                                 a.rates.capacity_bps,
                                 mode == NetworkMode::Istn ? QueueMode::Istn
                                                           : QueueMode::Terrestrial);
    }
    a.composed_load = composed / n;
    a.utilization = (a.rates.embb_bps + a.rates.urllc_bps) / a.rates.capacity_bps;
    return a;
}

}  // namespace

PipelineResult run_pipeline(const Scenario& s) {
    PipelineResult result;
    result.mat = materialize(s);
    const int n = s.terrestrial.num_sbs;

    result.cells.reserve(n);
    for (int i = 0; i < n; ++i)
        result.cells.push_back(sca_solve(result.mat.cells[i].problem));

    AssociationProblem ap;
    for (const auto& cell : result.cells) {
        ap.l_embb_star.push_back(cell.l_embb_star);
        ap.l_urllc_star.push_back(cell.l_urllc_star);
    }
    ap.weights = result.mat.weights;
    ap.beam_bandwidth_hz = s.constellation.beam_bandwidth_hz;
    ap.carrier_to_noise_db = s.constellation.carrier_to_noise_db;
    ap.cn_interpretation = s.constellation.cn_interpretation;
    ap.sat_capacity_bps = s.constellation.sat_capacity_bps;
    result.association = solve_association(ap);

    result.residual_bps =
        terrestrial_residual_load(result.association.beta, ap.l_embb_star);
    result.istn = build_analytics(result.mat, result.cells, result.association,
                                  NetworkMode::Istn);
    AssociationSolution zero;
    zero.alpha = result.association.alpha;
    zero.beta.assign(n, 0.0);
    zero.offloaded_bps.assign(n, 0.0);
    result.benchmark = build_analytics(result.mat, result.cells, zero,
                                       NetworkMode::TerrestrialBenchmark);
    return result;
}

std::string solve_report_json(const PipelineResult& result, NetworkMode report_mode) {
    const bool benchmark = report_mode == NetworkMode::TerrestrialBenchmark;
    const auto& mat = result.mat;
    json cells = json::array();
    for (std::size_t i = 0; i < result.cells.size(); ++i) {
        const auto& c = result.cells[i];
        cells.push_back({{"sbs", i},
                         {"f_star_hz", c.f_star},
                         {"l_embb_star_bps", c.l_embb_star},
                         {"l_urllc_star_bps", c.l_urllc_star},
                         {"iterations", c.iterations},
                         {"converged", c.converged},
                         {"objective_bps", c.objective_trace.empty() ? 0.0
                                                                     : c.objective_trace.back()}});
    }

    const auto& assoc = result.association;
    std::vector<double> beta = assoc.beta;
    std::vector<double> offloaded = assoc.offloaded_bps;
    std::vector<double> residual = result.residual_bps;
    if (benchmark) {
        std::fill(beta.begin(), beta.end(), 0.0);
        std::fill(offloaded.begin(), offloaded.end(), 0.0);
        for (std::size_t i = 0; i < residual.size(); ++i)
            residual[i] = result.cells[i].l_embb_star;
    }

    double alpha_sum = 0;
    for (double a : assoc.alpha) alpha_sum += a;
    bool rate_ok = true, capacity_ok = true, priority_ok = true, box_ok = true;
    double offload_total = 0;
    const auto& con = mat.scenario.constellation;
    for (std::size_t i = 0; i < assoc.alpha.size(); ++i) {
        const double limit = sat_rate(assoc.alpha[i], con.beam_bandwidth_hz, con.cn_linear(),
                                      con.sat_capacity_bps, con.cn_interpretation);
        if (offloaded[i] > limit + 1e-6 * con.sat_capacity_bps) rate_ok = false;
        offload_total += offloaded[i];
        if (assoc.alpha[i] < -1e-12 || assoc.alpha[i] > 1 + 1e-12 || beta[i] < -1e-12 ||
            beta[i] > 1 + 1e-12)
            box_ok = false;
        for (std::size_t j = 0; j < assoc.alpha.size(); ++j) {
            if (result.cells[i].l_urllc_star > result.cells[j].l_urllc_star * (1 + 1e-6)) {
                if (assoc.alpha[i] < assoc.alpha[j] - 1e-9) priority_ok = false;
                if (result.cells[i].l_embb_star > 0 && result.cells[j].l_embb_star > 0 &&
                    !benchmark && beta[i] < beta[j] - 1e-9)
                    priority_ok = false;
            }
        }
    }
    if (offload_total > con.sat_capacity_bps * (1 + 1e-6)) capacity_ok = false;

    bool puncturing_ok = true;
    for (std::size_t i = 0; i < result.cells.size(); ++i) {
        const auto& c = result.cells[i];
        const auto& p = mat.cells[i].problem;
        if (c.l_urllc_star < mat.outage_quantile_bps - 1e-6 * mat.outage_quantile_bps)
            puncturing_ok = false;
        if (c.l_embb_star + c.l_urllc_star > p.capacity_bps * (1 + 1e-6)) puncturing_ok = false;
        if (!c.converged) puncturing_ok = false;
    }

    const auto& analytics = benchmark ? result.benchmark : result.istn;
    json report;
    report["mode"] = benchmark ? "TerrestrialBenchmark" : "ISTN";
    report["budget_bps"] = mat.budget_bps;
    report["outage_quantile_bps"] = mat.outage_quantile_bps;
    report["benchmark_capacity_bps"] = mat.benchmark_capacity_bps;
    report["cells"] = cells;
    report["association"] = {{"alpha", assoc.alpha},
                             {"beta", beta},
                             {"offloaded_bps", offloaded},
                             {"residual_bps", residual},
                             {"alpha_sum", alpha_sum}};
    report["analytics"] = {{"capacity_bps", analytics.rates.capacity_bps},
                           {"lambda_pkts", analytics.rates.lambda_pkts},
                           {"mu_pkts", analytics.rates.mu_pkts},
                           {"composed_load", analytics.composed_load},
                           {"utilization", analytics.utilization},
                           {"mean_wait_s", analytics.delay.mean_wait_s},
                           {"mean_sojourn_s", analytics.delay.mean_sojourn_s}};
    report["feasibility"] = {{"alpha_simplex", std::abs(alpha_sum - 1.0) <= 1e-9},
                             {"satellite_rate_limits", rate_ok},
                             {"satellite_capacity", capacity_ok},
                             {"priority_ordering", priority_ok},
                             {"box_bounds", box_ok},
                             {"puncturing_constraints", puncturing_ok}};
    report["all_checks_pass"] = std::abs(alpha_sum - 1.0) <= 1e-9 && rate_ok && capacity_ok &&
                                priority_ok && box_ok && puncturing_ok;
    return report.dump(2);
}

void SweepSpec::validate() const {
    if (grid.empty()) throw ValidationError("sweep grid must be non-empty");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1]))
            throw ValidationError("sweep grid must be strictly increasing");
    if (presets.empty()) throw ValidationError("sweep needs at least one preset");
    if (modes.empty()) throw ValidationError("sweep needs at least one mode");
    if (seeds.empty()) throw ValidationError("sweep needs at least one seed");
}

namespace {

struct SweepPoint {
    double grid_value = 0;
    std::string preset;
};

Scenario scenario_for_point(const Scenario& base, const SweepSpec& spec,
                            const SweepPoint& point) {
    Scenario s = base;
    const ConstellationConfig preset_cfg = constellation_preset(point.preset);
    s.constellation = preset_cfg;
    if (spec.variable == SweepSpec::Variable::Capacity) {
        s.terrestrial.backhaul_capacity_bps = point.grid_value;
        s.target_load = spec.fixed_rho;
    } else {
        s.terrestrial.backhaul_capacity_bps = spec.fixed_capacity_bps;
        s.target_load = point.grid_value;
    }
    return s;
}

double sample_std(const std::vector<double>& xs, double mean) {
    if (xs.size() < 2) return 0.0;
    double ss = 0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / (xs.size() - 1));
}

}  // namespace

SweepResult run_sweep(const Scenario& base, const SweepSpec& spec) {
    spec.validate();
    std::vector<SweepPoint> points;
    for (double g : spec.grid)
        for (const auto& preset : spec.presets) points.push_back({g, preset});

    struct PointOutcome {
        std::vector<MetricsRow> rows;
        std::vector<SummaryRow> summary;
        std::vector<FailureRow> failures;
    };
    std::vector<PointOutcome> outcomes(points.size());

    const int workers = resolve_workers(spec.workers);
    parallel_for(points.size(), workers, [&](std::size_t idx) {
        const SweepPoint& point = points[idx];
        PointOutcome& out = outcomes[idx];
        const Scenario s = scenario_for_point(base, spec, point);
        const double rho = s.target_load;
        const double c_ter = s.terrestrial.backhaul_capacity_bps;

        PipelineResult pipeline;
        bool solved = false;
        std::string solve_error;
        try {
            pipeline = run_pipeline(s);
            solved = true;
        } catch (const std::exception& e) {
            solve_error = e.what();
        }

        for (NetworkMode mode : spec.modes) {
            const std::string mode_name = to_string(mode);
            std::vector<double> delays, drops, avails;
            for (std::uint64_t seed : spec.seeds) {
                if (!solved) {
                    out.failures.push_back(
                        {mode_name, point.preset, c_ter, rho, seed, solve_error});
                    continue;
                }
                try {
                    const SimMetrics metrics =
                        run_sim(s, pipeline.cells,
                                mode == NetworkMode::Istn ? &pipeline.association : nullptr,
                                mode, seed);
                    out.rows.push_back({mode_name, point.preset, c_ter, rho, seed,
                                        metrics.mean_urllc_delay_s,
                                        static_cast<double>(metrics.dropped_embb_bits),
                                        metrics.availability});
                    delays.push_back(metrics.mean_urllc_delay_s);
                    drops.push_back(static_cast<double>(metrics.dropped_embb_bits));
                    avails.push_back(metrics.availability);
                } catch (const std::exception& e) {
                    out.failures.push_back({mode_name, point.preset, c_ter, rho, seed, e.what()});
                }
            }
            if (!delays.empty()) {
                SummaryRow srow;
                srow.mode = mode_name;
                srow.preset = point.preset;
                srow.c_ter_bps = c_ter;
                srow.rho = rho;
                srow.n_seeds = static_cast<int>(delays.size());
                auto mean = [](const std::vector<double>& xs) {
                    double sum = 0;
                    for (double x : xs) sum += x;
                    return sum / xs.size();
                };
                srow.mean_urllc_delay_s_mean = mean(delays);
                srow.mean_urllc_delay_s_std = sample_std(delays, srow.mean_urllc_delay_s_mean);
                srow.dropped_embb_bits_mean = mean(drops);
                srow.dropped_embb_bits_std = sample_std(drops, srow.dropped_embb_bits_mean);
                srow.availability_mean = mean(avails);
                srow.availability_std = sample_std(avails, srow.availability_mean);
                out.summary.push_back(srow);
            }
        }
    });

    SweepResult result;
    for (const auto& out : outcomes) {
        result.rows.insert(result.rows.end(), out.rows.begin(), out.rows.end());
        result.summary.insert(result.summary.end(), out.summary.begin(), out.summary.end());
        result.failures.insert(result.failures.end(), out.failures.begin(), out.failures.end());
    }
    return result;
}

void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write metrics file '" + path + "'");
    out << "mode,preset,c_ter_bps,rho,seed,mean_urllc_delay_s,dropped_embb_bits,availability\n";
    char line[256];
    for (const auto& r : rows) {
        std::snprintf(line, sizeof line, "%s,%s,%.9g,%.9g,%llu,%.9g,%.9g,%.9g\n", r.mode.c_str(),
                      r.preset.c_str(), r.c_ter_bps, r.rho,
                      static_cast<unsigned long long>(r.seed), r.mean_urllc_delay_s,
                      r.dropped_embb_bits, r.availability);
        out << line;
    }
}

void write_summary_csv(const std::string& path, const std::vector<SummaryRow>& rows) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write summary file '" + path + "'");
    out << "mode,preset,c_ter_bps,rho,n_seeds,mean_urllc_delay_s_mean,mean_urllc_delay_s_std,"
           "dropped_embb_bits_mean,dropped_embb_bits_std,availability_mean,availability_std\n";
    char line[320];
    for (const auto& r : rows) {
        std::snprintf(line, sizeof line, "%s,%s,%.9g,%.9g,%d,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n",
                      r.mode.c_str(), r.preset.c_str(), r.c_ter_bps, r.rho, r.n_seeds,
                      r.mean_urllc_delay_s_mean, r.mean_urllc_delay_s_std,
                      r.dropped_embb_bits_mean, r.dropped_embb_bits_std, r.availability_mean,
                      r.availability_std);
        out << line;
    }
}

void write_failures_csv(const std::string& path, const std::vector<FailureRow>& rows) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write failures file '" + path + "'");
    out << "mode,preset,c_ter_bps,rho,seed,error\n";
    for (const auto& r : rows) {
        std::string clean = r.error;
        for (char& ch : clean)
            if (ch == ',' || ch == '\n') ch = ';';
        char head[128];
        std::snprintf(head, sizeof head, "%s,%s,%.9g,%.9g,%llu,", r.mode.c_str(),
                      r.preset.c_str(), r.c_ter_bps, r.rho,
                      static_cast<unsigned long long>(r.seed));
        out << head << clean << "\n";
    }
}

CdfResult run_cdf_experiment(const Scenario& s, std::optional<SimConfig> sim_override) {
    SimConfig sim = sim_override.value_or(s.sim);
    sim.exponential_service = true;  // analytic-match service law
    CdfResult result;

    PipelineResult pipeline = run_pipeline(s);
    result.istn = pipeline.istn;
    result.benchmark = pipeline.benchmark;

    SimMetrics istn = run_sim(s, pipeline.cells, &pipeline.association, NetworkMode::Istn,
                              s.rng_seed, sim);
    SimMetrics ter = run_sim(s, pipeline.cells, nullptr, NetworkMode::TerrestrialBenchmark,
                             s.rng_seed, sim);
    if (istn.delay_samples.empty() || ter.delay_samples.empty())
        throw SimError("no delay samples: scenario generated no deliverable traffic");
    result.samples_istn = static_cast<std::int64_t>(istn.delay_samples.size());
    result.samples_ter = static_cast<std::int64_t>(ter.delay_samples.size());

    const AnalyticDelay istn_delay = pipeline.istn.delay;
    const AnalyticDelay ter_delay = pipeline.benchmark.delay;
    result.ks_istn =
        ks_statistic(istn.delay_samples, [&](double x) { return istn_delay.cdf(x); });
    result.ks_ter = ks_statistic(ter.delay_samples, [&](double x) { return ter_delay.cdf(x); });

    // Shared grid from pooled quantiles of both sample sets.
    std::vector<double> pooled = istn.delay_samples;
    pooled.insert(pooled.end(), ter.delay_samples.begin(), ter.delay_samples.end());
    std::sort(pooled.begin(), pooled.end());
    const auto istn_cdf = empirical_cdf(std::move(istn.delay_samples));
    const auto ter_cdf = empirical_cdf(std::move(ter.delay_samples));
    constexpr int kGridPoints = 2000;
    double last = -1;
    for (int k = 0; k <= kGridPoints; ++k) {
        const std::size_t idx =
            std::min(pooled.size() - 1,
                     static_cast<std::size_t>(static_cast<double>(k) / kGridPoints *
                                              (pooled.size() - 1)));
        const double x = pooled[idx];
        if (x == last) continue;
        last = x;
        result.grid_s.push_back(x);
        result.empirical_istn.push_back(ecdf_value(istn_cdf, x));
        result.analytic_istn.push_back(istn_delay.cdf(x));
        result.empirical_ter.push_back(ecdf_value(ter_cdf, x));
        result.analytic_ter.push_back(ter_delay.cdf(x));
    }
    return result;
}

void write_cdf_csv(const std::string& path, const CdfResult& result) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write CDF file '" + path + "'");
    out << "x_s,empirical_istn,analytic_istn,empirical_ter,analytic_ter\n";
    char line[192];
    for (std::size_t i = 0; i < result.grid_s.size(); ++i) {
        std::snprintf(line, sizeof line, "%.9g,%.9g,%.9g,%.9g,%.9g\n", result.grid_s[i],
                      result.empirical_istn[i], result.analytic_istn[i], result.empirical_ter[i],
                      result.analytic_ter[i]);
        out << line;
    }
}

void write_cdf_stats_csv(const std::string& path, const CdfResult& result) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write CDF stats file '" + path + "'");
    out << "mode,ks,n_samples,lambda_pkts,mu_pkts\n";
    char line[160];
    std::snprintf(line, sizeof line, "ISTN,%.9g,%lld,%.9g,%.9g\n", result.ks_istn,
                  static_cast<long long>(result.samples_istn), result.istn.rates.lambda_pkts,
                  result.istn.rates.mu_pkts);
    out << line;
    std::snprintf(line, sizeof line, "Terrestrial,%.9g,%lld,%.9g,%.9g\n", result.ks_ter,
                  static_cast<long long>(result.samples_ter),
                  result.benchmark.rates.lambda_pkts, result.benchmark.rates.mu_pkts);
    out << line;
}

}  // namespace istn
