#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace istn {

struct SolveError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Per-cell puncturing allocation instance. Only the first num_urllc()
/// bandwidths can be punctured; f_v is fixed to zero beyond that, since
/// puncturing a user with no URLLC counterpart only costs eMBB rate.
struct PuncturingProblem {
    std::vector<double> b;            // U_1 eMBB bandwidths, Hz
    std::vector<double> gamma_embb;   // U_1 channel coefficients, Hz
    std::vector<double> gamma_urllc;  // U_2 channel coefficients, Hz
    double epsilon = 0.05;
    double pareto_a = 1.0;
    double pareto_x_m = 1.0;
    double capacity_bps = 0;    // admitted-load budget on the backhaul
    double bandwidth_hz = 0;    // SBS bandwidth cap on punctured spectrum

    int num_embb() const { return static_cast<int>(b.size()); }
    int num_urllc() const { return static_cast<int>(gamma_urllc.size()); }
    double outage_quantile() const;

    /// Convenience: one gamma vector shared by both classes (the first U_2
    /// entries serve the URLLC terms).
    static PuncturingProblem with_shared_gamma(std::vector<double> b, std::vector<double> gamma,
                                               int num_urllc, double epsilon, double a,
                                               double x_m, double capacity_bps,
                                               double bandwidth_hz);
    void validate() const;
};

struct ScaIterRow {
    int iteration = 0;
    double objective_bps = 0;
    double max_step_hz = 0;
    double outage_slack_bps = 0;     // L_u - quantile
    double capacity_slack_bps = 0;   // budget - (L_e + L_u)
    double bandwidth_slack_hz = 0;   // W_bs - sum f
};

struct PuncturingSolution {
    std::vector<double> f_star;                     // U_1 entries, zero beyond U_2
    double l_embb_star = 0;
    double l_urllc_star = 0;
    std::vector<double> objective_trace;            // one entry per iteration
    std::vector<std::vector<double>> iterate_trace; // punctured bandwidths per iteration
    std::vector<ScaIterRow> trace_rows;
    int iterations = 0;
    bool converged = false;
};

/// f log2(1 + gamma/f), extended by its limit 0 at f = 0.
double urllc_rate(double f_hz, double gamma_hz);

/// (b - f) log2(1 + gamma/(b - f)), 0 at f = b.
double embb_rate(double b_hz, double f_hz, double gamma_hz);

struct CellLoads {
    double urllc_bps = 0;
    double embb_bps = 0;
};

CellLoads cell_loads(std::span<const double> f, const PuncturingProblem& p);

struct DcParts {
    double f_value = 0;
    double g_value = 0;
};

/// The capacity constraint's convex split: F - G equals L_u + L_e exactly.
DcParts dc_components(std::span<const double> f, const PuncturingProblem& p);

/// First-order expansion of G at f_prev; a global lower bound on G, so the
/// surrogate capacity constraint implies the true one.
struct AffineG {
    double value_at_expansion = 0;
    std::vector<double> gradient;   // d/df_v over the free variables (v < U_2)
    std::vector<double> expansion;  // f_prev restricted to free variables
    double operator()(std::span<const double> f) const;
};

AffineG linearize_g(std::span<const double> f_prev, const PuncturingProblem& p);

/// Solves the convexified allocation at linearization point f_prev.
/// Returns U_1 punctured bandwidths (zero beyond U_2).
std::vector<double> solve_surrogate(const PuncturingProblem& p, std::span<const double> f_prev);

struct ScaOptions {
    double epsilon_error = 0;       // 0 -> 1e-3 * min b_v
    int max_iter = 500;
    std::vector<double> f_init;     // empty -> 0.1 * b
    bool keep_iterates = true;
};

/// Iterates solve_surrogate until the puncturing vector settles.
PuncturingSolution sca_solve(const PuncturingProblem& p, const ScaOptions& opts = {});

void write_solver_trace_csv(const std::string& path, const std::vector<ScaIterRow>& rows);

/// Smallest bandwidth whose single-user rate b log2(1 + gamma/b) reaches
/// target_bps. Throws if the target exceeds the gamma log2(e) ceiling.
double bandwidth_for_rate(double target_bps, double gamma_hz);

}  // namespace istn
