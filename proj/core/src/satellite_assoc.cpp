#include "istn/satellite_assoc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

#include "dense.hpp"
#include "istn/units.hpp"

namespace istn {
namespace {

constexpr double kLn2 = 0.6931471805599453;

double shannon(double x, double kappa) { return x > 0 ? x * std::log2(1.0 + kappa / x) : 0.0; }
double dshannon(double x, double kappa) {
    return std::log2(1.0 + kappa / x) - kappa / ((x + kappa) * kLn2);
}
double d2shannon(double x, double kappa) {
    return -kappa * kappa / (x * (x + kappa) * (x + kappa) * kLn2);
}

// Effective SNR parameter: with the carrier-to-noise reading the SNR on an
// alpha-share is cn/alpha; with the C/N0 reading it is cn0/(alpha W).
double snr_kappa(double cn_linear, double beam_bandwidth_hz, CnInterpretation interp) {
    return interp == CnInterpretation::CarrierToNoise ? cn_linear
                                                      : cn_linear / beam_bandwidth_hz;
}

}  // namespace

double sat_rate(double alpha, double beam_bandwidth_hz, double cn_linear,
                double sat_capacity_bps, CnInterpretation interp) {
    if (!(alpha >= 0 && alpha <= 1)) throw SolveError("alpha must lie in [0,1]");
    if (!(beam_bandwidth_hz > 0)) throw SolveError("beam bandwidth must be positive");
    if (alpha == 0) return 0;
    const double kappa = snr_kappa(cn_linear, beam_bandwidth_hz, interp);
    return std::min(beam_bandwidth_hz * shannon(alpha, kappa), sat_capacity_bps);
}

int priority_delta(double l_u_i, double l_u_j) {
    if (l_u_i < 0 || l_u_j < 0) throw SolveError("loads must be non-negative");
    return l_u_i <= l_u_j ? 1 : 0;
}

std::vector<double> terrestrial_residual_load(std::span<const double> beta,
                                              std::span<const double> l_embb_star) {
    if (beta.size() != l_embb_star.size()) throw SolveError("beta/load dimension mismatch");
    std::vector<double> residual(beta.size());
    for (std::size_t i = 0; i < beta.size(); ++i) {
        if (!(beta[i] >= 0 && beta[i] <= 1)) throw SolveError("beta outside [0,1]");
        residual[i] = (1.0 - beta[i]) * l_embb_star[i];
    }
    return residual;
}

void AssociationProblem::validate() const {
    const int n = size();
    if (n < 1) throw SolveError("association needs at least one SBS");
    if (static_cast<int>(l_urllc_star.size()) != n || static_cast<int>(weights.size()) != n)
        throw SolveError("association vectors must all have one entry per SBS");
    for (double v : l_embb_star)
        if (v < 0) throw SolveError("eMBB loads must be non-negative");
    for (double v : l_urllc_star)
        if (v < 0) throw SolveError("URLLC loads must be non-negative");
    double wsum = 0;
    for (double w : weights) {
        if (w < 0) throw SolveError("weights must be non-negative");
        wsum += w;
    }
    if (std::abs(wsum - 1.0) > 1e-9) throw SolveError("weights must sum to 1");
    if (!(beam_bandwidth_hz > 0)) throw SolveError("beam bandwidth must be positive");
    if (!(sat_capacity_bps > 0)) throw SolveError("satellite capacity must be positive");
}

namespace {

struct Group {
    std::vector<int> cells;
    double l_urllc = 0;
    double lmax = 0;   // largest member eMBB load
    double lsum = 0;   // summed member eMBB load
    double wsum = 0;   // summed omega_i * L_e_i
    bool pinned() const { return lsum <= 0; }
};

// Cells tied on URLLC load (relative tolerance) share one alpha/beta pair;
// the printed pairwise constraints force exact equality across a tie.
std::vector<Group> group_by_priority(const AssociationProblem& p) {
    const int n = p.size();
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int i, int j) {
        return p.l_urllc_star[i] < p.l_urllc_star[j];
    });
    std::vector<Group> groups;
    for (int idx : order) {
        const double lu = p.l_urllc_star[idx];
        if (groups.empty() ||
            lu - groups.back().l_urllc > 1e-6 * std::max(1.0, groups.back().l_urllc)) {
            groups.push_back({});
            groups.back().l_urllc = lu;
        }
        Group& g = groups.back();
        g.cells.push_back(idx);
        g.lmax = std::max(g.lmax, p.l_embb_star[idx]);
        g.lsum += p.l_embb_star[idx];
        g.wsum += p.weights[idx] * p.l_embb_star[idx];
    }
    return groups;
}

AssociationSolution expand(const AssociationProblem& p, const std::vector<Group>& groups,
                           std::span<const double> alpha_g, std::span<const double> beta_g) {
    AssociationSolution sol;
    sol.alpha.assign(p.size(), 0.0);
    sol.beta.assign(p.size(), 0.0);
    sol.offloaded_bps.assign(p.size(), 0.0);
    for (std::size_t g = 0; g < groups.size(); ++g) {
        for (int i : groups[g].cells) {
            sol.alpha[i] = alpha_g[g];
            if (p.l_embb_star[i] > 0) {
                sol.beta[i] = beta_g[g];
                sol.offloaded_bps[i] = beta_g[g] * p.l_embb_star[i];
            }
        }
    }
    return sol;
}

// Interior-point solve over (alpha_g, beta_g) with the simplex equality
// eliminated through a KKT system.
class AssociationSolver {
public:
    AssociationSolver(const AssociationProblem& p, const std::vector<Group>& groups)
        : p_(p), groups_(groups) {
        G_ = static_cast<int>(groups.size());
        kappa_ = snr_kappa(p.cn_linear_value(), p.beam_bandwidth_hz, p.cn_interpretation);
        for (int g = 0; g < G_; ++g)
            if (!groups_[g].pinned()) beta_vars_.push_back(g);
        M_ = static_cast<int>(beta_vars_.size());
        dim_ = G_ + M_;
        scale_ = p.sat_capacity_bps;
    }

    // beta variable index of group g, or -1.
    int beta_index(int g) const {
        const auto it = std::find(beta_vars_.begin(), beta_vars_.end(), g);
        return it == beta_vars_.end() ? -1 : G_ + static_cast<int>(it - beta_vars_.begin());
    }

    std::vector<double> solve() {
        std::vector<double> z = feasible_start();
        const int m = constraint_count();
        double t = 1.0;
        while (true) {
            center(z, t);
            if (m / t < 1e-11) break;
            t *= 5.0;
        }
        return z;
    }

private:
    struct Con {
        double g = 0;
        // Sparse gradient and diagonal curvature.
        std::vector<std::pair<int, double>> grad;
        std::vector<std::pair<int, double>> curv;
    };

    int constraint_count() const {
        int m = 2 * M_ + 1;              // per-group rate + cap, total capacity
        m += (G_ - 1);                   // alpha chain
        m += std::max(M_ - 1, 0);        // beta chain
        m += 2 * G_ + 2 * M_;            // boxes
        return m;
    }

    double rate(double alpha) const { return p_.beam_bandwidth_hz * shannon(alpha, kappa_); }

    std::vector<Con> constraints(std::span<const double> z) const {
        std::vector<Con> cons;
        cons.reserve(constraint_count());
        const double W = p_.beam_bandwidth_hz;
        for (int j = 0; j < M_; ++j) {
            const int g = beta_vars_[j];
            const double alpha = z[g];
            const double beta = z[G_ + j];
            const double lmax = groups_[g].lmax;
            Con rate_con;
            rate_con.g = (beta * lmax - rate(alpha)) / scale_;
            rate_con.grad = {{g, -W * dshannon(alpha, kappa_) / scale_}, {G_ + j, lmax / scale_}};
            rate_con.curv = {{g, -W * d2shannon(alpha, kappa_) / scale_}};
            cons.push_back(std::move(rate_con));

            Con cap_con;
            cap_con.g = (beta * lmax - p_.sat_capacity_bps) / scale_;
            cap_con.grad = {{G_ + j, lmax / scale_}};
            cons.push_back(std::move(cap_con));
        }
        Con total;
        total.g = -p_.sat_capacity_bps / scale_;
        for (int j = 0; j < M_; ++j) {
            const double lsum = groups_[beta_vars_[j]].lsum;
            total.g += z[G_ + j] * lsum / scale_;
            total.grad.push_back({G_ + j, lsum / scale_});
        }
        cons.push_back(std::move(total));

        for (int g = 0; g + 1 < G_; ++g) {
            Con chain;
            chain.g = z[g] - z[g + 1];
            chain.grad = {{g, 1.0}, {g + 1, -1.0}};
            cons.push_back(std::move(chain));
        }
        for (int j = 0; j + 1 < M_; ++j) {
            Con chain;
            chain.g = z[G_ + j] - z[G_ + j + 1];
            chain.grad = {{G_ + j, 1.0}, {G_ + j + 1, -1.0}};
            cons.push_back(std::move(chain));
        }
        for (int v = 0; v < dim_; ++v) {
            Con lo;
            lo.g = -z[v];
            lo.grad = {{v, -1.0}};
            cons.push_back(std::move(lo));
            Con hi;
            hi.g = z[v] - 1.0;
            hi.grad = {{v, 1.0}};
            cons.push_back(std::move(hi));
        }
        return cons;
    }

    bool strictly_feasible(std::span<const double> z) const {
        for (const auto& c : constraints(z))
            if (!(c.g < 0)) return false;
        return true;
    }

    std::vector<double> feasible_start() const {
        std::vector<double> z(dim_, 0.0);
        double total_k = 0;
        for (const auto& g : groups_) total_k += static_cast<double>(g.cells.size());
        // Ascending alphas on the simplex, chain strictly satisfied.
        double norm = 0;
        for (int g = 0; g < G_; ++g) norm += (1.0 + (g + 1) * 1e-3) * groups_[g].cells.size();
        for (int g = 0; g < G_; ++g) z[g] = (1.0 + (g + 1) * 1e-3) / norm;
        (void)total_k;

        double beta0 = 1.0;
        double lsum_total = 0;
        for (int j = 0; j < M_; ++j) {
            const int g = beta_vars_[j];
            beta0 = std::min(beta0, rate(z[g]) / groups_[g].lmax);
            beta0 = std::min(beta0, p_.sat_capacity_bps / groups_[g].lmax);
            lsum_total += groups_[g].lsum;
        }
        if (lsum_total > 0) beta0 = std::min(beta0, p_.sat_capacity_bps / lsum_total);
        beta0 = std::max(1e-12, 0.4 * std::min(beta0, 1.0));
        for (int j = 0; j < M_; ++j) z[G_ + j] = beta0 * (1.0 + (j + 1) * 1e-9);

        if (!strictly_feasible(z))
            throw SolveError("association infeasible: no strictly feasible point found");
        return z;
    }

    double objective(std::span<const double> z) const {
        double value = 0;
        for (int j = 0; j < M_; ++j) value -= groups_[beta_vars_[j]].wsum / scale_ * z[G_ + j];
        return value;
    }

    double barrier(std::span<const double> z, double t) const {
        double h = t * objective(z);
        for (const auto& c : constraints(z)) {
            if (!(c.g < 0)) return std::numeric_limits<double>::infinity();
            h -= std::log(-c.g);
        }
        return h;
    }

    void center(std::vector<double>& z, double t) {
        const int d = dim_;
        std::vector<double> grad(d), step(d), w1(d), w2(d), trial(d), a(d, 0.0), neg(d);
        for (int g = 0; g < G_; ++g) a[g] = static_cast<double>(groups_[g].cells.size());
        std::vector<double> hess(static_cast<std::size_t>(d) * d);

        for (int iter = 0; iter < 160; ++iter) {
            std::fill(grad.begin(), grad.end(), 0.0);
            std::fill(hess.begin(), hess.end(), 0.0);
            for (int j = 0; j < M_; ++j)
                grad[G_ + j] = -t * groups_[beta_vars_[j]].wsum / scale_;

            for (const auto& c : constraints(z)) {
                const double inv = 1.0 / (-c.g);
                for (const auto& [i, gi] : c.grad) grad[i] += gi * inv;
                for (const auto& [i, gi] : c.grad)
                    for (const auto& [j, gj] : c.grad) hess[i * d + j] += gi * gj * inv * inv;
                for (const auto& [i, hi] : c.curv) hess[i * d + i] += hi * inv;
            }

            auto chol = detail::factor_with_jitter(hess, d);
            for (int v = 0; v < d; ++v) neg[v] = -grad[v];
            chol.solve(neg, w1);
            chol.solve(a, w2);
            double a_w1 = 0, a_w2 = 0;
            for (int v = 0; v < d; ++v) {
                a_w1 += a[v] * w1[v];
                a_w2 += a[v] * w2[v];
            }
            const double nu = a_w2 != 0 ? a_w1 / a_w2 : 0.0;
            for (int v = 0; v < d; ++v) step[v] = w1[v] - nu * w2[v];

            double decrement = 0;
            for (int v = 0; v < d; ++v) decrement -= grad[v] * step[v];
            if (decrement / 2 < 1e-13) return;

            const double h0 = barrier(z, t);
            double alpha = 1.0;
            bool moved = false;
            for (int ls = 0; ls < 70; ++ls) {
                for (int v = 0; v < d; ++v) trial[v] = z[v] + alpha * step[v];
                const double h = barrier(trial, t);
                if (h <= h0 - 0.25 * alpha * decrement) {
                    z = trial;
                    moved = true;
                    break;
                }
                alpha *= 0.5;
            }
            if (!moved) return;
        }
    }

    const AssociationProblem& p_;
    const std::vector<Group>& groups_;
    int G_ = 0, M_ = 0, dim_ = 0;
    double kappa_ = 0, scale_ = 1;
    std::vector<int> beta_vars_;
};

}  // namespace

AssociationSolution solve_association(const AssociationProblem& p) {
    p.validate();
    const auto groups = group_by_priority(p);
    const int G = static_cast<int>(groups.size());

    std::vector<double> alpha_g(G, 0.0), beta_g(G, 0.0);

    int unpinned = 0;
    for (const auto& g : groups)
        if (!g.pinned()) ++unpinned;

    if (G == 1) {
        alpha_g[0] = 1.0 / static_cast<double>(groups[0].cells.size());
        if (!groups[0].pinned()) {
            const double rate = sat_rate(alpha_g[0], p.beam_bandwidth_hz, p.cn_linear_value(),
                                         p.sat_capacity_bps, p.cn_interpretation);
            beta_g[0] = std::min({1.0, rate / groups[0].lmax,
                                  p.sat_capacity_bps / groups[0].lsum});
        }
        return expand(p, groups, alpha_g, beta_g);
    }

    if (unpinned == 0) {
        // No eMBB anywhere: nothing to optimize, share the beam evenly.
        const double uniform = 1.0 / static_cast<double>(p.size());
        for (int g = 0; g < G; ++g) alpha_g[g] = uniform;
        return expand(p, groups, alpha_g, beta_g);
    }

    AssociationSolver solver(p, groups);
    const std::vector<double> z = solver.solve();
    for (int g = 0; g < G; ++g) alpha_g[g] = z[g];
    int j = 0;
    for (int g = 0; g < G; ++g)
        if (!groups[g].pinned()) beta_g[g] = z[G + j], ++j;
    return expand(p, groups, alpha_g, beta_g);
}

void write_association_csv(const std::string& path, const AssociationSolution& sol,
                           std::span<const double> l_embb_star) {
    std::ofstream out(path);
    if (!out) throw SolveError("cannot write association file '" + path + "'");
    out << "sbs,alpha,beta,offloaded_bps,residual_bps\n";
    char line[160];
    for (std::size_t i = 0; i < sol.alpha.size(); ++i) {
        std::snprintf(line, sizeof line, "%zu,%.9g,%.9g,%.9g,%.9g\n", i, sol.alpha[i],
                      sol.beta[i], sol.offloaded_bps[i],
                      (1.0 - sol.beta[i]) * l_embb_star[i]);
        out << line;
    }
}

}  // namespace istn
