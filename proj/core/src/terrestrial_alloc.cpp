#include "istn/terrestrial_alloc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>

#include "dense.hpp"
#include "istn/traffic.hpp"

namespace istn {
namespace {

constexpr double kLn2 = 0.6931471805599453;
constexpr double kXi = 1e-9;  // relative clamp away from box boundaries

double lg(double x) { return std::log2(x); }

// x log2(x), extended by its limit 0 at x = 0.
double xlgx(double x) { return x > 0 ? x * std::log2(x) : 0.0; }

struct Term {
    // f log2(1 + g/f): value and derivatives.
    static double u(double f, double g) { return f > 0 ? f * std::log2(1.0 + g / f) : 0.0; }
    static double du(double f, double g) { return lg(1.0 + g / f) - g / ((f + g) * kLn2); }
    static double d2u(double f, double g) { return -g * g / (f * (f + g) * (f + g) * kLn2); }
};

}  // namespace

double urllc_rate(double f_hz, double gamma_hz) {
    if (f_hz < 0) throw SolveError("punctured bandwidth must be non-negative");
    if (!(gamma_hz > 0)) throw SolveError("gamma must be positive");
    return Term::u(f_hz, gamma_hz);
}

double embb_rate(double b_hz, double f_hz, double gamma_hz) {
    if (f_hz < 0 || f_hz > b_hz) throw SolveError("punctured bandwidth outside [0, b]");
    if (!(gamma_hz > 0)) throw SolveError("gamma must be positive");
    return Term::u(b_hz - f_hz, gamma_hz);
}

double PuncturingProblem::outage_quantile() const {
    return pareto_quantile(epsilon, pareto_a, pareto_x_m);
}

PuncturingProblem PuncturingProblem::with_shared_gamma(std::vector<double> b,
                                                       std::vector<double> gamma, int num_urllc,
                                                       double epsilon, double a, double x_m,
                                                       double capacity_bps, double bandwidth_hz) {
    PuncturingProblem p;
    p.b = std::move(b);
    p.gamma_embb = gamma;
    gamma.resize(num_urllc);
    p.gamma_urllc = std::move(gamma);
    p.epsilon = epsilon;
    p.pareto_a = a;
    p.pareto_x_m = x_m;
    p.capacity_bps = capacity_bps;
    p.bandwidth_hz = bandwidth_hz;
    return p;
}

void PuncturingProblem::validate() const {
    const int u1 = num_embb();
    const int u2 = num_urllc();
    if (u2 > u1) throw SolveError("U_2 <= U_1 violated in puncturing problem");
    if (static_cast<int>(gamma_embb.size()) != u1)
        throw SolveError("gamma_embb must have one entry per eMBB user");
    for (double v : b)
        if (!(v > 0)) throw SolveError("eMBB bandwidths must be positive");
    for (double v : gamma_embb)
        if (!(v > 0)) throw SolveError("gamma values must be positive");
    for (double v : gamma_urllc)
        if (!(v > 0)) throw SolveError("gamma values must be positive");
    if (!(epsilon > 0 && epsilon <= 1)) throw SolveError("epsilon must lie in (0,1]");
    if (!(pareto_a > 0) || !(pareto_x_m > 0)) throw SolveError("Pareto parameters must be positive");
    if (!(capacity_bps > 0)) throw SolveError("capacity budget must be positive");
    if (!(bandwidth_hz > 0)) throw SolveError("SBS bandwidth must be positive");

    // Feasibility of the outage constraint at full puncture.
    double max_urllc = 0;
    for (int v = 0; v < u2; ++v) max_urllc += Term::u(b[v], gamma_urllc[v]);
    if (u2 > 0 && max_urllc < outage_quantile())
        throw SolveError("infeasible: outage quantile exceeds the achievable URLLC load");
}

CellLoads cell_loads(std::span<const double> f, const PuncturingProblem& p) {
    const int u1 = p.num_embb();
    const int u2 = p.num_urllc();
    if (static_cast<int>(f.size()) != u1)
        throw SolveError("dimension mismatch: expected one f per eMBB user");
    CellLoads loads;
    for (int v = 0; v < u2; ++v) loads.urllc_bps += urllc_rate(f[v], p.gamma_urllc[v]);
    for (int v = 0; v < u1; ++v) loads.embb_bps += embb_rate(p.b[v], f[v], p.gamma_embb[v]);
    return loads;
}

DcParts dc_components(std::span<const double> f, const PuncturingProblem& p) {
    const int u1 = p.num_embb();
    const int u2 = p.num_urllc();
    if (static_cast<int>(f.size()) != u1)
        throw SolveError("dimension mismatch: expected one f per eMBB user");
    DcParts parts;
    for (int v = 0; v < u2; ++v) {
        parts.f_value += f[v] * lg(f[v] + p.gamma_urllc[v]);
        parts.g_value += xlgx(f[v]);
    }
    for (int v = 0; v < u1; ++v) {
        const double rem = p.b[v] - f[v];
        parts.f_value += rem * lg(rem + p.gamma_embb[v]);
        parts.g_value += xlgx(rem);
    }
    return parts;
}

double AffineG::operator()(std::span<const double> f) const {
    double value = value_at_expansion;
    for (std::size_t v = 0; v < gradient.size(); ++v)
        value += gradient[v] * (f[v] - expansion[v]);
    return value;
}

AffineG linearize_g(std::span<const double> f_prev, const PuncturingProblem& p) {
    const int u1 = p.num_embb();
    const int u2 = p.num_urllc();
    if (static_cast<int>(f_prev.size()) < u2)
        throw SolveError("dimension mismatch in linearization point");
    AffineG affine;
    affine.gradient.resize(u2);
    affine.expansion.assign(f_prev.begin(), f_prev.begin() + u2);
    for (int v = 0; v < u2; ++v) {
        if (!(f_prev[v] > 0) || !(f_prev[v] < p.b[v]))
            throw SolveError("linearization point must be strictly inside (0, b)");
        // Both per-variable terms carry the same 1/ln2 constant, which cancels.
        affine.gradient[v] = lg(f_prev[v]) - lg(p.b[v] - f_prev[v]);
    }
    std::vector<double> full(f_prev.begin(), f_prev.begin() + u2);
    full.resize(u1, 0.0);
    affine.value_at_expansion = dc_components(full, p).g_value;
    return affine;
}

namespace {

// Convex surrogate solved by a log-barrier interior-point method over the
// scaled variables x_v = f_v / b_v, v < U_2.
class SurrogateSolver {
public:
    SurrogateSolver(const PuncturingProblem& p, std::span<const double> f_prev) : p_(p) {
        n_ = p.num_urllc();
        q_ = p.outage_quantile();
        rate_scale_ = std::max({p.capacity_bps, q_, 1.0});
        affine_ = linearize_g(f_prev, p);
        // Constant part of the capacity function from unpunctured users.
        f_const_ = 0;
        for (int v = n_; v < p.num_embb(); ++v)
            f_const_ += p.b[v] * lg(p.b[v] + p.gamma_embb[v]);
    }

    std::vector<double> solve(std::span<const double> f_start) {
        std::vector<double> x(n_);
        for (int v = 0; v < n_; ++v)
            x[v] = std::clamp(f_start[v] / p_.b[v], 2 * kXi, 1.0 - 2 * kXi);
        ensure_interior(x);

        const int m = 3 + 2 * n_;
        double t = 1.0;
        const double gap_tol = 1e-10;
        while (true) {
            center(x, t);
            if (m / t < gap_tol) break;
            t *= 5.0;
        }
        verify_kkt(x, t);

        std::vector<double> f(p_.num_embb(), 0.0);
        for (int v = 0; v < n_; ++v) f[v] = x[v] * p_.b[v];
        return f;
    }

private:
    struct Eval {
        double phi;                  // scaled objective
        std::vector<double> dphi;    // gradient
        std::vector<double> d2phi;   // diagonal Hessian
        double ga, gb, gc;           // constraint values (<= 0 feasible)
        std::vector<double> dga, dgb, dgc;
        std::vector<double> hga, hgb;  // diagonal Hessians (gc is linear)
    };

    Eval evaluate(std::span<const double> x) const {
        Eval e;
        e.dphi.assign(n_, 0.0);
        e.d2phi.assign(n_, 0.0);
        e.dga.assign(n_, 0.0);
        e.dgb.assign(n_, 0.0);
        e.dgc.assign(n_, 0.0);
        e.hga.assign(n_, 0.0);
        e.hgb.assign(n_, 0.0);

        double obj = 0, lu = 0, fval = f_const_, ghat = affine_.value_at_expansion, sumf = 0;
        for (int v = 0; v < n_; ++v) {
            const double b = p_.b[v];
            const double f = x[v] * b;
            const double ge = p_.gamma_embb[v];
            const double gu = p_.gamma_urllc[v];
            const double rem = b - f;

            obj += Term::u(rem, ge);
            e.dphi[v] = Term::du(rem, ge) * b / rate_scale_;   // -d obj/df * b
            e.d2phi[v] = -Term::d2u(rem, ge) * b * b / rate_scale_;

            lu += Term::u(f, gu);
            e.dga[v] = -Term::du(f, gu) * b / rate_scale_;
            e.hga[v] = -Term::d2u(f, gu) * b * b / rate_scale_;

            fval += f * lg(f + gu) + rem * lg(rem + ge);
            const double df = lg(f + gu) + f / ((f + gu) * kLn2) - lg(rem + ge) -
                              rem / ((rem + ge) * kLn2);
            const double d2f = (f + 2 * gu) / ((f + gu) * (f + gu) * kLn2) +
                               (rem + 2 * ge) / ((rem + ge) * (rem + ge) * kLn2);
            ghat += affine_.gradient[v] * (f - affine_.expansion[v]);
            e.dgb[v] = (df - affine_.gradient[v]) * b / rate_scale_;
            e.hgb[v] = d2f * b * b / rate_scale_;

            sumf += f;
            e.dgc[v] = b / p_.bandwidth_hz;
        }
        e.phi = -obj / rate_scale_;
        e.ga = (q_ - lu) / rate_scale_;
        e.gb = (fval - ghat - p_.capacity_bps) / rate_scale_;
        e.gc = sumf / p_.bandwidth_hz - 1.0;
        return e;
    }

    // Worst-case slack across all constraints (scaled); positive inside.
    double min_slack(std::span<const double> x) const {
        double slack = std::numeric_limits<double>::infinity();
        for (int v = 0; v < n_; ++v)
            slack = std::min({slack, x[v] - kXi, (1.0 - kXi) - x[v]});
        const Eval e = evaluate(x);
        return std::min({slack, -e.ga, -e.gb, -e.gc});
    }

    // Warm starts sit on the previous active set; blend toward an interior
    // anchor so the barrier starts with workable slack. Constraint convexity
    // makes the blend at least as feasible as its endpoints.
    void ensure_interior(std::vector<double>& x) const {
        const double slack0 = min_slack(x);
        if (slack0 > 1e-10) return;

        double best_slack = -std::numeric_limits<double>::infinity();
        std::vector<double> anchor(n_);
        for (int k = 0; k <= 64; ++k) {
            std::vector<double> candidate(n_);
            const double s = 1e-6 * std::pow(1e6 * (1.0 - 1e-5), k / 64.0);
            for (int v = 0; v < n_; ++v) candidate[v] = s;
            const double slack = min_slack(candidate);
            if (slack > best_slack) {
                best_slack = slack;
                anchor = candidate;
            }
        }
        if (best_slack <= 0) {
            if (slack0 > 0) return;  // tight but workable
            const Eval e = evaluate(x);
            if (e.ga >= 0)
                throw SolveError("surrogate infeasible at start: outage constraint short by " +
                                 std::to_string(e.ga * rate_scale_) + " bits/s");
            if (e.gb >= 0)
                throw SolveError(
                    "surrogate infeasible at start: capacity constraint exceeded by " +
                    std::to_string(e.gb * rate_scale_) + " bits/s");
            throw SolveError("surrogate infeasible at start: bandwidth constraint violated");
        }
        for (double blend : {0.05, 0.2, 0.5, 1.0}) {
            std::vector<double> trial(n_);
            for (int v = 0; v < n_; ++v)
                trial[v] = (1.0 - blend) * x[v] + blend * anchor[v];
            if (min_slack(trial) > std::min(1e-10, 0.5 * blend * best_slack)) {
                x = trial;
                return;
            }
        }
        x = anchor;
    }

    // Centering objective relative to phi_ref; the shift keeps t*(phi-ref)
    // near O(1) so line-search comparisons stay above fp noise at large t.
    double barrier_value(const Eval& e, double t, double phi_ref) const {
        return t * (e.phi - phi_ref) - std::log(-e.ga) - std::log(-e.gb) - std::log(-e.gc) -
               box_log_;
    }

    // Newton step on H = D + sum_k w_k a_k a_k^T via the Woodbury identity;
    // stays accurate when an active constraint makes some w_k enormous.
    static void woodbury_solve(std::span<const double> diag,
                               const std::vector<std::pair<double, const std::vector<double>*>>& rank1,
                               std::span<const double> rhs, std::span<double> out) {
        const int n = static_cast<int>(diag.size());
        const int k = static_cast<int>(rank1.size());
        std::vector<double> y(n);
        for (int v = 0; v < n; ++v) y[v] = rhs[v] / diag[v];
        if (k == 0) {
            std::copy(y.begin(), y.end(), out.begin());
            return;
        }
        // Capacitance M = diag(1/w) + A^T D^-1 A, z = M^-1 A^T y.
        std::vector<double> m(static_cast<std::size_t>(k) * k, 0.0), aty(k, 0.0);
        for (int r = 0; r < k; ++r) {
            const auto& ar = *rank1[r].second;
            for (int v = 0; v < n; ++v) aty[r] += ar[v] * y[v];
            for (int c = 0; c < k; ++c) {
                const auto& ac = *rank1[c].second;
                double dot = 0;
                for (int v = 0; v < n; ++v) dot += ar[v] * ac[v] / diag[v];
                m[r * k + c] = dot + (r == c ? 1.0 / rank1[r].first : 0.0);
            }
        }
        // Tiny Gaussian elimination with partial pivoting.
        std::vector<int> piv(k);
        for (int c = 0; c < k; ++c) piv[c] = c;
        std::vector<double> z = aty;
        for (int c = 0; c < k; ++c) {
            int best = c;
            for (int r = c + 1; r < k; ++r)
                if (std::abs(m[r * k + c]) > std::abs(m[best * k + c])) best = r;
            for (int j = 0; j < k; ++j) std::swap(m[c * k + j], m[best * k + j]);
            std::swap(z[c], z[best]);
            const double pivot = m[c * k + c] != 0 ? m[c * k + c] : 1e-300;
            for (int r = c + 1; r < k; ++r) {
                const double factor = m[r * k + c] / pivot;
                for (int j = c; j < k; ++j) m[r * k + j] -= factor * m[c * k + j];
                z[r] -= factor * z[c];
            }
        }
        for (int c = k - 1; c >= 0; --c) {
            for (int j = c + 1; j < k; ++j) z[c] -= m[c * k + j] * z[j];
            z[c] /= m[c * k + c] != 0 ? m[c * k + c] : 1e-300;
        }
        for (int v = 0; v < n; ++v) {
            double correction = 0;
            for (int r = 0; r < k; ++r) correction += (*rank1[r].second)[v] * z[r];
            out[v] = y[v] - correction / diag[v];
        }
    }

    void center(std::vector<double>& x, double t) {
        std::vector<double> grad(n_), step(n_), trial(n_), diag(n_), neg_grad(n_);
        const double phi_ref = evaluate(x).phi;
        int stalled = 0;
        double best_decrement = std::numeric_limits<double>::infinity();
        int since_improvement = 0;
        for (int iter = 0; iter < 120; ++iter) {
            const Eval e = evaluate(x);
            for (int v = 0; v < n_; ++v) {
                const double xlo = x[v] - kXi;          // distance to lower box
                const double xhi = (1.0 - kXi) - x[v];  // distance to upper box
                grad[v] = t * e.dphi[v] + e.dga[v] / (-e.ga) + e.dgb[v] / (-e.gb) +
                          e.dgc[v] / (-e.gc) - 1.0 / xlo + 1.0 / xhi;
                diag[v] = t * e.d2phi[v] + e.hga[v] / (-e.ga) + e.hgb[v] / (-e.gb) +
                          1.0 / (xlo * xlo) + 1.0 / (xhi * xhi);
                diag[v] = std::max(diag[v], 1e-300);
                neg_grad[v] = -grad[v];
            }
            const std::vector<std::pair<double, const std::vector<double>*>> rank1 = {
                {1.0 / (e.ga * e.ga), &e.dga},
                {1.0 / (e.gb * e.gb), &e.dgb},
                {1.0 / (e.gc * e.gc), &e.dgc}};
            auto matvec = [&](std::span<const double> v, std::span<double> out) {
                for (int i = 0; i < n_; ++i) out[i] = diag[i] * v[i];
                for (const auto& [w, a] : rank1) {
                    double dot = 0;
                    for (int i = 0; i < n_; ++i) dot += (*a)[i] * v[i];
                    for (int i = 0; i < n_; ++i) out[i] += w * dot * (*a)[i];
                }
            };
            woodbury_solve(diag, rank1, neg_grad, step);
            // One round of iterative refinement; the stiff active-set metric
            // loses digits otherwise.
            {
                std::vector<double> hx(n_), resid(n_), corr(n_);
                matvec(step, hx);
                for (int v = 0; v < n_; ++v) resid[v] = neg_grad[v] - hx[v];
                woodbury_solve(diag, rank1, resid, corr);
                for (int v = 0; v < n_; ++v) step[v] += corr[v];
            }

            double decrement = 0;
            for (int v = 0; v < n_; ++v) decrement -= grad[v] * step[v];
            if (decrement / 2 < 1e-11) return;
            // Plateau at the fp noise floor: no further progress available.
            if (decrement < 0.5 * best_decrement) {
                best_decrement = decrement;
                since_improvement = 0;
            } else if (++since_improvement >= 8 && decrement < 1e-6) {
                return;
            }

            auto feasible = [&](std::span<const double> pt) {
                for (int v = 0; v < n_; ++v)
                    if (!(pt[v] > kXi && pt[v] < 1.0 - kXi)) return false;
                const Eval et = evaluate(pt);
                return et.ga < 0 && et.gb < 0 && et.gc < 0;
            };

            const double lambda = std::sqrt(std::max(decrement, 0.0));
            double alpha;
            bool moved = false;
            if (lambda <= 0.25) {
                // Damped Newton endgame: inside the quadratic-convergence
                // region the step needs no objective comparison, which would
                // drown in fp noise at large t anyway.
                alpha = 1.0 / (1.0 + lambda);
                for (int ls = 0; ls < 60 && !moved; ++ls) {
                    for (int v = 0; v < n_; ++v) trial[v] = x[v] + alpha * step[v];
                    if (feasible(trial)) {
                        x = trial;
                        moved = true;
                    } else {
                        alpha *= 0.5;
                    }
                }
            } else {
                // Backtracking line search keeping strict feasibility.
                const double h0 = barrier_value(evaluate_with_box(x), t, phi_ref);
                alpha = 1.0 / (1.0 + lambda);
                for (int ls = 0; ls < 60 && !moved; ++ls) {
                    for (int v = 0; v < n_; ++v) trial[v] = x[v] + alpha * step[v];
                    if (feasible(trial)) {
                        const Eval et = evaluate_with_box(trial);
                        if (barrier_value(et, t, phi_ref) <= h0 - 0.05 * alpha * decrement) {
                            x = trial;
                            moved = true;
                            break;
                        }
                    }
                    alpha *= 0.5;
                }
            }
            if (std::getenv("ISTN_SOLVER_DEBUG"))
                std::fprintf(stderr, "  t=%.3g iter=%d dec=%.3g alpha=%.3g moved=%d\n", t, iter,
                             decrement, alpha, (int)moved);
            if (!moved) return;
            // Repeated microscopic steps mean the fp noise floor is reached.
            stalled = alpha < 1e-6 ? stalled + 1 : 0;
            if (stalled >= 5) return;
        }
    }

    // evaluate() plus the box-barrier log sum cached for barrier_value().
    Eval evaluate_with_box(std::span<const double> x) {
        box_log_ = 0;
        for (int v = 0; v < n_; ++v)
            box_log_ += std::log(x[v] - kXi) + std::log((1.0 - kXi) - x[v]);
        return evaluate(x);
    }

    void verify_kkt(std::span<const double> x, double t) const {
        const Eval e = evaluate(x);
        double grad_scale = 1.0;
        for (int v = 0; v < n_; ++v) grad_scale = std::max(grad_scale, std::abs(e.dphi[v]));
        for (int v = 0; v < n_; ++v) {
            const double xlo = x[v] - kXi;
            const double xhi = (1.0 - kXi) - x[v];
            const double residual = e.dphi[v] + e.dga[v] / (t * (-e.ga)) +
                                    e.dgb[v] / (t * (-e.gb)) + e.dgc[v] / (t * (-e.gc)) -
                                    1.0 / (t * xlo) + 1.0 / (t * xhi);
            // Optimality is certified by the duality gap m/t; this pointwise
            // gate only catches genuinely broken derivatives. Tight pointwise
            // stationarity is out of reach in double precision once active
            // constraints make the barrier metric stiff.
            if (std::abs(residual) > 1e-4 * grad_scale)
                throw SolveError("inner solver did not reach stationarity (residual " +
                                 std::to_string(residual) + " at variable " + std::to_string(v) +
                                 ", x = " + std::to_string(x[v]) + ", scale " +
                                 std::to_string(grad_scale) + ")");
        }
    }

    const PuncturingProblem& p_;
    int n_ = 0;
    double q_ = 0;
    double rate_scale_ = 1;
    double f_const_ = 0;
    double box_log_ = 0;
    AffineG affine_;
};

double objective_value(std::span<const double> f, const PuncturingProblem& p) {
    double obj = 0;
    for (int v = 0; v < p.num_embb(); ++v) obj += embb_rate(p.b[v], f[v], p.gamma_embb[v]);
    return obj;
}

}  // namespace

std::vector<double> solve_surrogate(const PuncturingProblem& p, std::span<const double> f_prev) {
    p.validate();
    if (p.num_urllc() == 0) return std::vector<double>(p.num_embb(), 0.0);
    SurrogateSolver solver(p, f_prev);
    return solver.solve(f_prev);
}

namespace {

// Finds a strictly feasible start for the true constraint set, preferring the
// caller's point and falling back to a scan along f = s * b.
std::vector<double> restore_feasible_start(const PuncturingProblem& p,
                                           std::vector<double> f_init) {
    const int u1 = p.num_embb();
    const int u2 = p.num_urllc();
    const double q = p.outage_quantile();

    auto full = [&](std::span<const double> f_free) {
        std::vector<double> f(f_free.begin(), f_free.begin() + u2);
        f.resize(u1, 0.0);
        return f;
    };
    auto min_slack = [&](std::span<const double> f_free) {
        const auto f = full(f_free);
        const auto loads = cell_loads(f, p);
        double sumf = 0;
        for (int v = 0; v < u2; ++v) sumf += f[v];
        const double s1 = (loads.urllc_bps - q) / std::max(q, 1.0);
        const double s2 =
            (p.capacity_bps - loads.urllc_bps - loads.embb_bps) / p.capacity_bps;
        const double s3 = (p.bandwidth_hz - sumf) / p.bandwidth_hz;
        return std::min({s1, s2, s3});
    };

    std::vector<double> f_free(u2);
    for (int v = 0; v < u2; ++v)
        f_free[v] = std::clamp(f_init[v], 4 * kXi * p.b[v], (1.0 - 4 * kXi) * p.b[v]);
    if (min_slack(f_free) > 1e-9) return full(f_free);

    // Scan the puncturing ray, preferring the least puncturing that still has
    // workable slack; deep starts walk the surrogate into poor regions.
    double best_slack = -std::numeric_limits<double>::infinity();
    std::vector<double> best, smallest;
    for (int k = 0; k <= 240; ++k) {
        const double s = 1e-6 * std::pow(1.0 / 1e-6 * (1.0 - 1e-6), k / 240.0);
        std::vector<double> candidate(u2);
        for (int v = 0; v < u2; ++v) candidate[v] = s * p.b[v];
        const double slack = min_slack(candidate);
        if (slack > best_slack) {
            best_slack = slack;
            best = candidate;
        }
        if (smallest.empty() && slack > 1e-6) smallest = candidate;
    }
    if (!smallest.empty()) return full(smallest);
    if (best_slack <= 1e-9)
        throw SolveError(
            "infeasible at initialization: no strictly feasible puncturing found "
            "(worst slack " +
            std::to_string(best_slack) + ")");
    return full(best);
}

}  // namespace

PuncturingSolution sca_solve(const PuncturingProblem& p, const ScaOptions& opts) {
    p.validate();
    const int u1 = p.num_embb();
    const int u2 = p.num_urllc();

    PuncturingSolution sol;
    if (u2 == 0) {
        sol.f_star.assign(u1, 0.0);
        const auto loads = cell_loads(sol.f_star, p);
        sol.l_embb_star = loads.embb_bps;
        sol.l_urllc_star = loads.urllc_bps;
        sol.objective_trace = {loads.embb_bps};
        sol.iterations = 0;
        sol.converged = true;
        return sol;
    }

    double min_b = p.b[0];
    for (double bv : p.b) min_b = std::min(min_b, bv);
    const double eps_error = opts.epsilon_error > 0 ? opts.epsilon_error : 1e-3 * min_b;

    std::vector<double> f_init = opts.f_init;
    if (f_init.empty()) {
        f_init.resize(u1, 0.0);
        for (int v = 0; v < u2; ++v) f_init[v] = 0.1 * p.b[v];
    }
    if (static_cast<int>(f_init.size()) < u2) throw SolveError("f_init too short");
    f_init.resize(u1, 0.0);

    std::vector<double> f_prev = restore_feasible_start(p, f_init);
    const double q = p.outage_quantile();

    double best_objective = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < opts.max_iter; ++k) {
        const std::vector<double> f_next = solve_surrogate(p, f_prev);

        const double objective = objective_value(f_next, p);
        const auto loads = cell_loads(f_next, p);
        double max_step = 0, sumf = 0;
        for (int v = 0; v < u2; ++v) {
            max_step = std::max(max_step, std::abs(f_next[v] - f_prev[v]));
            sumf += f_next[v];
        }
        sol.objective_trace.push_back(objective);
        if (opts.keep_iterates) sol.iterate_trace.push_back(f_next);
        sol.trace_rows.push_back({k, objective, max_step, loads.urllc_bps - q,
                                  p.capacity_bps - loads.urllc_bps - loads.embb_bps,
                                  p.bandwidth_hz - sumf});

        if (objective >= best_objective) {
            best_objective = objective;
            sol.f_star = f_next;
            sol.l_embb_star = loads.embb_bps;
            sol.l_urllc_star = loads.urllc_bps;
        }
        sol.iterations = k + 1;
        if (max_step < eps_error) {
            sol.converged = true;
            break;
        }
        f_prev = f_next;
    }
    return sol;
}

void write_solver_trace_csv(const std::string& path, const std::vector<ScaIterRow>& rows) {
    std::ofstream out(path);
    if (!out) throw SolveError("cannot write solver trace '" + path + "'");
    out << "iteration,objective_bps,max_step_hz,outage_slack_bps,capacity_slack_bps,"
           "bandwidth_slack_hz\n";
    char line[192];
    for (const auto& r : rows) {
        std::snprintf(line, sizeof line, "%d,%.9g,%.9g,%.9g,%.9g,%.9g\n", r.iteration,
                      r.objective_bps, r.max_step_hz, r.outage_slack_bps, r.capacity_slack_bps,
                      r.bandwidth_slack_hz);
        out << line;
    }
}

double bandwidth_for_rate(double target_bps, double gamma_hz) {
    if (!(target_bps > 0)) throw SolveError("target rate must be positive");
    if (!(gamma_hz > 0)) throw SolveError("gamma must be positive");
    const double ceiling = gamma_hz / kLn2;
    if (target_bps >= ceiling * (1.0 - 1e-12))
        throw SolveError("target rate exceeds the channel ceiling gamma*log2(e)");
    double hi = std::max(target_bps / 40.0, 1e-9);
    while (Term::u(hi, gamma_hz) < target_bps) hi *= 2.0;
    double lo = 0.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = lo + (hi - lo) / 2;
        if (Term::u(mid, gamma_hz) < target_bps)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= 1e-13 * hi) break;
    }
    return hi;
}

}  // namespace istn
