#pragma once

// Small dense SPD helpers shared by the interior-point solvers.

#include <cmath>
#include <span>
#include <vector>

namespace istn::detail {

class Cholesky {
public:
    /// Factors an SPD matrix (row-major n x n). Returns false if not PD.
    bool factor(std::vector<double> a, int n) {
        n_ = n;
        l_ = std::move(a);
        for (int j = 0; j < n; ++j) {
            double d = l_[j * n + j];
            for (int k = 0; k < j; ++k) d -= l_[j * n + k] * l_[j * n + k];
            if (!(d > 0)) return false;
            d = std::sqrt(d);
            l_[j * n + j] = d;
            for (int i = j + 1; i < n; ++i) {
                double s = l_[i * n + j];
                for (int k = 0; k < j; ++k) s -= l_[i * n + k] * l_[j * n + k];
                l_[i * n + j] = s / d;
            }
        }
        return true;
    }

    void solve(std::span<const double> rhs, std::span<double> x) const {
        const int n = n_;
        for (int i = 0; i < n; ++i) {
            double s = rhs[i];
            for (int k = 0; k < i; ++k) s -= l_[i * n + k] * x[k];
            x[i] = s / l_[i * n + i];
        }
        for (int i = n - 1; i >= 0; --i) {
            double s = x[i];
            for (int k = i + 1; k < n; ++k) s -= l_[k * n + i] * x[k];
            x[i] = s / l_[i * n + i];
        }
    }

private:
    int n_ = 0;
    std::vector<double> l_;
};

/// Factors H with escalating diagonal jitter until it is PD.
inline Cholesky factor_with_jitter(std::vector<double> h, int n) {
    Cholesky chol;
    double trace = 0;
    for (int i = 0; i < n; ++i) trace += h[i * n + i];
    double jitter = 0;
    for (int attempt = 0; attempt < 12; ++attempt) {
        std::vector<double> a = h;
        if (jitter > 0)
            for (int i = 0; i < n; ++i) a[i * n + i] += jitter;
        if (chol.factor(std::move(a), n)) return chol;
        jitter = jitter == 0 ? 1e-14 * std::max(trace / n, 1.0) : jitter * 100;
    }
    // Degenerate fallback: identity, turning the step into plain descent.
    std::vector<double> eye(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) eye[i * n + i] = 1.0;
    chol.factor(std::move(eye), n);
    return chol;
}

}  // namespace istn::detail
