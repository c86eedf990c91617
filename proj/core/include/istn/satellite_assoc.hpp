#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "istn/scenario.hpp"
#include "istn/terrestrial_alloc.hpp"

namespace istn {

/// Satellite association instance over N small base stations.
struct AssociationProblem {
    std::vector<double> l_embb_star;   // eMBB loads, bits/s
    std::vector<double> l_urllc_star;  // URLLC loads, bits/s (priority key)
    std::vector<double> weights;       // omega, sums to 1
    double beam_bandwidth_hz = 0;      // W
    double carrier_to_noise_db = 0;
    CnInterpretation cn_interpretation = CnInterpretation::CarrierToNoise;
    double sat_capacity_bps = 0;       // C_Sat

    int size() const { return static_cast<int>(l_embb_star.size()); }
    double cn_linear_value() const { return std::pow(10.0, carrier_to_noise_db / 10.0); }
    void validate() const;
};

struct AssociationSolution {
    std::vector<double> alpha;          // satellite bandwidth shares, sum to 1
    std::vector<double> beta;           // offloaded eMBB fractions
    std::vector<double> offloaded_bps;  // beta_i * L_e_i
};

/// Achievable satellite downlink rate on an alpha-share of the beam, capped
/// at the satellite capacity. Zero at alpha = 0 (continuous limit).
double sat_rate(double alpha, double beam_bandwidth_hz, double cn_linear,
                double sat_capacity_bps,
                CnInterpretation interp = CnInterpretation::CarrierToNoise);

/// Priority indicator: 1 iff l_u_i <= l_u_j. Activates the pairwise ordering
/// constraints alpha_i <= alpha_j, beta_i <= beta_j.
int priority_delta(double l_u_i, double l_u_j);

/// Weighted-sum association: maximizes sum_i omega_i beta_i L_e_i subject to
/// per-SBS satellite rate limits, total satellite capacity, URLLC priority
/// ordering, the bandwidth simplex and box bounds. Deterministic.
AssociationSolution solve_association(const AssociationProblem& p);

/// (1 - beta_i) * L_e_i componentwise.
std::vector<double> terrestrial_residual_load(std::span<const double> beta,
                                              std::span<const double> l_embb_star);

void write_association_csv(const std::string& path, const AssociationSolution& sol,
                           std::span<const double> l_embb_star);

}  // namespace istn
