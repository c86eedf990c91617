#pragma once

#include <stdexcept>
#include <string>

namespace istn {

struct QueueingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class QueueMode { Istn, Terrestrial };

struct QueueParams {
    double lambda_pkts = 0;  // total packet arrival rate, /s
    double mu_pkts = 0;      // service rate, /s
    double rho = 0;          // lambda / mu
    QueueMode mode = QueueMode::Istn;
};

/// Backhaul utilization: (L_e + L_u)/C terrestrial, ((1-beta)L_e + L_u)/C in
/// the integrated network. May exceed 1; the delay formulas reject that.
double compose_load(double l_embb_bps, double l_urllc_bps, double beta, double capacity_bps,
                    QueueMode mode);

/// Mean queueing delay rho / (mu (1 - rho)) under the exponential
/// residual-service approximation.
double mean_waiting_time(double rho, double mu);

/// Queueing-delay distribution: an atom of mass 1 - rho at zero plus the
/// density (1 - rho) lambda e^{-(mu-lambda) t}.
struct WaitingPdf {
    double atom_at_zero = 0;
    double rho = 0, lambda = 0, mu = 0;
    double density(double t) const;
};

WaitingPdf waiting_pdf(double rho, double lambda, double mu);

/// Sojourn-time CDF 1 - e^{-(mu-lambda) x}.
double sojourn_cdf(double x, double lambda, double mu);
double sojourn_density(double t, double lambda, double mu);

struct AnalyticDelay {
    double lambda = 0, mu = 0, rho = 0;
    double mean_wait_s = 0;
    double mean_sojourn_s = 0;
    double cdf(double x) const { return sojourn_cdf(x, lambda, mu); }
};

AnalyticDelay analytic_delay(double lambda_pkts, double mu_pkts);

/// Service rate mu = C / mean packet size; the mean is taken over the
/// arrival mix (packet-rate weighted) or over eMBB packets only.
double mean_service_rate(double capacity_bps, double embb_pkt_rate, double embb_bits,
                         double urllc_pkt_rate, double urllc_bits, bool embb_only = false);

/// Sojourn CDF/PDF table on a log-ish grid out to the tail.
void write_delay_table_csv(const std::string& path, const AnalyticDelay& delay, int points = 512);

}  // namespace istn
