#include "istn/queueing.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace istn {

double compose_load(double l_embb_bps, double l_urllc_bps, double beta, double capacity_bps,
                    QueueMode mode) {
    if (!(capacity_bps > 0)) throw QueueingError("capacity must be positive");
    const double embb = mode == QueueMode::Istn ? (1.0 - beta) * l_embb_bps : l_embb_bps;
    return (embb + l_urllc_bps) / capacity_bps;
}

double mean_waiting_time(double rho, double mu) {
    if (!(mu > 0)) throw QueueingError("service rate must be positive");
    if (!(rho >= 0 && rho < 1)) throw QueueingError("unstable queue: rho must lie in [0,1)");
    return rho / (mu * (1.0 - rho));
}

double WaitingPdf::density(double t) const {
    if (t < 0) return 0;
    return (1.0 - rho) * lambda * std::exp(-(mu - lambda) * t);
}

WaitingPdf waiting_pdf(double rho, double lambda, double mu) {
    if (!(mu > 0)) throw QueueingError("service rate must be positive");
    if (!(rho >= 0 && rho < 1)) throw QueueingError("unstable queue: rho must lie in [0,1)");
    return {1.0 - rho, rho, lambda, mu};
}

double sojourn_cdf(double x, double lambda, double mu) {
    if (!(mu > lambda)) throw QueueingError("unstable queue: mu must exceed lambda");
    if (x < 0) return 0;
    return -std::expm1(-(mu - lambda) * x);
}

double sojourn_density(double t, double lambda, double mu) {
    if (!(mu > lambda)) throw QueueingError("unstable queue: mu must exceed lambda");
    if (t < 0) return 0;
    return (mu - lambda) * std::exp(-(mu - lambda) * t);
}

AnalyticDelay analytic_delay(double lambda_pkts, double mu_pkts) {
    if (!(mu_pkts > 0)) throw QueueingError("service rate must be positive");
    if (lambda_pkts < 0) throw QueueingError("arrival rate must be non-negative");
    AnalyticDelay d;
    d.lambda = lambda_pkts;
    d.mu = mu_pkts;
    d.rho = lambda_pkts / mu_pkts;
    d.mean_wait_s = mean_waiting_time(d.rho, mu_pkts);
    d.mean_sojourn_s = d.mean_wait_s + 1.0 / mu_pkts;
    return d;
}

double mean_service_rate(double capacity_bps, double embb_pkt_rate, double embb_bits,
                         double urllc_pkt_rate, double urllc_bits, bool embb_only) {
    if (!(capacity_bps > 0)) throw QueueingError("capacity must be positive");
    if (embb_only) return capacity_bps / embb_bits;
    const double pkt_rate = embb_pkt_rate + urllc_pkt_rate;
    if (!(pkt_rate > 0)) throw QueueingError("no traffic: mean packet size undefined");
    const double mean_bits =
        (embb_pkt_rate * embb_bits + urllc_pkt_rate * urllc_bits) / pkt_rate;
    return capacity_bps / mean_bits;
}

void write_delay_table_csv(const std::string& path, const AnalyticDelay& delay, int points) {
    std::ofstream out(path);
    if (!out) throw QueueingError("cannot write delay table '" + path + "'");
    out << "t_s,cdf,pdf\n";
    const double span = 12.0 / (delay.mu - delay.lambda);  // out to ~1-1e-5 of the mass
    char line[96];
    for (int i = 0; i <= points; ++i) {
        const double t = span * i / points;
        std::snprintf(line, sizeof line, "%.9g,%.9g,%.9g\n", t, delay.cdf(t),
                      sojourn_density(t, delay.lambda, delay.mu));
        out << line;
    }
}

}  // namespace istn
