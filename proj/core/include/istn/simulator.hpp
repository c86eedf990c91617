#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "istn/satellite_assoc.hpp"
#include "istn/scenario.hpp"
#include "istn/terrestrial_alloc.hpp"
#include "istn/traffic.hpp"

namespace istn {

struct SimError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Equivalent terrestrial-only capacity C_Ter + C_Sat / N used by the
/// benchmark network.
double benchmark_capacity(double c_ter_bps, double c_sat_bps, int num_sbs);

enum class EventKind : std::uint8_t { Arrival, Departure };

struct QueueEvent {
    double time_s = 0;
    EventKind kind = EventKind::Arrival;
    std::uint64_t sequence = 0;  // insertion order
};

/// Event ordering: non-decreasing time, arrivals before departures on ties,
/// then insertion order.
inline bool event_precedes(const QueueEvent& a, const QueueEvent& b) {
    if (a.time_s != b.time_s) return a.time_s < b.time_s;
    if (a.kind != b.kind) return a.kind == EventKind::Arrival;
    return a.sequence < b.sequence;
}

/// Admission cap on offered URLLC rate: min(offered, capacity).
double admit_urllc(double offered_bps, double capacity_bps);

struct ClassCounters {
    std::int64_t offered_pkts = 0, offered_bits = 0;
    std::int64_t delivered_pkts = 0, delivered_bits = 0;
    std::int64_t dropped_pkts = 0, dropped_bits = 0;  // queue overload drops
    std::int64_t blocked_pkts = 0, blocked_bits = 0;  // admission control
};

struct SimMetrics {
    double mean_urllc_delay_s = 0;   // mean queueing delay of delivered URLLC packets
    double mean_wait_s = 0;          // all classes
    double mean_sojourn_s = 0;       // all classes
    std::int64_t dropped_embb_bits = 0;
    double availability = 1.0;       // delivered bits / offered bits
    std::vector<double> delay_samples;  // sojourn times, stride-subsampled
    ClassCounters embb, urllc;

    void merge(const SimMetrics& other);
};

struct QueueSimConfig {
    double capacity_bps = 0;
    double horizon_s = 0;
    double warmup_s = 0;
    double drop_threshold_bits = 0;    // <= 0: no eMBB dropping
    bool exponential_service = false;
    double service_mean_bits = 0;      // exponential mode: mean packet size
    std::uint64_t service_seed = 0;
    int sample_stride = 1;
};

/// Single FCFS server fed by time-merged arrival streams. Arrivals past the
/// horizon are ignored; whatever is queued at the horizon is drained so the
/// bit accounting closes exactly.
SimMetrics simulate_queue(std::vector<std::unique_ptr<ArrivalGen>> streams,
                          const QueueSimConfig& cfg);

/// Scenario-level run: per-cell backhaul queues with the mode's capacity,
/// residual eMBB rate and URLLC admission, metrics pooled over cells.
SimMetrics run_sim(const Scenario& scenario, const std::vector<PuncturingSolution>& cells,
                   const AssociationSolution* association, NetworkMode mode,
                   std::uint64_t seed, const std::optional<SimConfig>& sim_override = {});

/// Single-class M/M/1 run used to calibrate the queue against closed forms.
SimMetrics run_mm1(double lambda_pkts, double mu_pkts, std::int64_t num_packets,
                   std::uint64_t seed);

struct EcdfPoint {
    double x = 0;
    double p = 0;
};

/// Right-continuous empirical CDF, one point per sorted sample.
std::vector<EcdfPoint> empirical_cdf(std::vector<double> samples);
double ecdf_value(const std::vector<EcdfPoint>& cdf, double x);

/// One-sample Kolmogorov-Smirnov distance against a model CDF.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);

}  // namespace istn
