#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "istn/rng.hpp"

namespace istn {

struct TrafficError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class TrafficClass : std::uint8_t { Embb, Urllc };

struct PacketArrival {
    double time_s = 0;
    std::int64_t size_bits = 0;
    TrafficClass cls = TrafficClass::Embb;
    int sbs = 0;
};

/// One slot of offered demand.
struct DemandSample {
    int slot_index = 0;
    double embb_bps = 0;
    double urllc_bps = 0;
};

/// Pareto inverse CDF: the sample hit by uniform u in [0,1).
double pareto_from_uniform(double u, double a, double x_m);

/// (1 - epsilon)-quantile of Pareto(a, x_m): x_m / epsilon^(1/a).
/// Domain epsilon in (0, 1]; epsilon = 1 returns the support edge x_m.
double pareto_quantile(double epsilon, double a, double x_m);

/// E[min(D, cap)] for D ~ Pareto(a, x_m).
double pareto_truncated_mean(double a, double x_m, double cap);

/// Poisson packet stream at the given bit rate; inter-arrivals are
/// exponential with mean packet_bits / rate_bps. Empty stream at rate 0.
std::vector<PacketArrival> gen_embb_stream(double rate_bps, double packet_bits,
                                           double horizon_s, Rng& rng);

/// Per-slot offered URLLC rates: i.i.d. Pareto(a, x_m) draws capped at cap.
std::vector<double> gen_urllc_demand(double a, double x_m, int num_slots, double cap_bps,
                                     Rng& rng);

/// floor(rate * slot / size) packets spread evenly over the slot.
std::vector<PacketArrival> packetize_slot(double rate_bps, double packet_bits,
                                          double slot_start_s, double slot_len_s,
                                          TrafficClass cls);

/// Pull-based arrival source; packets come out in non-decreasing time order.
class ArrivalGen {
public:
    virtual ~ArrivalGen() = default;
    virtual bool next(PacketArrival& out) = 0;
    /// Demand generated but not admitted (admission control), restricted to
    /// arrivals at or after the accounting start time.
    virtual std::int64_t blocked_packets() const { return 0; }
    virtual std::int64_t blocked_bits() const { return 0; }
};

class PoissonArrivals final : public ArrivalGen {
public:
    PoissonArrivals(double rate_bps, double packet_bits, double horizon_s, TrafficClass cls,
                    std::uint64_t seed);
    bool next(PacketArrival& out) override;

private:
    double mean_gap_s_;
    double horizon_s_;
    double next_time_;
    std::int64_t packet_bits_;
    TrafficClass cls_;
    Rng rng_;
};

/// Slot-modulated URLLC source: each 1 s slot draws an offered rate from
/// Pareto(a, x_m) capped at truncate_bps, admits up to admit_bps of it and
/// realizes the admitted rate as evenly spaced packets.
class SlottedParetoArrivals final : public ArrivalGen {
public:
    SlottedParetoArrivals(double a, double x_m, double truncate_bps, double admit_bps,
                          double packet_bits, double horizon_s, double accounting_start_s,
                          std::uint64_t seed);
    bool next(PacketArrival& out) override;
    std::int64_t blocked_packets() const override { return blocked_packets_; }
    std::int64_t blocked_bits() const override { return blocked_bits_; }

private:
    void fill_slot();

    double a_, x_m_, truncate_bps_, admit_bps_;
    std::int64_t packet_bits_;
    double horizon_s_, accounting_start_s_;
    int slot_ = 0;
    int in_slot_ = 0;
    int slot_count_ = 0;
    double slot_gap_s_ = 0;
    std::int64_t blocked_packets_ = 0;
    std::int64_t blocked_bits_ = 0;
    Rng rng_;
};

void write_trace_csv(const std::string& path, const std::vector<PacketArrival>& packets);

}  // namespace istn
