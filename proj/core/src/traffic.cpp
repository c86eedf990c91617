#include "istn/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace istn {

double pareto_from_uniform(double u, double a, double x_m) {
    if (!(a > 0) || !(x_m > 0)) throw TrafficError("Pareto parameters must be positive");
    if (!(u >= 0 && u < 1)) throw TrafficError("uniform variate must lie in [0,1)");
    return x_m * std::pow(1.0 - u, -1.0 / a);
}

double pareto_quantile(double epsilon, double a, double x_m) {
    if (!(a > 0) || !(x_m > 0)) throw TrafficError("Pareto parameters must be positive");
    if (!(epsilon > 0 && epsilon <= 1))
        throw TrafficError("epsilon must lie in (0,1]");
    return x_m * std::pow(epsilon, -1.0 / a);
}

double pareto_truncated_mean(double a, double x_m, double cap) {
    if (!(a > 0) || !(x_m > 0)) throw TrafficError("Pareto parameters must be positive");
    if (cap <= x_m) return std::max(cap, 0.0);
    if (std::abs(a - 1.0) < 1e-12) return x_m * (1.0 + std::log(cap / x_m));
    return x_m + (std::pow(x_m, a) * std::pow(cap, 1.0 - a) - x_m) / (1.0 - a);
}

std::vector<PacketArrival> gen_embb_stream(double rate_bps, double packet_bits,
                                           double horizon_s, Rng& rng) {
    if (rate_bps < 0) throw TrafficError("rate must be non-negative");
    if (!(packet_bits > 0)) throw TrafficError("packet size must be positive");
    if (!(horizon_s > 0)) throw TrafficError("horizon must be positive");
    std::vector<PacketArrival> out;
    if (rate_bps == 0) return out;
    const double mean_gap = packet_bits / rate_bps;
    out.reserve(static_cast<std::size_t>(horizon_s / mean_gap * 1.1) + 16);
    const auto bits = static_cast<std::int64_t>(std::llround(packet_bits));
    double t = rng.exponential(mean_gap);
    while (t < horizon_s) {
        out.push_back({t, bits, TrafficClass::Embb, 0});
        t += rng.exponential(mean_gap);
    }
    return out;
}

std::vector<double> gen_urllc_demand(double a, double x_m, int num_slots, double cap_bps,
                                     Rng& rng) {
    if (cap_bps <= x_m) throw TrafficError("cap must exceed x_m");
    std::vector<double> out;
    out.reserve(num_slots);
    for (int i = 0; i < num_slots; ++i)
        out.push_back(std::min(rng.pareto(a, x_m), cap_bps));
    return out;
}

std::vector<PacketArrival> packetize_slot(double rate_bps, double packet_bits,
                                          double slot_start_s, double slot_len_s,
                                          TrafficClass cls) {
    std::vector<PacketArrival> out;
    const auto n = static_cast<int>(std::floor(rate_bps * slot_len_s / packet_bits));
    if (n <= 0) return out;
    out.reserve(n);
    const auto bits = static_cast<std::int64_t>(std::llround(packet_bits));
    for (int k = 0; k < n; ++k)
        out.push_back({slot_start_s + (k + 0.5) * slot_len_s / n, bits, cls, 0});
    return out;
}

PoissonArrivals::PoissonArrivals(double rate_bps, double packet_bits, double horizon_s,
                                 TrafficClass cls, std::uint64_t seed)
    : mean_gap_s_(rate_bps > 0 ? packet_bits / rate_bps : 0),
      horizon_s_(horizon_s),
      next_time_(horizon_s),  // rate 0: exhausted immediately
      packet_bits_(static_cast<std::int64_t>(std::llround(packet_bits))),
      cls_(cls),
      rng_(seed) {
    if (rate_bps > 0) next_time_ = rng_.exponential(mean_gap_s_);
}

bool PoissonArrivals::next(PacketArrival& out) {
    if (next_time_ >= horizon_s_) return false;
    out = {next_time_, packet_bits_, cls_, 0};
    next_time_ += rng_.exponential(mean_gap_s_);
    return true;
}

SlottedParetoArrivals::SlottedParetoArrivals(double a, double x_m, double truncate_bps,
                                             double admit_bps, double packet_bits,
                                             double horizon_s, double accounting_start_s,
                                             std::uint64_t seed)
    : a_(a),
      x_m_(x_m),
      truncate_bps_(truncate_bps),
      admit_bps_(admit_bps),
      packet_bits_(static_cast<std::int64_t>(std::llround(packet_bits))),
      horizon_s_(horizon_s),
      accounting_start_s_(accounting_start_s),
      rng_(seed) {
    fill_slot();
}

void SlottedParetoArrivals::fill_slot() {
    constexpr double kSlotLen = 1.0;
    in_slot_ = 0;
    slot_count_ = 0;
    while (slot_ * kSlotLen < horizon_s_ && slot_count_ == 0) {
        const double offered = std::min(rng_.pareto(a_, x_m_), truncate_bps_);
        const double admitted = std::min(offered, admit_bps_);
        const auto n_offered = static_cast<int>(std::floor(offered * kSlotLen / packet_bits_));
        const auto n_admitted =
            std::min(n_offered, static_cast<int>(std::floor(admitted * kSlotLen / packet_bits_)));
        if (slot_ * kSlotLen >= accounting_start_s_) {
            blocked_packets_ += n_offered - n_admitted;
            blocked_bits_ += static_cast<std::int64_t>(n_offered - n_admitted) * packet_bits_;
        }
        slot_count_ = n_admitted;
        slot_gap_s_ = n_admitted > 0 ? kSlotLen / n_admitted : 0;
        if (slot_count_ == 0) ++slot_;
    }
}

bool SlottedParetoArrivals::next(PacketArrival& out) {
    if (slot_ >= horizon_s_) return false;
    if (in_slot_ >= slot_count_) return false;
    out = {slot_ + (in_slot_ + 0.5) * slot_gap_s_, packet_bits_, TrafficClass::Urllc, 0};
    ++in_slot_;
    if (in_slot_ >= slot_count_) {
        ++slot_;
        fill_slot();
    }
    return true;
}

void write_trace_csv(const std::string& path, const std::vector<PacketArrival>& packets) {
    std::ofstream out(path);
    if (!out) throw TrafficError("cannot write trace file '" + path + "'");
    out << "time_s,class,size_bits,sbs\n";
    char line[96];
    for (const auto& p : packets) {
        std::snprintf(line, sizeof line, "%.9g,%s,%lld,%d\n", p.time_s,
                      p.cls == TrafficClass::Embb ? "eMBB" : "URLLC",
                      static_cast<long long>(p.size_bits), p.sbs);
        out << line;
    }
}

}  // namespace istn
