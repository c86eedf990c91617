#include "istn/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "istn/queueing.hpp"

namespace istn {

double benchmark_capacity(double c_ter_bps, double c_sat_bps, int num_sbs) {
    if (num_sbs < 1) throw SimError("benchmark capacity needs at least one SBS");
    return c_ter_bps + c_sat_bps / num_sbs;
}

double admit_urllc(double offered_bps, double capacity_bps) {
    return std::min(offered_bps, std::max(capacity_bps, 0.0));
}

void SimMetrics::merge(const SimMetrics& other) {
    auto merge_counters = [](ClassCounters& a, const ClassCounters& b) {
        a.offered_pkts += b.offered_pkts;
        a.offered_bits += b.offered_bits;
        a.delivered_pkts += b.delivered_pkts;
        a.delivered_bits += b.delivered_bits;
        a.dropped_pkts += b.dropped_pkts;
        a.dropped_bits += b.dropped_bits;
        a.blocked_pkts += b.blocked_pkts;
        a.blocked_bits += b.blocked_bits;
    };
    auto pooled = [](double ma, std::int64_t na, double mb, std::int64_t nb) {
        const std::int64_t n = na + nb;
        return n > 0 ? (ma * na + mb * nb) / n : 0.0;
    };
    const std::int64_t mine = embb.delivered_pkts + urllc.delivered_pkts;
    const std::int64_t theirs = other.embb.delivered_pkts + other.urllc.delivered_pkts;
    mean_urllc_delay_s = pooled(mean_urllc_delay_s, urllc.delivered_pkts,
                                other.mean_urllc_delay_s, other.urllc.delivered_pkts);
    mean_wait_s = pooled(mean_wait_s, mine, other.mean_wait_s, theirs);
    mean_sojourn_s = pooled(mean_sojourn_s, mine, other.mean_sojourn_s, theirs);
    merge_counters(embb, other.embb);
    merge_counters(urllc, other.urllc);
    dropped_embb_bits = embb.dropped_bits;
    delay_samples.insert(delay_samples.end(), other.delay_samples.begin(),
                         other.delay_samples.end());
    const std::int64_t offered = embb.offered_bits + urllc.offered_bits;
    const std::int64_t delivered = embb.delivered_bits + urllc.delivered_bits;
    availability = offered > 0 ? static_cast<double>(delivered) / offered : 1.0;
}

namespace {

struct Pending {
    double arrive = 0;
    std::int64_t bits = 0;
    TrafficClass cls = TrafficClass::Embb;
    bool counted = false;  // arrived after warm-up
};

// Pulls the earliest head among the streams.
class MergedArrivals {
public:
    explicit MergedArrivals(std::vector<std::unique_ptr<ArrivalGen>> streams)
        : streams_(std::move(streams)) {
        heads_.resize(streams_.size());
        alive_.resize(streams_.size());
        for (std::size_t i = 0; i < streams_.size(); ++i)
            alive_[i] = streams_[i]->next(heads_[i]);
    }

    bool next(PacketArrival& out) {
        int best = -1;
        for (std::size_t i = 0; i < streams_.size(); ++i)
            if (alive_[i] && (best < 0 || heads_[i].time_s < heads_[best].time_s))
                best = static_cast<int>(i);
        if (best < 0) return false;
        out = heads_[best];
        alive_[best] = streams_[best]->next(heads_[best]);
        return true;
    }

    const std::vector<std::unique_ptr<ArrivalGen>>& streams() const { return streams_; }

private:
    std::vector<std::unique_ptr<ArrivalGen>> streams_;
    std::vector<PacketArrival> heads_;
    std::vector<char> alive_;
};

}  // namespace

SimMetrics simulate_queue(std::vector<std::unique_ptr<ArrivalGen>> streams,
                          const QueueSimConfig& cfg) {
    if (!(cfg.capacity_bps > 0)) throw SimError("capacity must be positive");
    if (!(cfg.horizon_s > 0)) throw SimError("horizon must be positive");

    MergedArrivals merged(std::move(streams));
    Rng service_rng(cfg.service_seed);

    SimMetrics m;
    std::deque<Pending> queue;
    std::int64_t queued_bits = 0;       // bits awaiting service, in-service excluded
    double server_free = 0;             // time the server finishes its current packet
    bool busy = false;
    double in_service_arrive = 0;
    std::int64_t in_service_bits = 0;
    TrafficClass in_service_cls = TrafficClass::Embb;
    bool in_service_counted = false;
    double in_service_start = 0;

    double wait_sum = 0, sojourn_sum = 0, urllc_wait_sum = 0;
    std::int64_t delivered_counted = 0;
    const int stride = std::max(cfg.sample_stride, 1);

    auto service_time = [&](std::int64_t bits) {
        if (cfg.exponential_service)
            return service_rng.exponential(cfg.service_mean_bits / cfg.capacity_bps);
        return static_cast<double>(bits) / cfg.capacity_bps;
    };

    auto finish_packet = [&](double depart) {
        if (in_service_counted) {
            auto& c = in_service_cls == TrafficClass::Embb ? m.embb : m.urllc;
            c.delivered_pkts += 1;
            c.delivered_bits += in_service_bits;
            const double wait = in_service_start - in_service_arrive;
            const double sojourn = depart - in_service_arrive;
            wait_sum += wait;
            sojourn_sum += sojourn;
            if (in_service_cls == TrafficClass::Urllc) urllc_wait_sum += wait;
            if (delivered_counted % stride == 0) m.delay_samples.push_back(sojourn);
            ++delivered_counted;
        }
    };

    auto start_next = [&](double now) {
        busy = false;
        if (queue.empty()) return;
        const Pending p = queue.front();
        queue.pop_front();
        queued_bits -= p.bits;
        busy = true;
        in_service_arrive = p.arrive;
        in_service_bits = p.bits;
        in_service_cls = p.cls;
        in_service_counted = p.counted;
        in_service_start = now;
        server_free = now + service_time(p.bits);
    };

    PacketArrival a;
    std::uint64_t sequence = 0;
    while (merged.next(a)) {
        if (a.time_s >= cfg.horizon_s) break;
        // Run departures that precede this arrival (arrivals win ties).
        const QueueEvent arrival_event{a.time_s, EventKind::Arrival, sequence++};
        while (busy &&
               event_precedes({server_free, EventKind::Departure, sequence}, arrival_event)) {
            const double depart = server_free;
            finish_packet(depart);
            start_next(depart);
        }
        const bool counted = a.time_s >= cfg.warmup_s;
        auto& c = a.cls == TrafficClass::Embb ? m.embb : m.urllc;
        if (counted) {
            c.offered_pkts += 1;
            c.offered_bits += a.size_bits;
        }
        if (a.cls == TrafficClass::Embb && cfg.drop_threshold_bits > 0 &&
            queued_bits > static_cast<std::int64_t>(cfg.drop_threshold_bits)) {
            if (counted) {
                c.dropped_pkts += 1;
                c.dropped_bits += a.size_bits;
            }
            continue;
        }
        queue.push_back({a.time_s, a.size_bits, a.cls, counted});
        queued_bits += a.size_bits;
        if (!busy) start_next(a.time_s);
    }
    // Drain: no new arrivals, serve everything left.
    while (busy) {
        const double depart = server_free;
        finish_packet(depart);
        start_next(depart);
    }

    // Admission-control blocking accumulated inside the generators.
    for (const auto& s : merged.streams()) {
        m.urllc.blocked_pkts += s->blocked_packets();
        m.urllc.blocked_bits += s->blocked_bits();
    }
    m.urllc.offered_pkts += m.urllc.blocked_pkts;
    m.urllc.offered_bits += m.urllc.blocked_bits;

    const std::int64_t delivered = m.embb.delivered_pkts + m.urllc.delivered_pkts;
    m.mean_wait_s = delivered > 0 ? wait_sum / delivered : 0.0;
    m.mean_sojourn_s = delivered > 0 ? sojourn_sum / delivered : 0.0;
    m.mean_urllc_delay_s =
        m.urllc.delivered_pkts > 0 ? urllc_wait_sum / m.urllc.delivered_pkts : 0.0;
    m.dropped_embb_bits = m.embb.dropped_bits;
    const std::int64_t offered = m.embb.offered_bits + m.urllc.offered_bits;
    const std::int64_t delivered_bits = m.embb.delivered_bits + m.urllc.delivered_bits;
    m.availability = offered > 0 ? static_cast<double>(delivered_bits) / offered : 1.0;
    return m;
}

SimMetrics run_sim(const Scenario& scenario, const std::vector<PuncturingSolution>& cells,
                   const AssociationSolution* association, NetworkMode mode,
                   std::uint64_t seed, const std::optional<SimConfig>& sim_override) {
    const SimConfig sim = sim_override.value_or(scenario.sim);
    const auto& t = scenario.terrestrial;
    const int n = t.num_sbs;
    if (static_cast<int>(cells.size()) != n) throw SimError("one puncturing solution per cell required");
    if (mode == NetworkMode::Istn && association == nullptr)
        throw SimError("ISTN mode requires an association solution");

    const double c_bench = benchmark_capacity(t.backhaul_capacity_bps,
                                              scenario.constellation.sat_capacity_bps, n);
    const double capacity =
        mode == NetworkMode::Istn ? t.backhaul_capacity_bps : c_bench;
    const double warmup = sim.warmup_fraction * sim.horizon_s;
    const int sim_cells = sim.sim_cells > 0 ? std::min(sim.sim_cells, n) : n;

    // Stride keeps the pooled sample count near the target without making
    // sampling data-dependent.
    double expected = 0;
    for (int i = 0; i < sim_cells; ++i) {
        const double beta =
            mode == NetworkMode::Istn && association ? association->beta[i] : 0.0;
        expected += (1.0 - beta) * cells[i].l_embb_star / t.embb_packet_bits;
    }
    expected += sim_cells *
                pareto_truncated_mean(scenario.pareto_shape, scenario.pareto_scale,
                                      std::min(capacity, c_bench)) /
                t.urllc_packet_bits;
    expected *= (sim.horizon_s - warmup);
    constexpr double kTargetSamples = 500000.0;
    const int stride = std::max(1, static_cast<int>(expected / kTargetSamples));

    SimMetrics total;
    bool first = true;
    for (int i = 0; i < sim_cells; ++i) {
        const double beta =
            mode == NetworkMode::Istn && association ? association->beta[i] : 0.0;
        const double embb_rate_bps = (1.0 - beta) * cells[i].l_embb_star;

        const std::uint64_t cell_tag = static_cast<std::uint64_t>(i) * 8;
        std::vector<std::unique_ptr<ArrivalGen>> streams;
        const double urllc_mean =
            pareto_truncated_mean(scenario.pareto_shape, scenario.pareto_scale,
                                  admit_urllc(c_bench, capacity));
        if (sim.exponential_service) {
            // Analytic-match mode: both classes Poisson at their mean rates.
            streams.push_back(std::make_unique<PoissonArrivals>(
                embb_rate_bps, t.embb_packet_bits, sim.horizon_s, TrafficClass::Embb,
                mix_seed(seed, cell_tag + 1)));
            streams.push_back(std::make_unique<PoissonArrivals>(
                urllc_mean, t.urllc_packet_bits, sim.horizon_s, TrafficClass::Urllc,
                mix_seed(seed, cell_tag + 2)));
        } else {
            streams.push_back(std::make_unique<PoissonArrivals>(
                embb_rate_bps, t.embb_packet_bits, sim.horizon_s, TrafficClass::Embb,
                mix_seed(seed, cell_tag + 1)));
            streams.push_back(std::make_unique<SlottedParetoArrivals>(
                scenario.pareto_shape, scenario.pareto_scale, c_bench, capacity,
                t.urllc_packet_bits, sim.horizon_s, warmup, mix_seed(seed, cell_tag + 2)));
        }

        QueueSimConfig cfg;
        cfg.capacity_bps = capacity;
        cfg.horizon_s = sim.horizon_s;
        cfg.warmup_s = warmup;
        cfg.drop_threshold_bits = sim.drop_slot_depth * capacity;
        cfg.exponential_service = sim.exponential_service;
        cfg.service_seed = mix_seed(seed, cell_tag + 3);
        cfg.sample_stride = stride;
        if (sim.exponential_service) {
            const double embb_pkts = embb_rate_bps / t.embb_packet_bits;
            const double urllc_pkts = urllc_mean / t.urllc_packet_bits;
            const double mu = mean_service_rate(capacity, embb_pkts, t.embb_packet_bits,
                                                urllc_pkts, t.urllc_packet_bits,
                                                scenario.service_rate_embb_only);
            cfg.service_mean_bits = capacity / mu;
        }

        SimMetrics cell = simulate_queue(std::move(streams), cfg);
        if (first) {
            total = std::move(cell);
            first = false;
        } else {
            total.merge(cell);
        }
    }
    return total;
}

SimMetrics run_mm1(double lambda_pkts, double mu_pkts, std::int64_t num_packets,
                   std::uint64_t seed) {
    if (!(lambda_pkts > 0) || !(mu_pkts > lambda_pkts))
        throw SimError("M/M/1 calibration requires 0 < lambda < mu");
    constexpr double kBits = 1000.0;
    const double horizon = static_cast<double>(num_packets) / lambda_pkts;
    std::vector<std::unique_ptr<ArrivalGen>> streams;
    streams.push_back(std::make_unique<PoissonArrivals>(lambda_pkts * kBits, kBits, horizon,
                                                        TrafficClass::Embb, mix_seed(seed, 1)));
    QueueSimConfig cfg;
    cfg.capacity_bps = mu_pkts * kBits;
    cfg.horizon_s = horizon;
    cfg.warmup_s = 0.01 * horizon;
    cfg.drop_threshold_bits = 0;
    cfg.exponential_service = true;
    cfg.service_mean_bits = kBits;
    cfg.service_seed = mix_seed(seed, 2);
    cfg.sample_stride = 1;
    return simulate_queue(std::move(streams), cfg);
}

std::vector<EcdfPoint> empirical_cdf(std::vector<double> samples) {
    if (samples.empty()) throw SimError("empirical CDF of an empty sample set");
    std::sort(samples.begin(), samples.end());
    std::vector<EcdfPoint> cdf;
    cdf.reserve(samples.size());
    const double n = static_cast<double>(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!cdf.empty() && cdf.back().x == samples[i])
            cdf.back().p = (i + 1) / n;
        else
            cdf.push_back({samples[i], (i + 1) / n});
    }
    return cdf;
}

double ecdf_value(const std::vector<EcdfPoint>& cdf, double x) {
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), x,
                                     [](double v, const EcdfPoint& p) { return v < p.x; });
    return it == cdf.begin() ? 0.0 : std::prev(it)->p;
}

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) throw SimError("KS statistic of an empty sample set");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max(d, std::max((i + 1) / n - f, f - i / n));
    }
    return d;
}

}  // namespace istn
