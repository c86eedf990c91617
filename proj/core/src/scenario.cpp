#include "istn/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "istn/units.hpp"

namespace istn {

using nlohmann::json;

double ConstellationConfig::cn_linear() const { return db_to_linear(carrier_to_noise_db); }

const std::vector<std::string>& constellation_preset_names() {
    static const std::vector<std::string> names = {"Telsat", "OneWeb", "SpaceX"};
    return names;
}

ConstellationConfig constellation_preset(const std::string& name) {
    ConstellationConfig c;
    c.name = name;
    c.beam_bandwidth_hz = 0.25e9;
    if (name == "Telsat") {
        c.sat_capacity_bps = 558.7e6;
        c.carrier_to_noise_db = 9.6;
    } else if (name == "OneWeb") {
        c.sat_capacity_bps = 599.4e6;
        c.carrier_to_noise_db = 10.5;
    } else if (name == "SpaceX") {
        c.sat_capacity_bps = 674.3e6;
        c.carrier_to_noise_db = 12.0;
    } else {
        throw ConfigError("unknown constellation preset '" + name + "'");
    }
    return c;
}

std::string to_string(NetworkMode mode) {
    return mode == NetworkMode::Istn ? "ISTN" : "Terrestrial";
}

NetworkMode network_mode_from_string(const std::string& text) {
    if (text == "ISTN" || text == "istn") return NetworkMode::Istn;
    if (text == "TerrestrialBenchmark" || text == "Terrestrial" || text == "terrestrial")
        return NetworkMode::TerrestrialBenchmark;
    throw ConfigError("unknown mode '" + text + "' (expected ISTN or TerrestrialBenchmark)");
}

double compute_gamma(double tx_power_w, double gain, double noise_density_w_hz) {
    if (tx_power_w <= 0) throw ValidationError("tx_power must be positive");
    if (gain <= 0) throw ValidationError("channel gain must be positive");
    if (noise_density_w_hz <= 0) throw ValidationError("noise density must be positive");
    return tx_power_w * gain / noise_density_w_hz;
}

double path_loss_gain(double distance_m, double exponent) {
    if (distance_m <= 0) throw ValidationError("distance must be positive");
    return std::pow(distance_m, -exponent);
}

CellGammas place_users(const TerrestrialConfig& t, double tx_power_w,
                       double path_loss_exponent, Rng& rng) {
    if (t.cell_radius_m <= 0) throw ValidationError("cell_radius must be positive");
    constexpr double kMinDistance = 10.0;
    const double r0sq = kMinDistance * kMinDistance;
    const double rsq = std::max(t.cell_radius_m * t.cell_radius_m, r0sq);

    auto draw_gamma = [&]() {
        // Uniform over the annulus [10 m, R]; the angle is irrelevant to gamma
        // but is drawn to keep the stream layout stable if positions are added.
        const double d = std::sqrt(r0sq + rng.uniform() * (rsq - r0sq));
        (void)rng.uniform();
        return compute_gamma(tx_power_w, path_loss_gain(d, path_loss_exponent),
                             t.noise_density_w_hz);
    };

    CellGammas g;
    g.embb.reserve(t.num_embb);
    g.urllc.reserve(t.num_urllc);
    for (int v = 0; v < t.num_embb; ++v) g.embb.push_back(draw_gamma());
    for (int v = 0; v < t.num_urllc; ++v) g.urllc.push_back(draw_gamma());
    return g;
}

CellGammas cell_gammas(const Scenario& s, int cell_index) {
    if (!s.gammas.empty()) {
        if (cell_index < 0 || cell_index >= static_cast<int>(s.gammas.size()))
            throw ValidationError("gamma table does not cover cell " + std::to_string(cell_index));
        return s.gammas[cell_index];
    }
    Rng rng(mix_seed(s.rng_seed, 0x706c6163ULL + static_cast<std::uint64_t>(cell_index)));
    return place_users(s.terrestrial, s.terrestrial.sbs_tx_power_w, s.path_loss_exponent, rng);
}

std::vector<double> resolve_weights(const Scenario& s) {
    const int n = s.terrestrial.num_sbs;
    if (!s.weights.empty()) return s.weights;
    if (s.weight_mode == "distance") {
        if (static_cast<int>(s.sbs_beam_distances.size()) != n)
            throw ValidationError("weight_mode 'distance' needs sbs_beam_distances with one entry per SBS");
        double sum = 0;
        for (double d : s.sbs_beam_distances) sum += d;
        if (sum <= 0) throw ValidationError("sbs_beam_distances must have a positive sum");
        std::vector<double> w(n);
        for (int i = 0; i < n; ++i) w[i] = s.sbs_beam_distances[i] / sum;
        return w;
    }
    return std::vector<double>(n, 1.0 / n);
}

void validate_scenario(const Scenario& s) {
    const auto& t = s.terrestrial;
    if (t.num_sbs < 1) throw ValidationError("N >= 1 violated: num_sbs = " + std::to_string(t.num_sbs));
    if (t.num_urllc < 1) throw ValidationError("U_2 >= 1 violated: num_urllc = " + std::to_string(t.num_urllc));
    if (t.num_embb < t.num_urllc)
        throw ValidationError("U_1 >= U_2 violated: num_embb = " + std::to_string(t.num_embb) +
                              " < num_urllc = " + std::to_string(t.num_urllc));

    auto positive = [](double v, const char* name) {
        if (!(v > 0)) throw ValidationError(std::string(name) + " must be strictly positive");
    };
    positive(t.cell_radius_m, "cell_radius");
    positive(t.sbs_bandwidth_hz, "sbs_bandwidth");
    positive(t.rb_bandwidth_hz, "rb_bandwidth");
    positive(t.sbs_tx_power_w, "sbs_tx_power");
    positive(t.noise_density_w_hz, "noise_density");
    positive(t.backhaul_capacity_bps, "backhaul_capacity");
    positive(t.embb_packet_bits, "embb_packet_size");
    positive(t.urllc_packet_bits, "urllc_packet_size");

    // The bandwidth must hold a whole number of resource blocks, up to 1 RB
    // of rounding slack.
    const double blocks = t.sbs_bandwidth_hz / t.rb_bandwidth_hz;
    if (blocks < 1.0)
        throw ValidationError("rb_bandwidth larger than sbs_bandwidth (zero resource blocks)");
    if (std::abs(blocks - std::round(blocks)) * t.rb_bandwidth_hz > t.rb_bandwidth_hz)
        throw ValidationError("sbs_bandwidth is not a whole number of resource blocks");

    positive(s.constellation.beam_bandwidth_hz, "beam_bandwidth");
    positive(s.constellation.sat_capacity_bps, "sat_capacity");

    if (!(s.target_load > 0 && s.target_load < 1))
        throw ValidationError("target_load must lie in (0,1)");
    if (!(s.outage_epsilon > 0 && s.outage_epsilon < 1))
        throw ValidationError("outage_epsilon must lie in (0,1)");
    positive(s.pareto_shape, "pareto_shape");
    positive(s.pareto_scale, "pareto_scale");
    positive(s.path_loss_exponent, "path_loss_exponent");

    if (!s.weights.empty()) {
        if (static_cast<int>(s.weights.size()) != t.num_sbs)
            throw ValidationError("weights must have one entry per SBS");
        double sum = 0;
        for (double w : s.weights) {
            if (w < 0) throw ValidationError("weights must be non-negative");
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw ValidationError("weights must sum to 1 within 1e-12");
    }
    if (!s.gammas.empty()) {
        if (static_cast<int>(s.gammas.size()) != t.num_sbs)
            throw ValidationError("gammas must have one entry per SBS");
        for (const auto& g : s.gammas) {
            if (static_cast<int>(g.embb.size()) != t.num_embb ||
                static_cast<int>(g.urllc.size()) != t.num_urllc)
                throw ValidationError("per-cell gamma vectors must match num_embb / num_urllc");
            for (double v : g.embb)
                if (!(v > 0)) throw ValidationError("gamma values must be strictly positive");
            for (double v : g.urllc)
                if (!(v > 0)) throw ValidationError("gamma values must be strictly positive");
        }
    }

    positive(s.sim.horizon_s, "sim.horizon");
    if (!(s.sim.warmup_fraction >= 0 && s.sim.warmup_fraction < 1))
        throw ValidationError("sim.warmup_fraction must lie in [0,1)");
    positive(s.sim.drop_slot_depth, "sim.drop_slot_depth");
    if (s.sim.sim_cells < 0 || s.sim.sim_cells > t.num_sbs)
        throw ValidationError("sim.sim_cells must lie in [0, num_sbs]");
}

namespace {

double get_quantity(const json& j, const char* key, double fallback,
                    double (*parse)(const std::string&)) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) return parse(v.get<std::string>());
    throw ConfigError(std::string("field '") + key + "' must be a number or quantity string");
}

double get_number(const json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    return j.at(key).get<double>();
}

int get_int(const json& j, const char* key, int fallback) {
    if (!j.contains(key)) return fallback;
    return j.at(key).get<int>();
}

TerrestrialConfig parse_terrestrial(const json& j) {
    TerrestrialConfig t;
    t.num_sbs = get_int(j, "num_sbs", t.num_sbs);
    t.cell_radius_m = get_quantity(j, "cell_radius", t.cell_radius_m, parse_meters);
    t.sbs_bandwidth_hz = get_quantity(j, "sbs_bandwidth", t.sbs_bandwidth_hz, parse_hertz);
    t.rb_bandwidth_hz = get_quantity(j, "rb_bandwidth", t.rb_bandwidth_hz, parse_hertz);
    t.sbs_tx_power_w = get_quantity(j, "sbs_tx_power", t.sbs_tx_power_w, parse_watts);
    t.noise_density_w_hz =
        get_quantity(j, "noise_density", t.noise_density_w_hz, parse_watts_per_hertz);
    t.backhaul_capacity_bps =
        get_quantity(j, "backhaul_capacity", t.backhaul_capacity_bps, parse_bits_per_second);
    t.embb_packet_bits = get_quantity(j, "embb_packet_size", t.embb_packet_bits, parse_bits);
    t.urllc_packet_bits = get_quantity(j, "urllc_packet_size", t.urllc_packet_bits, parse_bits);
    t.num_embb = get_int(j, "num_embb", t.num_embb);
    t.num_urllc = get_int(j, "num_urllc", t.num_urllc);
    return t;
}

ConstellationConfig parse_constellation(const json& j) {
    if (j.is_string()) return constellation_preset(j.get<std::string>());
    ConstellationConfig c;
    if (j.contains("name")) {
        const auto name = j.at("name").get<std::string>();
        bool preset = false;
        for (const auto& p : constellation_preset_names())
            if (p == name) preset = true;
        c = preset ? constellation_preset(name) : ConstellationConfig{};
        c.name = name;
    }
    c.beam_bandwidth_hz = get_quantity(j, "beam_bandwidth", c.beam_bandwidth_hz, parse_hertz);
    c.sat_capacity_bps = get_quantity(j, "sat_capacity", c.sat_capacity_bps, parse_bits_per_second);
    c.carrier_to_noise_db = get_quantity(j, "carrier_to_noise", c.carrier_to_noise_db, parse_decibels);
    if (j.contains("cn_interpretation")) {
        const auto text = j.at("cn_interpretation").get<std::string>();
        if (text == "CN")
            c.cn_interpretation = CnInterpretation::CarrierToNoise;
        else if (text == "CN0")
            c.cn_interpretation = CnInterpretation::CarrierToNoiseDensity;
        else
            throw ConfigError("cn_interpretation must be 'CN' or 'CN0'");
    }
    return c;
}

}  // namespace

Scenario parse_scenario_json(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("scenario parse error: ") + e.what());
    }

    Scenario s;
    try {
        if (j.contains("terrestrial")) s.terrestrial = parse_terrestrial(j.at("terrestrial"));
        if (j.contains("constellation")) s.constellation = parse_constellation(j.at("constellation"));
        s.target_load = get_number(j, "target_load", s.target_load);
        s.outage_epsilon = get_number(j, "outage_epsilon", s.outage_epsilon);
        s.pareto_shape = get_number(j, "pareto_shape", 1.0);
        s.pareto_scale = get_quantity(j, "pareto_scale", 1.0, parse_bits_per_second);
        if (j.contains("weights")) s.weights = j.at("weights").get<std::vector<double>>();
        if (j.contains("gammas")) {
            for (const auto& cell : j.at("gammas")) {
                CellGammas g;
                g.embb = cell.at("embb").get<std::vector<double>>();
                g.urllc = cell.at("urllc").get<std::vector<double>>();
                s.gammas.push_back(std::move(g));
            }
        }
        if (j.contains("mode")) s.mode = network_mode_from_string(j.at("mode").get<std::string>());
        if (j.contains("rng_seed")) s.rng_seed = j.at("rng_seed").get<std::uint64_t>();
        s.path_loss_exponent = get_number(j, "path_loss_exponent", s.path_loss_exponent);
        if (j.contains("weight_mode")) s.weight_mode = j.at("weight_mode").get<std::string>();
        if (j.contains("sbs_beam_distances"))
            s.sbs_beam_distances = j.at("sbs_beam_distances").get<std::vector<double>>();
        if (j.contains("service_rate_basis")) {
            const auto basis = j.at("service_rate_basis").get<std::string>();
            if (basis == "embb_only")
                s.service_rate_embb_only = true;
            else if (basis != "mixed")
                throw ConfigError("service_rate_basis must be 'mixed' or 'embb_only'");
        }
        if (j.contains("sim")) {
            const auto& sj = j.at("sim");
            s.sim.horizon_s = get_quantity(sj, "horizon", s.sim.horizon_s, parse_seconds);
            s.sim.warmup_fraction = get_number(sj, "warmup_fraction", s.sim.warmup_fraction);
            s.sim.drop_slot_depth = get_number(sj, "drop_slot_depth", s.sim.drop_slot_depth);
            if (sj.contains("exponential_service"))
                s.sim.exponential_service = sj.at("exponential_service").get<bool>();
            s.sim.sim_cells = get_int(sj, "sim_cells", s.sim.sim_cells);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("scenario field error: ") + e.what());
    }

    if (s.weights.empty()) s.weights = resolve_weights(s);
    validate_scenario(s);
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_scenario_json(buffer.str());
}

std::string serialize_scenario(const Scenario& s) {
    json j;
    j["terrestrial"] = {{"num_sbs", s.terrestrial.num_sbs},
                        {"cell_radius", s.terrestrial.cell_radius_m},
                        {"sbs_bandwidth", s.terrestrial.sbs_bandwidth_hz},
                        {"rb_bandwidth", s.terrestrial.rb_bandwidth_hz},
                        {"sbs_tx_power", s.terrestrial.sbs_tx_power_w},
                        {"noise_density", s.terrestrial.noise_density_w_hz},
                        {"backhaul_capacity", s.terrestrial.backhaul_capacity_bps},
                        {"embb_packet_size", s.terrestrial.embb_packet_bits},
                        {"urllc_packet_size", s.terrestrial.urllc_packet_bits},
                        {"num_embb", s.terrestrial.num_embb},
                        {"num_urllc", s.terrestrial.num_urllc}};
    j["constellation"] = {{"name", s.constellation.name},
                          {"beam_bandwidth", s.constellation.beam_bandwidth_hz},
                          {"sat_capacity", s.constellation.sat_capacity_bps},
                          {"carrier_to_noise", s.constellation.carrier_to_noise_db},
                          {"cn_interpretation",
                           s.constellation.cn_interpretation == CnInterpretation::CarrierToNoise
                               ? "CN"
                               : "CN0"}};
    j["target_load"] = s.target_load;
    j["outage_epsilon"] = s.outage_epsilon;
    j["pareto_shape"] = s.pareto_shape;
    j["pareto_scale"] = s.pareto_scale;
    j["weights"] = s.weights;
    if (!s.gammas.empty()) {
        json cells = json::array();
        for (const auto& g : s.gammas) cells.push_back({{"embb", g.embb}, {"urllc", g.urllc}});
        j["gammas"] = cells;
    }
    j["mode"] = s.mode == NetworkMode::Istn ? "ISTN" : "TerrestrialBenchmark";
    j["rng_seed"] = s.rng_seed;
    j["path_loss_exponent"] = s.path_loss_exponent;
    j["weight_mode"] = s.weight_mode;
    if (!s.sbs_beam_distances.empty()) j["sbs_beam_distances"] = s.sbs_beam_distances;
    j["service_rate_basis"] = s.service_rate_embb_only ? "embb_only" : "mixed";
    j["sim"] = {{"horizon", s.sim.horizon_s},
                {"warmup_fraction", s.sim.warmup_fraction},
                {"drop_slot_depth", s.sim.drop_slot_depth},
                {"exponential_service", s.sim.exponential_service},
                {"sim_cells", s.sim.sim_cells}};
    return j.dump(2);
}

}  // namespace istn
