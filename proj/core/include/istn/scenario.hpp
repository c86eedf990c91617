#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "istn/rng.hpp"

namespace istn {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Small-cell side of an experiment. All values in base SI units
/// (Hz, W, W/Hz, bits, bits/s, m).
struct TerrestrialConfig {
    int num_sbs = 10;                  // N
    double cell_radius_m = 500.0;
    double sbs_bandwidth_hz = 100e6;   // W_i^bs
    double rb_bandwidth_hz = 0.18e6;
    double sbs_tx_power_w = 20.0;      // P_i
    double noise_density_w_hz = 3.9810717055349694e-21;  // -174 dBm/Hz
    double backhaul_capacity_bps = 20e6;                 // C_Ter
    double embb_packet_bits = 800.0;   // 100 B
    double urllc_packet_bits = 240.0;  // 30 B
    int num_embb = 10;                 // U_1
    int num_urllc = 5;                 // U_2
};

/// How the satellite's listed carrier-to-noise figure is read: as a C/N
/// ratio over the full beam bandwidth (default) or as C/N0 in dB-Hz.
enum class CnInterpretation { CarrierToNoise, CarrierToNoiseDensity };

struct ConstellationConfig {
    std::string name = "Telsat";
    double beam_bandwidth_hz = 0.25e9;  // W
    double sat_capacity_bps = 558.7e6;  // C_Sat
    double carrier_to_noise_db = 9.6;
    CnInterpretation cn_interpretation = CnInterpretation::CarrierToNoise;

    double cn_linear() const;
};

/// Returns the built-in constellation row for "Telsat", "OneWeb" or "SpaceX".
ConstellationConfig constellation_preset(const std::string& name);
const std::vector<std::string>& constellation_preset_names();

enum class NetworkMode { Istn, TerrestrialBenchmark };

std::string to_string(NetworkMode mode);
NetworkMode network_mode_from_string(const std::string& text);

/// Per-cell channel coefficients gamma = P g / N0 in Hz, one per user.
struct CellGammas {
    std::vector<double> embb;   // U_1 entries
    std::vector<double> urllc;  // U_2 entries
};

struct SimConfig {
    double horizon_s = 200.0;
    double warmup_fraction = 0.1;
    double drop_slot_depth = 1.0;       // eMBB drop threshold, seconds of capacity
    bool exponential_service = false;   // analytic-match calibration service law
    int sim_cells = 0;                  // 0 = simulate every cell
};

struct Scenario {
    TerrestrialConfig terrestrial;
    ConstellationConfig constellation;
    double target_load = 0.8;       // rho
    double outage_epsilon = 0.05;   // epsilon
    double pareto_shape = 1.0;      // a
    double pareto_scale = 1.0;      // x_m, bits/s
    std::vector<double> weights;    // omega, one per SBS, sums to 1
    std::vector<CellGammas> gammas; // empty -> derived from placement
    NetworkMode mode = NetworkMode::Istn;
    std::uint64_t rng_seed = 1;
    double path_loss_exponent = 3.5;
    std::string weight_mode = "uniform";     // "uniform" or "distance"
    std::vector<double> sbs_beam_distances;  // for weight_mode = "distance"
    bool service_rate_embb_only = false;     // mu basis: mixed stream vs eMBB only
    SimConfig sim;
};

/// Loads and validates a scenario file, filling defaults (uniform weights,
/// a = 1, x_m = 1).
Scenario load_scenario(const std::string& path);
Scenario parse_scenario_json(const std::string& json_text);
std::string serialize_scenario(const Scenario& s);
void validate_scenario(const Scenario& s);

/// gamma = P g / N0 (Hz).
double compute_gamma(double tx_power_w, double gain, double noise_density_w_hz);

/// Log-distance channel gain (d / 1 m)^-eta.
double path_loss_gain(double distance_m, double exponent);

/// Places U_1 + U_2 users uniformly in the cell disc (minimum distance 10 m)
/// and returns their channel coefficients under the log-distance model.
CellGammas place_users(const TerrestrialConfig& t, double tx_power_w,
                       double path_loss_exponent, Rng& rng);

/// Scenario gammas: supplied ones if present, otherwise placement-derived,
/// deterministic in (rng_seed, cell_index).
CellGammas cell_gammas(const Scenario& s, int cell_index);

/// Resolved weight vector (uniform default or distance mode).
std::vector<double> resolve_weights(const Scenario& s);

}  // namespace istn
