#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace istn {

struct UnitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Config quantities are plain numbers in base SI units or strings with a
/// unit suffix, e.g. "100 MHz", "20 Mbps", "-174 dBm/Hz", "30 B", "500 m".
double parse_hertz(const std::string& text);
double parse_bits_per_second(const std::string& text);
double parse_watts(const std::string& text);
double parse_watts_per_hertz(const std::string& text);
double parse_bits(const std::string& text);
double parse_meters(const std::string& text);
double parse_seconds(const std::string& text);
double parse_decibels(const std::string& text);

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace istn
