#include "istn/units.hpp"

#include <cmath>
#include <cstdlib>
#include <initializer_list>
#include <utility>

namespace istn {
namespace {

struct Suffix {
    const char* name;
    double factor;
};

// Splits "<number> <suffix>" (whitespace optional). Returns true and the
// numeric part if a suffix token exists.
bool split_quantity(const std::string& text, double& value, std::string& suffix) {
    const char* begin = text.c_str();
    char* end = nullptr;
    value = std::strtod(begin, &end);
    if (end == begin) throw UnitError("not a quantity: '" + text + "'");
    while (*end == ' ' || *end == '\t') ++end;
    suffix = end;
    while (!suffix.empty() && (suffix.back() == ' ' || suffix.back() == '\t')) suffix.pop_back();
    return !suffix.empty();
}

double parse_scaled(const std::string& text, std::initializer_list<Suffix> table,
                    const char* what) {
    double value = 0;
    std::string suffix;
    if (!split_quantity(text, value, suffix)) return value;
    for (const auto& s : table) {
        if (suffix == s.name) return value * s.factor;
    }
    throw UnitError(std::string("unknown ") + what + " unit '" + suffix + "' in '" + text + "'");
}

}  // namespace

double parse_hertz(const std::string& text) {
    return parse_scaled(text,
                        {{"Hz", 1.0}, {"kHz", 1e3}, {"MHz", 1e6}, {"Mhz", 1e6}, {"GHz", 1e9}, {"Ghz", 1e9}},
                        "frequency");
}

double parse_bits_per_second(const std::string& text) {
    return parse_scaled(text,
                        {{"bps", 1.0},
                         {"bit/s", 1.0},
                         {"kbps", 1e3},
                         {"Mbps", 1e6},
                         {"Gbps", 1e9}},
                        "rate");
}

double parse_watts(const std::string& text) {
    double value = 0;
    std::string suffix;
    if (!split_quantity(text, value, suffix)) return value;
    if (suffix == "W") return value;
    if (suffix == "mW") return value * 1e-3;
    if (suffix == "kW") return value * 1e3;
    if (suffix == "dBm" || suffix == "dbm") return std::pow(10.0, (value - 30.0) / 10.0);
    throw UnitError("unknown power unit '" + suffix + "' in '" + text + "'");
}

double parse_watts_per_hertz(const std::string& text) {
    double value = 0;
    std::string suffix;
    if (!split_quantity(text, value, suffix)) return value;
    if (suffix == "W/Hz") return value;
    if (suffix == "mW/Hz") return value * 1e-3;
    if (suffix == "dBm/Hz" || suffix == "dbm/Hz") return std::pow(10.0, (value - 30.0) / 10.0);
    throw UnitError("unknown spectral density unit '" + suffix + "' in '" + text + "'");
}

double parse_bits(const std::string& text) {
    return parse_scaled(text,
                        {{"bit", 1.0}, {"bits", 1.0}, {"B", 8.0}, {"kB", 8e3}, {"KB", 8e3}, {"MB", 8e6}},
                        "size");
}

double parse_meters(const std::string& text) {
    return parse_scaled(text, {{"m", 1.0}, {"km", 1e3}}, "length");
}

double parse_seconds(const std::string& text) {
    return parse_scaled(text, {{"s", 1.0}, {"ms", 1e-3}, {"us", 1e-6}}, "time");
}

double parse_decibels(const std::string& text) {
    return parse_scaled(text, {{"dB", 1.0}, {"db", 1.0}}, "ratio");
}

}  // namespace istn
