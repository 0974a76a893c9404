#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "jsar/error.hpp"

namespace jsar {

enum class Mode { Jsar, JsarRe, TranslationOnly, MultiScaleBaseline };

inline const char* to_string(Mode m) {
    switch (m) {
        case Mode::Jsar: return "jsar";
        case Mode::JsarRe: return "jsar-re";
        case Mode::TranslationOnly: return "translation-only";
        case Mode::MultiScaleBaseline: return "multi-scale-baseline";
    }
    return "jsar";
}

inline Mode parse_mode(std::string_view s) {
    if (s == "jsar") return Mode::Jsar;
    if (s == "jsar-re") return Mode::JsarRe;
    if (s == "translation-only") return Mode::TranslationOnly;
    if (s == "multi-scale-baseline") return Mode::MultiScaleBaseline;
    throw Error(ErrorKind::Config, "unknown mode '" + std::string(s) +
                                       "' (expected jsar, jsar-re, translation-only, multi-scale-baseline)");
}

struct TrackerConfig {
    // Size domain.
    int S = 13;
    int A = 13;
    double gamma = 1.03;
    double phi = 1.02;
    double theta_size = 0.014;
    int W_model = 16;
    int H_model = 32;
    int C = 4;
    // Re-detection.
    double zeta_e = 0.0105;
    double zeta_s = 0.013;
    double eta_d = 0.02;
    double omega = 5.0;
    int N_e = 30;

    double lambda = 1e-2;
    double theta_trans = 0.02;
    double roi_area_factor = 4.0;   // ROI area / target area
    double sigma_trans = 1.0 / 16;  // label bandwidth / target extent (cells)
    double sigma_size = 1.0 / 16;   // label bandwidth / S (resp. A)
    double template_area = 9216.0;  // translation template, px^2
    double omega_growth = 1.1;
    double eta_d_decay = 0.9;
    double eta_d_floor = 0.0105;  // a proposal weaker than the failure threshold never re-initialises
    int min_size_patch = 8;  // px, size-domain crops are clamped to at least this
    int baseline_scales = 5;
    double baseline_step = 1.03;
    Mode mode = Mode::Jsar;

    friend bool operator==(const TrackerConfig&, const TrackerConfig&) = default;
};

namespace detail {

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

struct ConfigField {
    std::function<std::string(const TrackerConfig&)> get;
    std::function<void(TrackerConfig&, std::string_view)> set;
};

inline double parse_double_value(std::string_view key, std::string_view text) {
    std::string s(text);
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size() || s.empty())
        throw Error(ErrorKind::Config, "key '" + std::string(key) + "': not a number: '" + s + "'");
    return v;
}

inline int parse_int_value(std::string_view key, std::string_view text) {
    int v = 0;
    const auto* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, v);
    if (res.ec != std::errc{} || res.ptr != end)
        throw Error(ErrorKind::Config, "key '" + std::string(key) + "': not an integer: '" +
                                           std::string(text) + "'");
    return v;
}

template <typename T>
ConfigField field(T TrackerConfig::*member, std::string_view key) {
    ConfigField f;
    if constexpr (std::is_same_v<T, int>) {
        f.get = [member](const TrackerConfig& c) { return std::to_string(c.*member); };
        f.set = [member, key](TrackerConfig& c, std::string_view v) { c.*member = parse_int_value(key, v); };
    } else if constexpr (std::is_same_v<T, double>) {
        f.get = [member](const TrackerConfig& c) { return format_double(c.*member); };
        f.set = [member, key](TrackerConfig& c, std::string_view v) {
            c.*member = parse_double_value(key, v);
        };
    } else {
        f.get = [member](const TrackerConfig& c) { return std::string(to_string(c.*member)); };
        f.set = [member](TrackerConfig& c, std::string_view v) { c.*member = parse_mode(v); };
    }
    return f;
}

/// Sorted by key, which is also the canonical serialisation order.
inline const std::map<std::string, ConfigField, std::less<>>& config_fields() {
    static const std::map<std::string, ConfigField, std::less<>> fields = {
        {"A", field(&TrackerConfig::A, "A")},
        {"C", field(&TrackerConfig::C, "C")},
        {"H_model", field(&TrackerConfig::H_model, "H_model")},
        {"N_e", field(&TrackerConfig::N_e, "N_e")},
        {"S", field(&TrackerConfig::S, "S")},
        {"W_model", field(&TrackerConfig::W_model, "W_model")},
        {"baseline_scales", field(&TrackerConfig::baseline_scales, "baseline_scales")},
        {"baseline_step", field(&TrackerConfig::baseline_step, "baseline_step")},
        {"eta_d", field(&TrackerConfig::eta_d, "eta_d")},
        {"eta_d_decay", field(&TrackerConfig::eta_d_decay, "eta_d_decay")},
        {"eta_d_floor", field(&TrackerConfig::eta_d_floor, "eta_d_floor")},
        {"gamma", field(&TrackerConfig::gamma, "gamma")},
        {"lambda", field(&TrackerConfig::lambda, "lambda")},
        {"min_size_patch", field(&TrackerConfig::min_size_patch, "min_size_patch")},
        {"mode", field(&TrackerConfig::mode, "mode")},
        {"omega", field(&TrackerConfig::omega, "omega")},
        {"omega_growth", field(&TrackerConfig::omega_growth, "omega_growth")},
        {"phi", field(&TrackerConfig::phi, "phi")},
        {"roi_area_factor", field(&TrackerConfig::roi_area_factor, "roi_area_factor")},
        {"sigma_size", field(&TrackerConfig::sigma_size, "sigma_size")},
        {"sigma_trans", field(&TrackerConfig::sigma_trans, "sigma_trans")},
        {"template_area", field(&TrackerConfig::template_area, "template_area")},
        {"theta_size", field(&TrackerConfig::theta_size, "theta_size")},
        {"theta_trans", field(&TrackerConfig::theta_trans, "theta_trans")},
        {"zeta_e", field(&TrackerConfig::zeta_e, "zeta_e")},
        {"zeta_s", field(&TrackerConfig::zeta_s, "zeta_s")},
    };
    return fields;
}

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace detail

/// Throws ErrorKind::Config naming the offending key.
inline void validate(const TrackerConfig& c) {
    auto fail = [](const std::string& key, const std::string& why) {
        throw Error(ErrorKind::Config, "key '" + key + "': " + why);
    };
    if (c.S < 3 || c.S % 2 == 0) fail("S", "must be odd and >= 3, got " + std::to_string(c.S));
    if (c.A < 3 || c.A % 2 == 0) fail("A", "must be odd and >= 3, got " + std::to_string(c.A));
    if (!(c.gamma > 1.0)) fail("gamma", "must be > 1");
    if (!(c.phi > 1.0)) fail("phi", "must be > 1");
    if (!(c.theta_size >= 0.0 && c.theta_size <= 1.0)) fail("theta_size", "must lie in [0, 1]");
    if (!(c.theta_trans >= 0.0 && c.theta_trans <= 1.0)) fail("theta_trans", "must lie in [0, 1]");
    if (c.C < 1) fail("C", "must be >= 1");
    if (c.W_model < 3 * c.C || c.W_model % c.C != 0) fail("W_model", "must be a multiple of C spanning >= 3 cells");
    if (c.H_model < 3 * c.C || c.H_model % c.C != 0) fail("H_model", "must be a multiple of C spanning >= 3 cells");
    if (!(c.zeta_e > 0.0)) fail("zeta_e", "must be positive");
    if (!(c.zeta_s > 0.0)) fail("zeta_s", "must be positive");
    if (!(c.eta_d > 0.0)) fail("eta_d", "must be positive");
    if (!(c.omega > 0.0)) fail("omega", "must be positive");
    if (c.N_e < 1) fail("N_e", "must be >= 1");
    if (!(c.lambda >= 0.0)) fail("lambda", "must be >= 0");
    if (!(c.roi_area_factor >= 1.0)) fail("roi_area_factor", "must be >= 1");
    if (!(c.sigma_trans > 0.0)) fail("sigma_trans", "must be positive");
    if (!(c.sigma_size > 0.0)) fail("sigma_size", "must be positive");
    if (!(c.template_area >= 9.0 * c.C * c.C)) fail("template_area", "must cover at least 3x3 cells");
    if (!(c.omega_growth >= 1.0)) fail("omega_growth", "must be >= 1");
    if (!(c.eta_d_decay > 0.0 && c.eta_d_decay <= 1.0)) fail("eta_d_decay", "must lie in (0, 1]");
    if (!(c.eta_d_floor > 0.0 && c.eta_d_floor <= c.eta_d)) fail("eta_d_floor", "must lie in (0, eta_d]");
    if (c.min_size_patch < 1) fail("min_size_patch", "must be >= 1");
    if (c.baseline_scales < 1 || c.baseline_scales % 2 == 0) fail("baseline_scales", "must be odd and >= 1");
    if (!(c.baseline_step > 1.0)) fail("baseline_step", "must be > 1");
}

/// `key = value` per line, `#` starts a comment. Unknown or repeated keys are
/// rejected. Unset keys keep their defaults.
inline TrackerConfig parse_config(std::string_view text) {
    TrackerConfig cfg;
    const auto& fields = detail::config_fields();
    std::vector<std::string> seen;
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw Error(ErrorKind::Config, "line " + std::to_string(line_no) + ": expected 'key = value'");
        const auto key = detail::trim(line.substr(0, eq));
        const auto value = detail::trim(line.substr(eq + 1));
        const auto it = fields.find(key);
        if (it == fields.end())
            throw Error(ErrorKind::Config, "line " + std::to_string(line_no) + ": unknown key '" +
                                               std::string(key) + "'");
        if (std::find(seen.begin(), seen.end(), key) != seen.end())
            throw Error(ErrorKind::Config, "line " + std::to_string(line_no) + ": key '" +
                                               std::string(key) + "' given twice");
        seen.emplace_back(key);
        it->second.set(cfg, value);
    }
    validate(cfg);
    return cfg;
}

/// Canonical text form: every key, sorted, doubles at 9 significant digits.
inline std::string to_text(const TrackerConfig& cfg) {
    std::ostringstream out;
    for (const auto& [key, f] : detail::config_fields()) out << key << " = " << f.get(cfg) << '\n';
    return out.str();
}

/// FNV-1a over the canonical text form.
inline std::uint64_t config_hash(const TrackerConfig& cfg) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : to_text(cfg)) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace jsar
