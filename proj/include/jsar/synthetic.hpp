#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "jsar/error.hpp"
#include "jsar/evaluation.hpp"
#include "jsar/geometry.hpp"
#include "jsar/image.hpp"

namespace jsar {

struct OcclusionEvent {
    int t0 = 0;  // first hidden frame
    int t1 = 0;  // last hidden frame, inclusive
};

struct TeleportEvent {
    int t = 0;
    double dx = 0.0, dy = 0.0;
};

struct BackgroundSpec {
    double base = 120.0;      // mean level
    double blob_amp = 25.0;   // smooth lattice-noise amplitude
    int blob_cells = 12;      // lattice cells across the frame width
    double gradient = 30.0;   // left-to-right ramp, levels
    double grain = 4.0;       // per-pixel noise amplitude
};

struct ObjectSpec {
    int texels = 64;        // texture side
    int checker = 4;        // checker squares per side
    double grain = 18.0;    // per-texel noise amplitude
};

struct Scenario {
    std::string name = "custom";
    std::uint64_t seed = 1;
    int width = 640;
    int height = 360;
    std::vector<Bbox4DoF> script;  // one box per frame
    std::vector<OcclusionEvent> occlusions;
    std::vector<TeleportEvent> teleports;  // informational: already part of the script
    BackgroundSpec background;
    ObjectSpec object;

    int frames() const { return static_cast<int>(script.size()); }

    bool occluded(int t) const {
        for (const auto& o : occlusions)
            if (t >= o.t0 && t <= o.t1) return true;
        return false;
    }
};

struct RenderedSequence {
    std::vector<Frame> frames;
    std::vector<Rect> truth;
};

namespace detail {

/// Uniform double in [0, 1) from the top 53 bits; portable unlike the
/// standard distributions.
inline double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline std::uint8_t to_byte(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

inline void validate_scenario(const Scenario& s) {
    if (s.width < 16 || s.height < 16) throw Error(ErrorKind::InvalidArgument, "scenario frame must be at least 16x16");
    if (s.script.empty()) throw Error(ErrorKind::InvalidArgument, "scenario script is empty");
    for (std::size_t t = 0; t < s.script.size(); ++t) {
        const auto& b = s.script[t];
        const std::string where = "scenario frame " + std::to_string(t);
        if (!b.valid() || b.w < 8.0 || b.h < 8.0)
            throw Error(ErrorKind::InvalidArgument, where + ": box must be finite and at least 8x8 px");
        const Rect r = b.rect();
        if (r.x < 0.0 || r.y < 0.0 || r.x + r.w > s.width || r.y + r.h > s.height)
            throw Error(ErrorKind::InvalidArgument, where + ": box leaves the frame");
    }
    for (const auto& o : s.occlusions)
        if (o.t0 < 0 || o.t1 < o.t0 || o.t1 >= s.frames())
            throw Error(ErrorKind::InvalidArgument, "scenario occlusion outside the script");
}

/// Smooth background: bilinear lattice noise plus a horizontal ramp, with a
/// slight per-channel tint. Static over the sequence.
inline std::vector<double> make_background(const Scenario& s, std::mt19937_64& rng) {
    const auto& bg = s.background;
    const int gx = bg.blob_cells + 2;
    const int gy = static_cast<int>(std::ceil(bg.blob_cells * static_cast<double>(s.height) / s.width)) + 2;
    std::vector<std::array<double, 3>> lattice(static_cast<std::size_t>(gx) * gy);
    for (auto& v : lattice) {
        const double l = (unit(rng) * 2 - 1) * bg.blob_amp;
        for (int c = 0; c < 3; ++c) v[c] = l + (unit(rng) * 2 - 1) * bg.blob_amp * 0.3;
    }
    const std::array<double, 3> tint{unit(rng) * 20 - 10, unit(rng) * 20 - 10, unit(rng) * 20 - 10};
    const double cell = static_cast<double>(s.width) / bg.blob_cells;
    std::vector<double> img(static_cast<std::size_t>(s.width) * s.height * 3);
    for (int y = 0; y < s.height; ++y)
        for (int x = 0; x < s.width; ++x) {
            const double u = (x + 0.5) / cell, v = (y + 0.5) / cell;
            const int i = static_cast<int>(u), j = static_cast<int>(v);
            const double fu = u - i, fv = v - j;
            // Smoothstep weights keep the field free of lattice-edge kinks.
            const double wu = fu * fu * (3 - 2 * fu), wv = fv * fv * (3 - 2 * fv);
            for (int c = 0; c < 3; ++c) {
                auto L = [&](int a, int b) { return lattice[static_cast<std::size_t>(b) * gx + a][c]; };
                const double n = (1 - wv) * ((1 - wu) * L(i, j) + wu * L(i + 1, j)) +
                                 wv * ((1 - wu) * L(i, j + 1) + wu * L(i + 1, j + 1));
                img[(static_cast<std::size_t>(y) * s.width + x) * 3 + c] =
                    bg.base + tint[c] + n + bg.gradient * (x / static_cast<double>(s.width) - 0.5);
            }
        }
    return img;
}

/// Checker of random vivid colours with per-texel grain.
inline std::vector<double> make_object_texture(const Scenario& s, std::mt19937_64& rng) {
    const auto& ob = s.object;
    const int n = ob.texels, sq = std::max(1, ob.texels / ob.checker);
    std::vector<std::array<double, 3>> colors(static_cast<std::size_t>(ob.checker) * ob.checker);
    for (std::size_t k = 0; k < colors.size(); ++k) {
        // Alternate dark and bright squares so neighbouring cells always contrast.
        const int cx = static_cast<int>(k) % ob.checker, cy = static_cast<int>(k) / ob.checker;
        const bool bright = (cx + cy) % 2 == 0;
        for (int c = 0; c < 3; ++c) colors[k][c] = bright ? 150 + unit(rng) * 105 : unit(rng) * 90;
    }
    std::vector<double> tex(static_cast<std::size_t>(n) * n * 3);
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
            const int k = std::min(y / sq, ob.checker - 1) * ob.checker + std::min(x / sq, ob.checker - 1);
            for (int c = 0; c < 3; ++c)
                tex[(static_cast<std::size_t>(y) * n + x) * 3 + c] =
                    colors[k][c] + (unit(rng) * 2 - 1) * ob.grain;
        }
    return tex;
}

}  // namespace detail

/// Deterministic in the scenario value. The object texture is stretched to the
/// scripted box and blended with exact pixel coverage at its border;
/// occluded frames show background only.
inline RenderedSequence render(const Scenario& s) {
    detail::validate_scenario(s);
    std::mt19937_64 rng(s.seed);
    const auto bg = detail::make_background(s, rng);
    const auto tex = detail::make_object_texture(s, rng);
    const int n = s.object.texels;

    RenderedSequence out;
    out.frames.reserve(s.script.size());
    for (int t = 0; t < s.frames(); ++t) {
        std::mt19937_64 grain_rng(s.seed ^ (0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(t + 1)));
        std::vector<double> img = bg;
        for (auto& v : img) v += (detail::unit(grain_rng) * 2 - 1) * s.background.grain;

        const Rect r = s.script[t].rect();
        out.truth.push_back(r);
        if (!s.occluded(t)) {
            const int x0 = static_cast<int>(std::floor(r.x)), x1 = static_cast<int>(std::ceil(r.x + r.w));
            const int y0 = static_cast<int>(std::floor(r.y)), y1 = static_cast<int>(std::ceil(r.y + r.h));
            for (int y = std::max(0, y0); y < std::min(s.height, y1); ++y) {
                const double cov_y = std::min<double>(y + 1, r.y + r.h) - std::max<double>(y, r.y);
                for (int x = std::max(0, x0); x < std::min(s.width, x1); ++x) {
                    const double cov_x = std::min<double>(x + 1, r.x + r.w) - std::max<double>(x, r.x);
                    const double alpha = std::clamp(cov_x, 0.0, 1.0) * std::clamp(cov_y, 0.0, 1.0);
                    if (alpha <= 0.0) continue;
                    // Texture sample at the pixel centre, bilinear, clamped.
                    const double u = std::clamp((x + 0.5 - r.x) / r.w * n - 0.5, 0.0, n - 1.0);
                    const double v = std::clamp((y + 0.5 - r.y) / r.h * n - 0.5, 0.0, n - 1.0);
                    const int i = std::min(static_cast<int>(u), n - 2), j = std::min(static_cast<int>(v), n - 2);
                    const double fu = u - i, fv = v - j;
                    double* px = img.data() + (static_cast<std::size_t>(y) * s.width + x) * 3;
                    for (int c = 0; c < 3; ++c) {
                        auto T = [&](int a, int b) { return tex[(static_cast<std::size_t>(b) * n + a) * 3 + c]; };
                        const double val = (1 - fv) * ((1 - fu) * T(i, j) + fu * T(i + 1, j)) +
                                           fv * ((1 - fu) * T(i, j + 1) + fu * T(i + 1, j + 1));
                        px[c] = (1 - alpha) * px[c] + alpha * val;
                    }
                }
            }
        }
        Frame f(s.width, s.height);
        f.index = t;
        for (std::size_t i = 0; i < img.size(); ++i) f.rgb[i] = detail::to_byte(img[i]);
        out.frames.push_back(std::move(f));
    }
    return out;
}

inline const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names{"static", "drift", "zoom_in", "aspect_shear", "occlusion_20f",
                                                "teleport"};
    return names;
}

/// Scripts (640x360, target starting 48x48, at the frame centre unless noted):
///   static         60 frames, no motion
///   drift          60 frames, from (-45, -24) off centre at (+1.5, +0.8) px/frame
///   zoom_in        60 frames, both sides +1%/frame
///   aspect_shear   60 frames, width +1%/frame, height -1%/frame
///   occlusion_20f  80 frames, slow drift; hidden for frames 25..44 while it
///                  moves 80 px in a seeded direction
///   teleport       60 frames, from (-60, +20) off centre, jump of (+150, -60) px
///                  at frame 30
inline Scenario preset(const std::string& name, std::uint64_t seed = 1) {
    Scenario s;
    s.name = name;
    s.seed = seed;
    const double cx = s.width / 2.0, cy = s.height / 2.0, side = 48.0;
    if (name == "static") {
        s.script.assign(60, {cx, cy, side, side});
    } else if (name == "drift") {
        for (int t = 0; t < 60; ++t) s.script.push_back({cx - 45 + 1.5 * t, cy - 24 + 0.8 * t, side, side});
    } else if (name == "zoom_in") {
        for (int t = 0; t < 60; ++t) {
            const double f = std::pow(1.01, t);
            s.script.push_back({cx, cy, side * f, side * f});
        }
    } else if (name == "aspect_shear") {
        for (int t = 0; t < 60; ++t) s.script.push_back({cx, cy, side * std::pow(1.01, t), side * std::pow(0.99, t)});
    } else if (name == "occlusion_20f") {
        std::mt19937_64 rng(seed * 0x2545f4914f6cdd1dull + 7);
        const double angle = detail::unit(rng) * 2 * std::numbers::pi;
        const double jump = 80.0;
        const double vx = 0.4, vy = 0.25;
        const int t0 = 25, t1 = 44;
        for (int t = 0; t < 80; ++t) {
            const double progress = std::clamp((t - t0 + 1) / static_cast<double>(t1 - t0 + 1), 0.0, 1.0);
            s.script.push_back({cx + vx * t + jump * progress * std::cos(angle),
                                cy + vy * t + jump * progress * std::sin(angle), side, side});
        }
        s.occlusions.push_back({t0, t1});
    } else if (name == "teleport") {
        for (int t = 0; t < 60; ++t) {
            const bool after = t >= 30;
            s.script.push_back({cx - 60 + (after ? 150 : 0), cy + 20 + (after ? -60 : 0), side, side});
        }
        s.teleports.push_back({30, 150, -60});
    } else {
        throw Error(ErrorKind::InvalidArgument, "unknown preset '" + name + "'");
    }
    return s;
}

/// Sequence layout: `dir/img/00001.png ...` plus `dir/groundtruth.txt`.
inline void export_sequence(const RenderedSequence& seq, const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir / "img");
    std::string gt;
    for (std::size_t t = 0; t < seq.frames.size(); ++t) {
        char name[32];
        std::snprintf(name, sizeof name, "%05zu.png", t + 1);
        const fs::path final_path = dir / "img" / name;
        const fs::path tmp = dir / "img" / (std::string("tmp_") + name);
        save_image(tmp, seq.frames[t]);
        fs::rename(tmp, final_path);
        const Rect& r = seq.truth[t];
        char line[160];
        std::snprintf(line, sizeof line, "%.9g,%.9g,%.9g,%.9g\n", r.x, r.y, r.w, r.h);
        gt += line;
    }
    write_text_atomic(dir / "groundtruth.txt", gt);
}

}  // namespace jsar
