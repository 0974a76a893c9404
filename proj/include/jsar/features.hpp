#pragma once

// Hand-crafted features on a C x C cell grid: grey level, 31-channel HOG and
// colour names, plus the two stacks the filters consume (the windowed 42-channel
// translation stack and the vectorised HOG used by the size filter).

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "jsar/error.hpp"
#include "jsar/geometry.hpp"
#include "jsar/image.hpp"
#include "jsar/plane.hpp"

#ifndef JSAR_CN_TABLE_PATH
#define JSAR_CN_TABLE_PATH "data/cn_table.bin"
#endif

namespace jsar {

enum class ChannelKind { Gray, Hog, ColorName };

struct FeatureStack {
    RealStack channels;
    int cell_size = 1;
    std::vector<ChannelKind> kinds;

    int rows() const { return channels.empty() ? 0 : channels.front().rows(); }
    int cols() const { return channels.empty() ? 0 : channels.front().cols(); }
    int depth() const { return static_cast<int>(channels.size()); }

    void append(FeatureStack&& other) {
        for (auto& c : other.channels) channels.push_back(std::move(c));
        kinds.insert(kinds.end(), other.kinds.begin(), other.kinds.end());
    }
};

inline constexpr int kHogChannels = 31;
inline constexpr int kColorNameChannels = 10;
inline constexpr int kColorNameCount = 11;
inline constexpr int kTranslationChannels = 1 + kHogChannels + kColorNameChannels;

namespace detail {

inline void require_divisible(int pixels, int cell, const char* axis) {
    if (cell < 1 || pixels < cell || pixels % cell != 0)
        throw Error(ErrorKind::InvalidArgument, std::string("patch ") + axis + " of " +
                                                    std::to_string(pixels) +
                                                    " px is not a multiple of cell size " +
                                                    std::to_string(cell));
}

inline double luminance(const double* px) { return 0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2]; }

}  // namespace detail

/// Per-cell mean luminance mapped to [-0.5, 0.5].
inline FeatureStack gray_channel(const Patch& patch, int cell) {
    detail::require_divisible(patch.width, cell, "width");
    detail::require_divisible(patch.height, cell, "height");
    const int M = patch.height / cell, N = patch.width / cell;
    RealPlane g(M, N, 0.0);
    for (int y = 0; y < patch.height; ++y)
        for (int x = 0; x < patch.width; ++x) g(y / cell, x / cell) += detail::luminance(patch.at(x, y));
    const double scale = 1.0 / (255.0 * cell * cell);
    for (auto& v : g.values()) v = v * scale - 0.5;
    FeatureStack out;
    out.cell_size = cell;
    out.channels.push_back(std::move(g));
    out.kinds.push_back(ChannelKind::Gray);
    return out;
}

/// Felzenszwalb-style HOG, one output cell per C x C block of pixels (border
/// cells kept; block normalisation replicates edge cells).
///
/// Channels 0..17: contrast-sensitive orientations (20 degree bins over 360),
/// 18..26: contrast-insensitive (sums of opposite bins), 27..30: gradient energy
/// under each of the four 2x2 normalisation blocks. Gradients use central
/// differences of intensities scaled to [0, 1]; each pixel takes the colour
/// channel with the largest gradient magnitude and is bilinearly spread over
/// the four nearest cells. Normalised values are clipped at 0.2.
inline FeatureStack hog_features(const Patch& patch, int cell) {
    if (cell < 1 || patch.width < 3 * cell || patch.height < 3 * cell)
        throw Error(ErrorKind::InvalidArgument,
                    "hog_features needs at least 3x3 cells, got " + std::to_string(patch.width) +
                        "x" + std::to_string(patch.height) + " px with cell " + std::to_string(cell));
    detail::require_divisible(patch.width, cell, "width");
    detail::require_divisible(patch.height, cell, "height");

    const int W = patch.width, H = patch.height;
    const int M = H / cell, N = W / cell;
    constexpr int kBins = 18;
    static const auto unit = [] {
        std::array<std::array<double, 2>, 9> u{};
        for (int o = 0; o < 9; ++o)
            u[o] = {std::cos(o * std::numbers::pi / 9.0), std::sin(o * std::numbers::pi / 9.0)};
        return u;
    }();

    std::vector<double> hist(static_cast<std::size_t>(M) * N * kBins, 0.0);
    auto bin_at = [&](int r, int c) { return hist.data() + (static_cast<std::size_t>(r) * N + c) * kBins; };

    for (int y = 0; y < H; ++y) {
        const int ym = std::max(y - 1, 0), yp = std::min(y + 1, H - 1);
        const double yc = (y + 0.5) / cell - 0.5;
        const int iy = static_cast<int>(std::floor(yc));
        const double vy = yc - iy;
        for (int x = 0; x < W; ++x) {
            const int xm = std::max(x - 1, 0), xp = std::min(x + 1, W - 1);
            double best_mag2 = -1.0, dx = 0.0, dy = 0.0;
            for (int k = 0; k < 3; ++k) {
                const double gx = (patch.at(xp, y)[k] - patch.at(xm, y)[k]) / 255.0;
                const double gy = (patch.at(x, yp)[k] - patch.at(x, ym)[k]) / 255.0;
                const double m2 = gx * gx + gy * gy;
                if (m2 > best_mag2) {
                    best_mag2 = m2;
                    dx = gx;
                    dy = gy;
                }
            }
            const double mag = std::sqrt(best_mag2);
            if (mag == 0.0) continue;

            double best_dot = 0.0;
            int best_o = 0;
            for (int o = 0; o < 9; ++o) {
                const double dot = unit[o][0] * dx + unit[o][1] * dy;
                if (dot > best_dot) {
                    best_dot = dot;
                    best_o = o;
                } else if (-dot > best_dot) {
                    best_dot = -dot;
                    best_o = o + 9;
                }
            }

            const double xc = (x + 0.5) / cell - 0.5;
            const int ix = static_cast<int>(std::floor(xc));
            const double vx = xc - ix;
            const double wts[2][2] = {{(1 - vy) * (1 - vx), (1 - vy) * vx}, {vy * (1 - vx), vy * vx}};
            for (int a = 0; a < 2; ++a) {
                const int r = iy + a;
                if (r < 0 || r >= M) continue;
                for (int b = 0; b < 2; ++b) {
                    const int c = ix + b;
                    if (c < 0 || c >= N) continue;
                    bin_at(r, c)[best_o] += wts[a][b] * mag;
                }
            }
        }
    }

    // Energy of the contrast-insensitive histogram per cell.
    std::vector<double> energy(static_cast<std::size_t>(M) * N, 0.0);
    for (int r = 0; r < M; ++r)
        for (int c = 0; c < N; ++c) {
            const double* h = bin_at(r, c);
            double e = 0.0;
            for (int o = 0; o < 9; ++o) e += (h[o] + h[o + 9]) * (h[o] + h[o + 9]);
            energy[static_cast<std::size_t>(r) * N + c] = e;
        }
    auto energy_at = [&](int r, int c) {
        r = std::clamp(r, 0, M - 1);
        c = std::clamp(c, 0, N - 1);
        return energy[static_cast<std::size_t>(r) * N + c];
    };

    FeatureStack out;
    out.cell_size = cell;
    out.channels.assign(kHogChannels, RealPlane(M, N, 0.0));
    out.kinds.assign(kHogChannels, ChannelKind::Hog);
    constexpr double eps = 1e-4;
    for (int r = 0; r < M; ++r)
        for (int c = 0; c < N; ++c) {
            // Four 2x2 blocks that contain (r, c).
            double norm[4];
            int k = 0;
            for (int dr : {-1, 0})
                for (int dc : {-1, 0}) {
                    const double s = energy_at(r + dr, c + dc) + energy_at(r + dr + 1, c + dc) +
                                     energy_at(r + dr, c + dc + 1) + energy_at(r + dr + 1, c + dc + 1);
                    norm[k++] = 1.0 / std::sqrt(s + eps);
                }
            const double* h = bin_at(r, c);
            double texture[4] = {0, 0, 0, 0};
            for (int o = 0; o < kBins; ++o) {
                double acc = 0.0;
                for (int b = 0; b < 4; ++b) {
                    const double v = std::min(h[o] * norm[b], 0.2);
                    acc += v;
                    texture[b] += v;
                }
                out.channels[o](r, c) = 0.5 * acc;
            }
            for (int o = 0; o < 9; ++o) {
                const double s = h[o] + h[o + 9];
                double acc = 0.0;
                for (int b = 0; b < 4; ++b) acc += std::min(s * norm[b], 0.2);
                out.channels[18 + o](r, c) = 0.5 * acc;
            }
            for (int b = 0; b < 4; ++b) out.channels[27 + b](r, c) = 0.2357 * texture[b];
        }
    return out;
}

/// The 32768-row colour-names table in its 10-column orthonormal projection
/// (file: 32768 x 10 little-endian float32, row = R/8 + 32*(G/8) + 1024*(B/8)).
/// The 11 name probabilities are recovered from a row through the fixed basis
/// returned by `basis()`: p_k = <basis[k], row> + 1/11.
class ColorNameTable {
public:
    static constexpr int kRows = 32768;

    static constexpr std::array<const char*, kColorNameCount> kNames = {
        "green", "orange", "pink", "purple", "black", "blue",
        "brown", "grey",   "yellow", "red",  "white"};

    static std::shared_ptr<const ColorNameTable> load(const std::filesystem::path& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw Error(ErrorKind::Resource, "colour-names table not found: " + path.string());
        auto table = std::shared_ptr<ColorNameTable>(new ColorNameTable());
        table->values_.resize(static_cast<std::size_t>(kRows) * kColorNameChannels);
        std::vector<unsigned char> raw(table->values_.size() * 4);
        in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
        if (in.gcount() != static_cast<std::streamsize>(raw.size()) || in.peek() != EOF)
            throw Error(ErrorKind::Resource, "colour-names table has the wrong size: " + path.string());
        for (std::size_t i = 0; i < table->values_.size(); ++i) {
            const std::uint32_t bits = std::uint32_t(raw[4 * i]) | std::uint32_t(raw[4 * i + 1]) << 8 |
                                       std::uint32_t(raw[4 * i + 2]) << 16 |
                                       std::uint32_t(raw[4 * i + 3]) << 24;
            float f;
            std::memcpy(&f, &bits, sizeof f);
            table->values_[i] = f;
        }
        return table;
    }

    /// $JSAR_CN_TABLE if set, otherwise the path baked in at build time.
    static std::filesystem::path default_path() {
        if (const char* env = std::getenv("JSAR_CN_TABLE"); env && *env) return env;
        return JSAR_CN_TABLE_PATH;
    }

    static std::shared_ptr<const ColorNameTable> load_default() { return load(default_path()); }

    static int index(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
        return (r >> 3) + 32 * (g >> 3) + 1024 * (b >> 3);
    }

    const float* row(int idx) const { return values_.data() + static_cast<std::size_t>(idx) * kColorNameChannels; }
    const float* row(std::uint8_t r, std::uint8_t g, std::uint8_t b) const { return row(index(r, g, b)); }

    static const std::array<std::array<double, kColorNameChannels>, kColorNameCount>& basis() {
        static const auto B = [] {
            const double s2 = std::sqrt(0.5), s8 = std::sqrt(1.0 / 8.0);
            const double big = std::sqrt(3.0 / 88.0), small = -std::sqrt(8.0 / 33.0);
            std::array<std::array<double, kColorNameChannels>, kColorNameCount> b{};
            auto set = [&](int leaf, std::initializer_list<std::pair<int, double>> e) {
                for (auto [col, v] : e) b[leaf][col] = v;
            };
            set(0, {{2, s2}, {7, 0.5}, {8, -s8}, {9, big}});
            set(1, {{2, -s2}, {7, 0.5}, {8, -s8}, {9, big}});
            set(2, {{3, s2}, {7, -0.5}, {8, -s8}, {9, big}});
            set(3, {{3, -s2}, {7, -0.5}, {8, -s8}, {9, big}});
            set(4, {{0, s2}, {6, 0.5}, {8, s8}, {9, big}});
            set(5, {{0, -s2}, {6, 0.5}, {8, s8}, {9, big}});
            set(6, {{1, s2}, {6, -0.5}, {8, s8}, {9, big}});
            set(7, {{1, -s2}, {6, -0.5}, {8, s8}, {9, big}});
            set(8, {{5, -std::sqrt(2.0 / 3.0)}, {9, small}});
            set(9, {{4, s2}, {5, std::sqrt(1.0 / 6.0)}, {9, small}});
            set(10, {{4, -s2}, {5, std::sqrt(1.0 / 6.0)}, {9, small}});
            return b;
        }();
        return B;
    }

    std::array<double, kColorNameCount> probabilities(std::uint8_t r, std::uint8_t g, std::uint8_t b) const {
        const float* y = row(r, g, b);
        std::array<double, kColorNameCount> p{};
        for (int k = 0; k < kColorNameCount; ++k) {
            double v = 1.0 / kColorNameCount;
            for (int j = 0; j < kColorNameChannels; ++j) v += basis()[k][j] * y[j];
            p[k] = v;
        }
        return p;
    }

private:
    ColorNameTable() = default;
    std::vector<float> values_;
};

namespace detail {
inline std::uint8_t quantise(double v) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}
}  // namespace detail

/// Per-cell average of the projected colour-names rows (10 channels). The
/// projection removes the constant component of the name probabilities, so
/// the channels need no further centring.
inline FeatureStack cn_features(const Patch& patch, int cell, const ColorNameTable& table) {
    detail::require_divisible(patch.width, cell, "width");
    detail::require_divisible(patch.height, cell, "height");
    const int M = patch.height / cell, N = patch.width / cell;
    FeatureStack out;
    out.cell_size = cell;
    out.channels.assign(kColorNameChannels, RealPlane(M, N, 0.0));
    out.kinds.assign(kColorNameChannels, ChannelKind::ColorName);
    for (int y = 0; y < patch.height; ++y)
        for (int x = 0; x < patch.width; ++x) {
            const double* px = patch.at(x, y);
            const float* v = table.row(detail::quantise(px[0]), detail::quantise(px[1]), detail::quantise(px[2]));
            for (int k = 0; k < kColorNameChannels; ++k) out.channels[k](y / cell, x / cell) += v[k];
        }
    const double scale = 1.0 / (cell * cell);
    for (auto& ch : out.channels)
        for (auto& v : ch.values()) v *= scale;
    return out;
}

/// Per-cell mean of the 11 name probabilities (the unprojected view).
inline std::vector<RealPlane> cn_probabilities(const Patch& patch, int cell, const ColorNameTable& table) {
    detail::require_divisible(patch.width, cell, "width");
    detail::require_divisible(patch.height, cell, "height");
    const int M = patch.height / cell, N = patch.width / cell;
    std::vector<RealPlane> out(kColorNameCount, RealPlane(M, N, 0.0));
    for (int y = 0; y < patch.height; ++y)
        for (int x = 0; x < patch.width; ++x) {
            const double* px = patch.at(x, y);
            const auto p = table.probabilities(detail::quantise(px[0]), detail::quantise(px[1]),
                                               detail::quantise(px[2]));
            for (int k = 0; k < kColorNameCount; ++k) out[k](y / cell, x / cell) += p[k];
        }
    for (auto& ch : out)
        for (auto& v : ch.values()) v /= cell * cell;
    return out;
}

/// Geometry of the translation sample: the ROI (in frame pixels) is resampled
/// to a fixed template so the model keeps its shape as the target changes size.
struct TranslationGeometry {
    int template_w = 0;  // px, multiple of cell_size
    int template_h = 0;
    int cell_size = 4;
    RealPlane window;  // Hann over the cell grid

    int rows() const { return template_h / cell_size; }
    int cols() const { return template_w / cell_size; }
};

/// Gray (1) + HOG (31) + CN (10) on the ROI, each channel multiplied by the
/// geometry's window.
inline FeatureStack translation_features(const Frame& frame, Point2 center, Size2 roi_size,
                                         const TranslationGeometry& geo, const ColorNameTable& table) {
    const Patch patch = extract_patch(frame, center, roi_size, geo.template_w, geo.template_h);
    FeatureStack out = gray_channel(patch, geo.cell_size);
    out.append(hog_features(patch, geo.cell_size));
    out.append(cn_features(patch, geo.cell_size, table));
    for (auto& ch : out.channels) {
        require_same_shape(ch, geo.window, "translation window");
        for (std::size_t i = 0; i < ch.size(); ++i) ch.data()[i] *= geo.window.data()[i];
    }
    return out;
}

/// HOG of the patch resampled to model_w x model_h, flattened row-major over
/// cells with the channel index varying fastest: element (r, c, k) sits at
/// (r * cols + c) * 31 + k. Length model_w * model_h * 31 / cell^2.
inline std::vector<double> size_feature_vector(const Frame& frame, Point2 center, Size2 patch_size,
                                               int model_w, int model_h, int cell) {
    const Patch patch = extract_patch(frame, center, patch_size, model_w, model_h);
    const FeatureStack hog = hog_features(patch, cell);
    const int M = hog.rows(), N = hog.cols();
    std::vector<double> v(static_cast<std::size_t>(M) * N * kHogChannels);
    for (int r = 0; r < M; ++r)
        for (int c = 0; c < N; ++c)
            for (int k = 0; k < kHogChannels; ++k)
                v[(static_cast<std::size_t>(r) * N + c) * kHogChannels + k] = hog.channels[k](r, c);
    return v;
}

inline int size_channel_count(int model_w, int model_h, int cell) {
    return model_w * model_h * kHogChannels / (cell * cell);
}

}  // namespace jsar
