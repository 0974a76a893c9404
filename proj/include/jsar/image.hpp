#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "jsar/error.hpp"
#include "jsar/geometry.hpp"

namespace jsar {

/// 8-bit RGB image, interleaved, row-major.
struct Frame {
    int width = 0;
    int height = 0;
    int index = 0;
    std::vector<std::uint8_t> rgb;

    Frame() = default;
    Frame(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3, fill) {
        if (w < 1 || h < 1) throw Error(ErrorKind::InvalidArgument, "frame must be at least 1x1");
    }

    std::uint8_t* at(int x, int y) { return rgb.data() + (static_cast<std::size_t>(y) * width + x) * 3; }
    const std::uint8_t* at(int x, int y) const {
        return rgb.data() + (static_cast<std::size_t>(y) * width + x) * 3;
    }

    friend bool operator==(const Frame&, const Frame&) = default;
};

/// Resampled crop; channel values are in [0, 255] but not quantised.
struct Patch {
    int width = 0;
    int height = 0;
    Rect source;
    std::vector<double> rgb;

    const double* at(int x, int y) const {
        return rgb.data() + (static_cast<std::size_t>(y) * width + x) * 3;
    }
    double* at(int x, int y) { return rgb.data() + (static_cast<std::size_t>(y) * width + x) * 3; }
};

/// Crops the w x h window centred at `center`, replicating border pixels where
/// it leaves the frame, and resamples it bilinearly (no prefilter) to
/// out_w x out_h. Output pixel j samples source x = left + (j + 0.5) * w / out_w.
inline Patch extract_patch(const Frame& frame, Point2 center, Size2 size, int out_w, int out_h) {
    if (!(size.w > 0.0) || !(size.h > 0.0) || out_w < 1 || out_h < 1)
        throw Error(ErrorKind::InvalidArgument, "extract_patch needs positive sizes");
    if (!std::isfinite(center.x) || !std::isfinite(center.y))
        throw Error(ErrorKind::InvalidArgument, "extract_patch centre must be finite");
    Patch p;
    p.width = out_w;
    p.height = out_h;
    p.source = {center.x - size.w / 2.0, center.y - size.h / 2.0, size.w, size.h};
    p.rgb.resize(static_cast<std::size_t>(out_w) * out_h * 3);

    const double sx = size.w / out_w, sy = size.h / out_h;
    const int W = frame.width, H = frame.height;

    // Per-column sample positions are shared by every row.
    std::vector<int> x0(out_w), x1(out_w);
    std::vector<double> fx(out_w);
    for (int j = 0; j < out_w; ++j) {
        const double xs = p.source.x + (j + 0.5) * sx - 0.5;
        const double fl = std::floor(xs);
        fx[j] = xs - fl;
        const double a = std::clamp(fl, 0.0, W - 1.0), b = std::clamp(fl + 1.0, 0.0, W - 1.0);
        x0[j] = static_cast<int>(a);
        x1[j] = static_cast<int>(b);
    }
    for (int i = 0; i < out_h; ++i) {
        const double ys = p.source.y + (i + 0.5) * sy - 0.5;
        const double fl = std::floor(ys);
        const double fy = ys - fl;
        const int y0 = static_cast<int>(std::clamp(fl, 0.0, H - 1.0));
        const int y1 = static_cast<int>(std::clamp(fl + 1.0, 0.0, H - 1.0));
        double* out = p.at(0, i);
        for (int j = 0; j < out_w; ++j) {
            const std::uint8_t* a = frame.at(x0[j], y0);
            const std::uint8_t* b = frame.at(x1[j], y0);
            const std::uint8_t* c = frame.at(x0[j], y1);
            const std::uint8_t* d = frame.at(x1[j], y1);
            const double wx = fx[j];
            for (int k = 0; k < 3; ++k) {
                const double top = a[k] + (b[k] - a[k]) * wx;
                const double bot = c[k] + (d[k] - c[k]) * wx;
                out[j * 3 + k] = top + (bot - top) * fy;
            }
        }
    }
    return p;
}

inline Frame load_image(const std::filesystem::path& path) {
    cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
    if (bgr.empty()) throw Error(ErrorKind::Io, "cannot read image " + path.string());
    Frame f(bgr.cols, bgr.rows);
    for (int y = 0; y < bgr.rows; ++y) {
        const auto* row = bgr.ptr<cv::Vec3b>(y);
        for (int x = 0; x < bgr.cols; ++x) {
            auto* px = f.at(x, y);
            px[0] = row[x][2];
            px[1] = row[x][1];
            px[2] = row[x][0];
        }
    }
    return f;
}

/// PNG or BMP, chosen by extension.
inline void save_image(const std::filesystem::path& path, const Frame& f) {
    const auto ext = path.extension().string();
    if (ext != ".png" && ext != ".bmp")
        throw Error(ErrorKind::InvalidArgument, "only .png and .bmp output is supported: " + path.string());
    cv::Mat bgr(f.height, f.width, CV_8UC3);
    for (int y = 0; y < f.height; ++y) {
        auto* row = bgr.ptr<cv::Vec3b>(y);
        for (int x = 0; x < f.width; ++x) {
            const auto* px = f.at(x, y);
            row[x] = cv::Vec3b(px[2], px[1], px[0]);
        }
    }
    if (!cv::imwrite(path.string(), bgr)) throw Error(ErrorKind::Io, "cannot write image " + path.string());
}

/// Burns an axis-aligned outline into the frame, clipped to its bounds.
inline void draw_rect(Frame& f, const Rect& r, std::array<std::uint8_t, 3> color, int thickness = 2) {
    const int x0 = static_cast<int>(std::lround(r.x)), y0 = static_cast<int>(std::lround(r.y));
    const int x1 = static_cast<int>(std::lround(r.x + r.w)) - 1;
    const int y1 = static_cast<int>(std::lround(r.y + r.h)) - 1;
    auto put = [&](int x, int y) {
        if (x < 0 || y < 0 || x >= f.width || y >= f.height) return;
        auto* px = f.at(x, y);
        px[0] = color[0];
        px[1] = color[1];
        px[2] = color[2];
    };
    for (int t = 0; t < thickness; ++t) {
        for (int x = x0; x <= x1; ++x) {
            put(x, y0 + t);
            put(x, y1 - t);
        }
        for (int y = y0; y <= y1; ++y) {
            put(x0 + t, y);
            put(x1 - t, y);
        }
    }
}

}  // namespace jsar
