#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "jsar/error.hpp"

namespace jsar {

// Continuous image coordinates: pixel (i, j) covers [j, j+1) x [i, i+1), so a
// W x H frame spans [0, W] x [0, H] and its centre is (W/2, H/2).

struct Point2 {
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const Point2&, const Point2&) = default;
};

struct Size2 {
    double w = 0.0;
    double h = 0.0;
    friend bool operator==(const Size2&, const Size2&) = default;
};

/// Axis-aligned rectangle, top-left convention (ground-truth files use it).
struct Rect {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;
    friend bool operator==(const Rect&, const Rect&) = default;
};

/// Tracker state: centre and extent.
struct Bbox4DoF {
    double cx = 0.0;
    double cy = 0.0;
    double w = 0.0;
    double h = 0.0;

    Point2 center() const { return {cx, cy}; }
    Size2 size() const { return {w, h}; }
    Rect rect() const { return {cx - w / 2.0, cy - h / 2.0, w, h}; }

    static Bbox4DoF from_rect(const Rect& r) { return {r.x + r.w / 2.0, r.y + r.h / 2.0, r.w, r.h}; }

    bool valid() const {
        return std::isfinite(cx) && std::isfinite(cy) && std::isfinite(w) && std::isfinite(h) &&
               w > 0.0 && h > 0.0;
    }

    friend bool operator==(const Bbox4DoF&, const Bbox4DoF&) = default;
};

inline void require_valid(const Bbox4DoF& b, const char* what) {
    if (!b.valid())
        throw Error(ErrorKind::InvalidArgument,
                    std::string(what) + ": degenerate box (w=" + std::to_string(b.w) +
                        ", h=" + std::to_string(b.h) + ")");
}

inline double area(const Rect& r) { return std::max(0.0, r.w) * std::max(0.0, r.h); }

inline double intersection_area(const Rect& a, const Rect& b) {
    const double iw = std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x);
    const double ih = std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y);
    return (iw > 0.0 && ih > 0.0) ? iw * ih : 0.0;
}

inline double iou(const Rect& a, const Rect& b) {
    const double inter = intersection_area(a, b);
    const double uni = area(a) + area(b) - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

inline double center_error(const Rect& a, const Rect& b) {
    const double dx = (a.x + a.w / 2.0) - (b.x + b.w / 2.0);
    const double dy = (a.y + a.h / 2.0) - (b.y + b.h / 2.0);
    return std::hypot(dx, dy);
}

}  // namespace jsar
