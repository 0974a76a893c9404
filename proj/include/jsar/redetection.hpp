#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "jsar/config.hpp"
#include "jsar/error.hpp"
#include "jsar/geometry.hpp"
#include "jsar/image.hpp"
#include "jsar/plane.hpp"
#include "jsar/translation_filter.hpp"

namespace jsar {

inline bool monitor(double zeta, double zeta_e) { return zeta < zeta_e; }
inline bool should_update_decision(double zeta, double zeta_s) { return zeta > zeta_s; }
inline bool decide_reinit(double eta_b, double eta_d) { return eta_b > eta_d; }

struct Proposal {
    double x = 0.0, y = 0.0, w = 0.0, h = 0.0;
    double k = 0.0;

    Rect rect() const { return {x, y, w, h}; }
    Bbox4DoF box() const { return Bbox4DoF::from_rect(rect()); }
};

// ---------------------------------------------------------------- escalation

struct RedetectState {
    bool active = false;
    double omega = 5.0;
    double eta_d = 0.02;
    int failed_frames = 0;

    static RedetectState from(const TrackerConfig& cfg) { return {false, cfg.omega, cfg.eta_d, 0}; }
};

struct EscalationLimits {
    double omega_growth = 1.1;
    double eta_d_decay = 0.9;
    double omega_max = 1e9;
    double eta_d_floor = 1e-4;
};

/// The largest useful omega: a square of side omega * sqrt(w h) wide enough to
/// cover the whole frame from any centre.
inline double omega_cover(const Frame& frame, const Bbox4DoF& box) {
    return 2.0 * std::max(frame.width, frame.height) / std::sqrt(box.w * box.h);
}

inline RedetectState escalate(RedetectState s, const EscalationLimits& lim) {
    s.omega = std::min(std::max(s.omega, s.omega * lim.omega_growth), std::max(s.omega, lim.omega_max));
    s.eta_d = std::max(s.eta_d * lim.eta_d_decay, std::min(s.eta_d, lim.eta_d_floor));
    ++s.failed_frames;
    return s;
}

// ------------------------------------------------------------------ edge map

struct EdgeGroup {
    int label = 0;
    double magnitude = 0.0;  // summed over member pixels
    double orientation = 0.0;  // seed orientation, radians in [0, pi)
    int pixels = 0;
    // Frame-coordinate pixel extent, inclusive.
    int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
};

struct EdgeMap {
    Rect region;  // integer-aligned frame rectangle the map covers
    RealPlane magnitude;
    RealPlane orientation;
    Plane<int> labels;  // 0 = no edge, else 1-based group label
    std::vector<EdgeGroup> groups;  // groups[i].label == i + 1
};

namespace detail {

inline double orientation_distance(double a, double b) {
    const double d = std::fabs(a - b);
    return std::min(d, std::numbers::pi - d);
}

inline Rect integer_region(const Frame& frame, const Rect& r) {
    const int x0 = std::clamp(static_cast<int>(std::floor(r.x)), 0, frame.width - 1);
    const int y0 = std::clamp(static_cast<int>(std::floor(r.y)), 0, frame.height - 1);
    const int x1 = std::clamp(static_cast<int>(std::ceil(r.x + r.w)), x0 + 1, frame.width);
    const int y1 = std::clamp(static_cast<int>(std::ceil(r.y + r.h)), y0 + 1, frame.height);
    return {static_cast<double>(x0), static_cast<double>(y0), static_cast<double>(x1 - x0),
            static_cast<double>(y1 - y0)};
}

}  // namespace detail

/// Sobel gradients on luminance (unit range), non-maximum suppression along
/// the gradient, a 10%-of-max threshold, then greedy 8-connected grouping of
/// pixels whose orientation stays within pi/8 of the group's seed.
inline EdgeMap build_edge_map(const Frame& frame, const Rect& region_in) {
    EdgeMap em;
    em.region = detail::integer_region(frame, region_in);
    const int ox = static_cast<int>(em.region.x), oy = static_cast<int>(em.region.y);
    const int W = static_cast<int>(em.region.w), H = static_cast<int>(em.region.h);
    em.magnitude = RealPlane(H, W, 0.0);
    em.orientation = RealPlane(H, W, 0.0);
    em.labels = Plane<int>(H, W, 0);

    auto lum = [&](int x, int y) {
        x = std::clamp(x, 0, frame.width - 1);
        y = std::clamp(y, 0, frame.height - 1);
        const auto* p = frame.at(x, y);
        return (0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2]) / 255.0;
    };
    RealPlane gx(H, W, 0.0), gy(H, W, 0.0), mag(H, W, 0.0);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            const int fx = ox + x, fy = oy + y;
            const double a = lum(fx - 1, fy - 1), b = lum(fx, fy - 1), c = lum(fx + 1, fy - 1);
            const double d = lum(fx - 1, fy), f = lum(fx + 1, fy);
            const double g = lum(fx - 1, fy + 1), h = lum(fx, fy + 1), i = lum(fx + 1, fy + 1);
            gx(y, x) = (c + 2 * f + i) - (a + 2 * d + g);
            gy(y, x) = (g + 2 * h + i) - (a + 2 * b + c);
            mag(y, x) = std::hypot(gx(y, x), gy(y, x));
        }

    double peak = 0.0;
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            const double m = mag(y, x);
            if (m <= 0.0) continue;
            // Quantise the gradient direction to one of four neighbour axes.
            double ang = std::atan2(gy(y, x), gx(y, x));
            if (ang < 0) ang += std::numbers::pi;
            int dx = 1, dy = 0;
            if (ang >= std::numbers::pi / 8 && ang < 3 * std::numbers::pi / 8) dx = 1, dy = 1;
            else if (ang >= 3 * std::numbers::pi / 8 && ang < 5 * std::numbers::pi / 8) dx = 0, dy = 1;
            else if (ang >= 5 * std::numbers::pi / 8 && ang < 7 * std::numbers::pi / 8) dx = -1, dy = 1;
            auto at = [&](int xx, int yy) {
                return (xx < 0 || yy < 0 || xx >= W || yy >= H) ? 0.0 : mag(yy, xx);
            };
            // Ties resolved towards the earlier pixel so plateaus stay one pixel thick.
            if (m < at(x + dx, y + dy) || m <= at(x - dx, y - dy)) continue;
            em.magnitude(y, x) = m;
            em.orientation(y, x) = ang >= std::numbers::pi ? 0.0 : ang;
            peak = std::max(peak, m);
        }
    const double thr = 0.1 * peak;
    for (auto& v : em.magnitude.values())
        if (v < thr) v = 0.0;
    if (peak <= 0.0) return em;

    std::vector<std::pair<int, int>> stack;
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            if (em.magnitude(y, x) <= 0.0 || em.labels(y, x) != 0) continue;
            EdgeGroup g;
            g.label = static_cast<int>(em.groups.size()) + 1;
            g.orientation = em.orientation(y, x);
            g.x0 = g.x1 = ox + x;
            g.y0 = g.y1 = oy + y;
            em.labels(y, x) = g.label;
            stack.assign(1, {x, y});
            while (!stack.empty()) {
                const auto [cx, cy] = stack.back();
                stack.pop_back();
                g.magnitude += em.magnitude(cy, cx);
                ++g.pixels;
                g.x0 = std::min(g.x0, ox + cx), g.x1 = std::max(g.x1, ox + cx);
                g.y0 = std::min(g.y0, oy + cy), g.y1 = std::max(g.y1, oy + cy);
                for (int ny = cy - 1; ny <= cy + 1; ++ny)
                    for (int nx = cx - 1; nx <= cx + 1; ++nx) {
                        if (nx < 0 || ny < 0 || nx >= W || ny >= H) continue;
                        if (em.labels(ny, nx) != 0 || em.magnitude(ny, nx) <= 0.0) continue;
                        if (detail::orientation_distance(em.orientation(ny, nx), g.orientation) >=
                            std::numbers::pi / 8)
                            continue;
                        em.labels(ny, nx) = g.label;
                        stack.emplace_back(nx, ny);
                    }
            }
            em.groups.push_back(g);
        }
    return em;
}

// ----------------------------------------------------------------- proposals

struct ProposalSweep {
    std::vector<double> scales{0.8, 1.0, 1.25};
    std::vector<double> aspects{0.75, 1.0, 1.33};
    double base_stride = 4.0;  // px at a 32 px box, grows with box size
    // Coarse pass over the whole region: squares relative to sqrt(w h), moved
    // by a quarter of their side.
    std::vector<double> coarse_scales{0.5, 2.0};
    double nms_iou = 0.75;
};

/// Boxes scoring at least zero objectness. Groups spanning at most
/// `kSmall` x `kSmall` pixels go into one summed-area table per extent, keyed
/// by their top-left pixel, so a box reads them with two rectangle sums per
/// extent. Larger groups are bucketed on a coarse grid.
class ObjectnessScorer {
public:
    static constexpr int kSmall = 3;

    explicit ObjectnessScorer(const EdgeMap& em, int bucket = 16) : em_(em), bucket_(bucket) {
        ox_ = static_cast<int>(em.region.x), oy_ = static_cast<int>(em.region.y);
        W_ = static_cast<int>(em.region.w), H_ = static_cast<int>(em.region.h);
        bw_ = W_ / bucket_ + 1;
        bh_ = H_ / bucket_ + 1;
        buckets_.assign(static_cast<std::size_t>(bw_) * bh_, {});
        tables_.assign(kSmall * kSmall, {});
        for (std::size_t i = 0; i < em.groups.size(); ++i) {
            const auto& g = em.groups[i];
            const int cw = g.x1 - g.x0, ch = g.y1 - g.y0;
            if (cw < kSmall && ch < kSmall) {
                auto& tab = tables_[ch * kSmall + cw];
                if (tab.empty()) tab.assign(static_cast<std::size_t>(W_ + 1) * (H_ + 1), 0.0);
                tab[static_cast<std::size_t>(g.y0 - oy_ + 1) * (W_ + 1) + (g.x0 - ox_ + 1)] += g.magnitude;
                continue;
            }
            for (int by = (g.y0 - oy_) / bucket_; by <= (g.y1 - oy_) / bucket_; ++by)
                for (int bx = (g.x0 - ox_) / bucket_; bx <= (g.x1 - ox_) / bucket_; ++bx)
                    buckets_[static_cast<std::size_t>(by) * bw_ + bx].push_back(static_cast<int>(i));
        }
        for (auto& tab : tables_) {
            if (tab.empty()) continue;
            for (int y = 1; y <= H_; ++y)
                for (int x = 1; x <= W_; ++x)
                    tab[y * (W_ + 1) + x] += tab[(y - 1) * (W_ + 1) + x] + tab[y * (W_ + 1) + x - 1] -
                                             tab[(y - 1) * (W_ + 1) + x - 1];
        }
        seen_.assign(em.groups.size(), -1);
    }

    /// Enclosed minus straddling edge mass, floored at zero, over (2(w+h))^1.5.
    /// A group is enclosed when every member pixel centre lies inside the box.
    double score(const Rect& r) {
        ++stamp_;
        double inside = 0.0, straddle = 0.0;
        const double rx1 = r.x + r.w, ry1 = r.y + r.h;

        // Pixel p has centre p + 0.5, so it lies in [r.x, rx1] iff lo <= p <= hi.
        const int lo_x = static_cast<int>(std::ceil(r.x - 0.5)) - ox_, hi_x = static_cast<int>(std::floor(rx1 - 0.5)) - ox_;
        const int lo_y = static_cast<int>(std::ceil(r.y - 0.5)) - oy_, hi_y = static_cast<int>(std::floor(ry1 - 0.5)) - oy_;
        for (int ch = 0; ch < kSmall; ++ch)
            for (int cw = 0; cw < kSmall; ++cw) {
                const auto& tab = tables_[ch * kSmall + cw];
                if (tab.empty()) continue;
                const double enclosed = table_sum(tab, lo_x, hi_x - cw, lo_y, hi_y - ch);
                inside += enclosed;
                straddle += table_sum(tab, lo_x - cw, hi_x, lo_y - ch, hi_y) - enclosed;
            }

        const int bx0 = std::clamp(static_cast<int>(std::floor(r.x - ox_)) / bucket_, 0, bw_ - 1);
        const int by0 = std::clamp(static_cast<int>(std::floor(r.y - oy_)) / bucket_, 0, bh_ - 1);
        const int bx1 = std::clamp(static_cast<int>(std::floor(rx1 - ox_)) / bucket_, 0, bw_ - 1);
        const int by1 = std::clamp(static_cast<int>(std::floor(ry1 - oy_)) / bucket_, 0, bh_ - 1);
        for (int by = by0; by <= by1; ++by)
            for (int bx = bx0; bx <= bx1; ++bx)
                for (int gi : buckets_[static_cast<std::size_t>(by) * bw_ + bx]) {
                    if (seen_[gi] == stamp_) continue;
                    seen_[gi] = stamp_;
                    const auto& g = em_.groups[gi];
                    const double gx0 = g.x0 + 0.5, gx1 = g.x1 + 0.5, gy0 = g.y0 + 0.5, gy1 = g.y1 + 0.5;
                    if (gx1 < r.x || gx0 > rx1 || gy1 < r.y || gy0 > ry1) continue;
                    if (gx0 >= r.x && gx1 <= rx1 && gy0 >= r.y && gy1 <= ry1)
                        inside += g.magnitude;
                    else
                        straddle += g.magnitude;
                }
        return std::max(0.0, inside - straddle) / std::pow(2.0 * (r.w + r.h), 1.5);
    }

private:
    // Sum over local top-left pixels x in [x0, x1], y in [y0, y1].
    double table_sum(const std::vector<double>& tab, int x0, int x1, int y0, int y1) const {
        x0 = std::max(x0, 0), y0 = std::max(y0, 0);
        x1 = std::min(x1, W_ - 1), y1 = std::min(y1, H_ - 1);
        if (x1 < x0 || y1 < y0) return 0.0;
        const auto at = [&](int x, int y) { return tab[static_cast<std::size_t>(y) * (W_ + 1) + x]; };
        return at(x1 + 1, y1 + 1) - at(x0, y1 + 1) - at(x1 + 1, y0) + at(x0, y0);
    }

    const EdgeMap& em_;
    int bucket_;
    int ox_ = 0, oy_ = 0, W_ = 0, H_ = 0, bw_ = 1, bh_ = 1;
    std::vector<std::vector<double>> tables_;
    std::vector<std::vector<int>> buckets_;
    std::vector<int> seen_;
    int stamp_ = 0;
};

/// Search square of side omega * sqrt(w h) around the box centre, clipped to
/// the frame.
inline Rect search_region(const Frame& frame, const Bbox4DoF& last, double omega) {
    const double side = omega * std::sqrt(last.w * last.h);
    const double x0 = std::max(0.0, last.cx - side / 2), y0 = std::max(0.0, last.cy - side / 2);
    const double x1 = std::min<double>(frame.width, last.cx + side / 2);
    const double y1 = std::min<double>(frame.height, last.cy + side / 2);
    if (!(x1 > x0) || !(y1 > y0)) return {0, 0, 0, 0};
    return {x0, y0, x1 - x0, y1 - y0};
}

inline std::vector<Proposal> generate_proposals(const Frame& frame, const Bbox4DoF& last, double omega, int N_e,
                                                const ProposalSweep& sweep = {}) {
    require_valid(last, "proposal generation");
    if (!(omega > 0.0)) throw Error(ErrorKind::InvalidArgument, "proposal generation: omega must be positive");
    if (N_e < 1) throw Error(ErrorKind::InvalidArgument, "proposal generation: N_e must be >= 1");
    const Rect region = search_region(frame, last, omega);
    if (!(region.w >= 1.0) || !(region.h >= 1.0)) return {};

    const EdgeMap em = build_edge_map(frame, region);
    ObjectnessScorer scorer(em);
    std::vector<Proposal> cands;

    auto sweep_shape = [&](double bw, double bh, double stride) {
        if (bw > region.w || bh > region.h || bw < 1.0 || bh < 1.0) return;
        const int nx = static_cast<int>(std::floor((region.w - bw) / stride)) + 1;
        const int ny = static_cast<int>(std::floor((region.h - bh) / stride)) + 1;
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                const Rect r{region.x + i * stride, region.y + j * stride, bw, bh};
                cands.push_back({r.x, r.y, r.w, r.h, scorer.score(r)});
            }
    };
    for (double s : sweep.scales)
        for (double a : sweep.aspects) {
            const double bw = last.w * s * std::sqrt(a), bh = last.h * s / std::sqrt(a);
            sweep_shape(bw, bh, sweep.base_stride * std::max(1.0, std::sqrt(bw * bh) / 32.0));
        }
    const double extent = std::sqrt(last.w * last.h);
    for (double f : sweep.coarse_scales)
        sweep_shape(extent * f, extent * f, std::max(sweep.base_stride, extent * f / 4));

    std::stable_sort(cands.begin(), cands.end(), [](const Proposal& a, const Proposal& b) { return a.k > b.k; });
    std::vector<Proposal> out;
    for (const auto& c : cands) {
        if (static_cast<int>(out.size()) >= N_e) break;
        bool suppressed = false;
        for (const auto& o : out)
            if (iou(c.rect(), o.rect()) > sweep.nms_iou) {
                suppressed = true;
                break;
            }
        if (!suppressed) out.push_back(c);
    }
    return out;
}

// ------------------------------------------------------------------- scoring

struct ScoredProposal {
    std::size_t index = 0;
    Proposal best;
    double eta_b = 0.0;
    Bbox4DoF refined;  // proposal box moved by its response-peak offset
    std::vector<double> peaks;
};

/// Correlates the decision model with translation features at each proposal.
/// Ties in peak value go to the higher objectness, then the earlier entry.
inline ScoredProposal score_proposals(const FilterModel& decision, const TranslationFilter& geometry,
                                      const Frame& frame, const std::vector<Proposal>& proposals) {
    if (proposals.empty()) throw Error(ErrorKind::InvalidArgument, "score_proposals: no proposals");
    ScoredProposal out;
    out.peaks.reserve(proposals.size());
    DetectionOutcome best_det;
    for (std::size_t i = 0; i < proposals.size(); ++i) {
        const auto b = proposals[i].box();
        auto det = geometry.detect_with(decision, frame, b.center(), b.size());
        out.peaks.push_back(det.peak_value);
        const bool better = i == 0 || det.peak_value > out.eta_b ||
                            (det.peak_value == out.eta_b && proposals[i].k > out.best.k);
        if (better) {
            out.index = i;
            out.best = proposals[i];
            out.eta_b = det.peak_value;
            best_det = std::move(det);
        }
    }
    const auto b = out.best.box();
    out.refined = {best_det.new_center.x, best_det.new_center.y, b.w, b.h};
    return out;
}

}  // namespace jsar
