#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "jsar/config.hpp"
#include "jsar/features.hpp"
#include "jsar/geometry.hpp"
#include "jsar/image.hpp"
#include "jsar/spectral.hpp"

namespace jsar {

struct DetectionOutcome {
    Point2 new_center;
    Point2 displacement;  // frame px, sub-pixel refined
    double peak_value = 0.0;
    PeakLocation peak;  // on the response grid (template px), unrefined
    RealPlane response;
};

/// Fixed translation-sample geometry derived from the first target box: the
/// ROI keeps `roi_area_factor` times the target area and is resampled to a
/// template of roughly `template_area` px whose sides are multiples of C.
struct TranslationSetup {
    TranslationGeometry geometry;
    double padding = 2.0;  // ROI side / target side
    ComplexSpectrum label_spectrum;
    RealPlane label;  // peak at the origin

    static TranslationSetup make(const Bbox4DoF& box, const TrackerConfig& cfg) {
        require_valid(box, "translation setup");
        TranslationSetup s;
        s.padding = std::sqrt(cfg.roi_area_factor);
        const double roi_w = box.w * s.padding, roi_h = box.h * s.padding;
        const double scale = std::sqrt(cfg.template_area / (roi_w * roi_h));
        auto snap = [&](double px) {
            return std::max(3, static_cast<int>(std::lround(px / cfg.C))) * cfg.C;
        };
        auto& g = s.geometry;
        g.cell_size = cfg.C;
        g.template_w = snap(roi_w * scale);
        g.template_h = snap(roi_h * scale);
        g.window = hann_window(g.rows(), g.cols());
        // Target extent in template cells.
        const double extent = std::sqrt(box.w * box.h) * scale / cfg.C;
        s.label = shift_to_origin(gaussian_label(g.rows(), g.cols(), cfg.sigma_trans, extent));
        s.label_spectrum = dft2(s.label);
        return s;
    }

    Size2 roi_size(Size2 target) const { return {target.w * padding, target.h * padding}; }
};

namespace detail {

/// Vertex offset of the parabola through (-1, a), (0, b), (1, c), in [-0.5, 0.5].
inline double parabola_offset(double a, double b, double c) {
    const double den = a - 2.0 * b + c;
    if (!(den < 0.0)) return 0.0;
    return std::clamp(0.5 * (a - c) / den, -0.5, 0.5);
}

inline int wrap_signed(int idx, int n) { return idx > (n - 1) / 2 ? idx - n : idx; }

}  // namespace detail

/// Locates the response peak, refines it with per-axis parabolas through its
/// cyclic neighbours and converts the offset from template px to frame px.
inline DetectionOutcome locate_peak(RealPlane response, Point2 prev_center, Size2 roi,
                                    const TranslationGeometry& geo) {
    DetectionOutcome out;
    out.peak = argmax(response);
    out.peak_value = out.peak.value;
    const int R = response.rows(), C = response.cols();
    const int r = out.peak.row, c = out.peak.col;
    const double dr = detail::parabola_offset(response((r - 1 + R) % R, c), response(r, c),
                                              response((r + 1) % R, c));
    const double dc = detail::parabola_offset(response(r, (c - 1 + C) % C), response(r, c),
                                              response(r, (c + 1) % C));
    const double ty = detail::wrap_signed(r, R) + dr;
    const double tx = detail::wrap_signed(c, C) + dc;
    out.displacement = {tx * roi.w / geo.template_w, ty * roi.h / geo.template_h};
    out.new_center = {prev_center.x + out.displacement.x, prev_center.y + out.displacement.y};
    out.response = std::move(response);
    return out;
}

/// Response of `model` on the ROI centred at `center`, sampled on the template
/// pixel grid (C times the cell resolution per axis).
inline RealPlane pixel_response(const FilterModel& model, const FeatureStack& features, int cell) {
    return upsample_response(response_spectrum(model, dft2(features.channels)), cell, cell);
}

/// Space-domain filter: learns the target appearance on the padded ROI and
/// localises it as the peak of the correlation response.
class TranslationFilter {
public:
    TranslationFilter(const TranslationSetup& setup, std::shared_ptr<const ColorNameTable> table,
                      double lambda)
        : setup_(setup), table_(std::move(table)), lambda_(lambda) {
        if (!table_) throw Error(ErrorKind::Resource, "translation filter needs a colour-names table");
    }

    static TranslationFilter init(const Frame& frame, const Bbox4DoF& box, const TrackerConfig& cfg,
                                  std::shared_ptr<const ColorNameTable> table) {
        TranslationFilter f(TranslationSetup::make(box, cfg), std::move(table), cfg.lambda);
        f.model_ = f.train(frame, box);
        return f;
    }

    FeatureStack features(const Frame& frame, Point2 center, Size2 target) const {
        return translation_features(frame, center, setup_.roi_size(target), setup_.geometry, *table_);
    }

    /// Fresh single-frame model at `box` (not yet blended into the state).
    FilterModel train(const Frame& frame, const Bbox4DoF& box) const {
        require_valid(box, "translation train");
        const FeatureStack x = features(frame, box.center(), box.size());
        return train_filter(dft2(x.channels), setup_.label_spectrum, lambda_);
    }

    DetectionOutcome detect(const Frame& frame, Point2 prev_center, Size2 current_size) const {
        return detect_with(model_, frame, prev_center, current_size);
    }

    /// Detection with an arbitrary model sharing this filter's geometry (the
    /// decision filter uses it to score proposals).
    DetectionOutcome detect_with(const FilterModel& model, const Frame& frame, Point2 prev_center,
                                 Size2 current_size) const {
        const FeatureStack m = features(frame, prev_center, current_size);
        auto out = locate_peak(pixel_response(model, m, setup_.geometry.cell_size), prev_center,
                               setup_.roi_size(current_size), setup_.geometry);
        out.new_center.x = std::clamp(out.new_center.x, 0.0, static_cast<double>(frame.width));
        out.new_center.y = std::clamp(out.new_center.y, 0.0, static_cast<double>(frame.height));
        return out;
    }

    void update(const Frame& frame, const Bbox4DoF& box, double theta) {
        blend(train(frame, box), theta);
    }

    void blend(const FilterModel& fresh, double theta) { model_ = interpolate_model(model_, fresh, theta); }

    void reset(FilterModel model) { model_ = std::move(model); }

    const FilterModel& model() const { return model_; }
    const TranslationSetup& setup() const { return setup_; }
    const ColorNameTable& table() const { return *table_; }

private:
    TranslationSetup setup_;
    std::shared_ptr<const ColorNameTable> table_;
    double lambda_ = 1e-2;
    FilterModel model_;
};

}  // namespace jsar
