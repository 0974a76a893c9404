#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "jsar/config.hpp"
#include "jsar/features.hpp"
#include "jsar/geometry.hpp"
#include "jsar/image.hpp"
#include "jsar/spectral.hpp"

namespace jsar {

/// S x A lattice of (width, height) factors. Cell (s, a) (0-based) carries the
/// exponents N_s = s - (S-1)/2, N_a = a - (A-1)/2 and the factors
/// (gamma^N_s * phi^N_a, gamma^N_s / phi^N_a).
struct SizeGrid {
    int S = 13;
    int A = 13;
    double gamma = 1.03;
    double phi = 1.02;

    int scale_exponent(int s) const { return s - (S - 1) / 2; }
    int aspect_exponent(int a) const { return a - (A - 1) / 2; }

    double width_factor(int s, int a) const {
        return std::pow(gamma, scale_exponent(s)) * std::pow(phi, aspect_exponent(a));
    }
    double height_factor(int s, int a) const {
        return std::pow(gamma, scale_exponent(s)) / std::pow(phi, aspect_exponent(a));
    }
};

inline SizeGrid build_grid(int S, int A, double gamma, double phi) {
    if (S < 3 || S % 2 == 0)
        throw Error(ErrorKind::InvalidArgument, "size grid: S must be odd and >= 3, got " + std::to_string(S));
    if (A < 3 || A % 2 == 0)
        throw Error(ErrorKind::InvalidArgument, "size grid: A must be odd and >= 3, got " + std::to_string(A));
    if (!(gamma > 1.0) || !(phi > 1.0))
        throw Error(ErrorKind::InvalidArgument, "size grid: gamma and phi must exceed 1");
    return {S, A, gamma, phi};
}

inline SizeGrid build_grid(const TrackerConfig& cfg) { return build_grid(cfg.S, cfg.A, cfg.gamma, cfg.phi); }

/// One S x A plane per HOG-vector element.
struct SizeSample {
    RealStack channels;
    SizeGrid grid;
};

struct SizeSampling {
    int model_w = 16;
    int model_h = 32;
    int cell = 4;
    double min_patch = 8.0;

    static SizeSampling from(const TrackerConfig& cfg) {
        return {cfg.W_model, cfg.H_model, cfg.C, static_cast<double>(cfg.min_size_patch)};
    }
};

inline SizeSample sample_size_domain(const Frame& frame, Point2 center, double w, double h, const SizeGrid& grid,
                                     const SizeSampling& sp, const RealPlane& window) {
    if (!(w > 0.0) || !(h > 0.0))
        throw Error(ErrorKind::InvalidArgument, "size sample: non-positive target size");
    if (window.rows() != grid.S || window.cols() != grid.A)
        throw Error(ErrorKind::DimensionMismatch, "size sample: window does not match the grid");
    const int K = size_channel_count(sp.model_w, sp.model_h, sp.cell);
    SizeSample out{RealStack(K, RealPlane(grid.S, grid.A, 0.0)), grid};
    for (int s = 0; s < grid.S; ++s)
        for (int a = 0; a < grid.A; ++a) {
            const Size2 patch{std::max(sp.min_patch, w * grid.width_factor(s, a)),
                              std::max(sp.min_patch, h * grid.height_factor(s, a))};
            const auto v = size_feature_vector(frame, center, patch, sp.model_w, sp.model_h, sp.cell);
            const double wgt = window(s, a);
            for (int k = 0; k < K; ++k) out.channels[k](s, a) = v[k] * wgt;
        }
    return out;
}

struct SizeEstimate {
    double w = 0.0;
    double h = 0.0;
    int scale_exponent = 0;
    int aspect_exponent = 0;
    double peak_value = 0.0;
    RealPlane response;
};

/// 2D filter over the size domain: the response peak picks the (scale,
/// aspect) cell that best matches the learned appearance.
class SizeFilter {
public:
    SizeFilter(const SizeGrid& grid, const SizeSampling& sampling, double sigma_factor, double lambda)
        : grid_(grid), sampling_(sampling), lambda_(lambda) {
        window_ = hann_window(grid.S, grid.A);
        label_ = shift_to_origin(gaussian_label_2d(grid.S, grid.A, sigma_factor * grid.S, sigma_factor * grid.A));
        label_spectrum_ = dft2(label_);
    }

    static SizeFilter init(const Frame& frame, const Bbox4DoF& box, const TrackerConfig& cfg) {
        SizeFilter f(build_grid(cfg), SizeSampling::from(cfg), cfg.sigma_size, cfg.lambda);
        f.train(f.sample(frame, box.center(), box.w, box.h));
        return f;
    }

    SizeSample sample(const Frame& frame, Point2 center, double w, double h) const {
        return sample_size_domain(frame, center, w, h, grid_, sampling_, window_);
    }

    FilterModel fresh_model(const SizeSample& s) const {
        return train_filter(dft2(s.channels), label_spectrum_, lambda_);
    }

    void train(const SizeSample& s) { model_ = fresh_model(s); }

    void update(const SizeSample& s, double theta) { model_ = interpolate_model(model_, fresh_model(s), theta); }

    SizeEstimate detect(const Frame& frame, Point2 center, double w, double h) const {
        return estimate(correlate_response(model_, sample(frame, center, w, h).channels), frame, w, h);
    }

    /// Maps a response plane to the new size. Index r on an axis of length n is
    /// the cyclic shift r, i.e. exponent r for r <= (n-1)/2 and r - n beyond.
    SizeEstimate estimate(RealPlane response, const Frame& frame, double w, double h) const {
        const auto peak = argmax(response);
        SizeEstimate e;
        e.scale_exponent = peak.row > (grid_.S - 1) / 2 ? peak.row - grid_.S : peak.row;
        e.aspect_exponent = peak.col > (grid_.A - 1) / 2 ? peak.col - grid_.A : peak.col;
        const double sf = std::pow(grid_.gamma, e.scale_exponent);
        const double af = std::pow(grid_.phi, e.aspect_exponent);
        e.w = std::clamp(w * sf * af, 4.0, std::max(4.0, 2.0 * frame.width));
        e.h = std::clamp(h * sf / af, 4.0, std::max(4.0, 2.0 * frame.height));
        e.peak_value = peak.value;
        e.response = std::move(response);
        return e;
    }

    const FilterModel& model() const { return model_; }
    const SizeGrid& grid() const { return grid_; }
    const RealPlane& window() const { return window_; }
    const RealPlane& label() const { return label_; }
    const SizeSampling& sampling() const { return sampling_; }

private:
    SizeGrid grid_;
    SizeSampling sampling_;
    double lambda_;
    RealPlane window_;
    RealPlane label_;
    ComplexSpectrum label_spectrum_;
    FilterModel model_;
};

}  // namespace jsar
