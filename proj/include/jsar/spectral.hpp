#pragma once

// Frequency-domain machinery shared by the translation, size and decision
// filters: 2D DFT pair, label/window synthesis, closed-form ridge training,
// response synthesis and model interpolation.
//
// Conventions
//  * dft2 is the forward, unnormalised transform; idft2 applies 1/(MN).
//  * Cyclic correlation: (w * x)(n) = sum_k w(k) x(k + n), whose spectrum is
//    conj(w~) . x~.
//  * A FilterModel keeps numerator^d = g~ . conj(x~^d) and the real denominator
//    sum_d |x~^d|^2. The correlation filter minimising
//        || sum_d w^d * x^d - g ||^2 + lambda sum_d ||w^d||^2
//    is w~^d = conj(numerator^d) / (denominator + lambda), so a response is
//        R = idft2( sum_d numerator^d . m~^d / (denominator + lambda) ).
//  * Labels are generated with their peak at the centre cell and circularly
//    shifted to the origin before training; response peaks are therefore
//    read as displacements from (0, 0).

#include <cmath>
#include <numbers>
#include <opencv2/core.hpp>

#include "jsar/error.hpp"
#include "jsar/plane.hpp"

namespace jsar {

namespace detail {

inline cv::Mat as_mat(RealPlane& p) { return cv::Mat(p.rows(), p.cols(), CV_64F, p.data()); }
inline cv::Mat as_mat(const RealPlane& p) {
    return cv::Mat(p.rows(), p.cols(), CV_64F, const_cast<double*>(p.data()));
}
inline cv::Mat as_mat(ComplexSpectrum& p) {
    return cv::Mat(p.rows(), p.cols(), CV_64FC2, reinterpret_cast<double*>(p.data()));
}
inline cv::Mat as_mat(const ComplexSpectrum& p) {
    return cv::Mat(p.rows(), p.cols(), CV_64FC2,
                   reinterpret_cast<double*>(const_cast<Complex*>(p.data())));
}

}  // namespace detail

inline ComplexSpectrum dft2(const RealPlane& plane) {
    ComplexSpectrum out(plane.rows(), plane.cols());
    cv::Mat dst = detail::as_mat(out);
    cv::dft(detail::as_mat(plane), dst, cv::DFT_COMPLEX_OUTPUT);
    CV_Assert(dst.data == reinterpret_cast<uchar*>(out.data()));
    return out;
}

/// Inverse transform keeping the real part (the input is expected to be the
/// spectrum of a real signal).
inline RealPlane idft2(const ComplexSpectrum& spec) {
    ComplexSpectrum tmp(spec.rows(), spec.cols());
    cv::Mat dst = detail::as_mat(tmp);
    cv::dft(detail::as_mat(spec), dst, cv::DFT_INVERSE | cv::DFT_SCALE);
    RealPlane out(spec.rows(), spec.cols());
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = tmp.data()[i].real();
    return out;
}

inline SpectrumStack dft2(const RealStack& stack) {
    SpectrumStack out;
    out.reserve(stack.size());
    for (const auto& p : stack) out.push_back(dft2(p));
    return out;
}

/// Centred 2D Gaussian with independent bandwidths per axis; exactly 1.0 at
/// (rows/2, cols/2).
inline RealPlane gaussian_label_2d(int rows, int cols, double sigma_rows, double sigma_cols) {
    if (!(sigma_rows > 0.0) || !(sigma_cols > 0.0))
        throw Error(ErrorKind::InvalidArgument, "label bandwidth must be positive");
    RealPlane g(rows, cols);
    const int rc = rows / 2, cc = cols / 2;
    for (int r = 0; r < rows; ++r) {
        const double dr = (r - rc) / sigma_rows;
        for (int c = 0; c < cols; ++c) {
            const double dc = (c - cc) / sigma_cols;
            g(r, c) = std::exp(-0.5 * (dr * dr + dc * dc));
        }
    }
    return g;
}

/// sigma = sigma_factor * target_extent (both axes, in cells).
inline RealPlane gaussian_label(int rows, int cols, double sigma_factor, double target_extent) {
    if (!(sigma_factor > 0.0) || !(target_extent > 0.0))
        throw Error(ErrorKind::InvalidArgument, "sigma_factor and target_extent must be positive");
    const double s = sigma_factor * target_extent;
    return gaussian_label_2d(rows, cols, s, s);
}

/// Moves the centre peak of a gaussian_label to index (0, 0).
inline RealPlane shift_to_origin(const RealPlane& centred) {
    return circshift(centred, -(centred.rows() / 2), -(centred.cols() / 2));
}

inline std::vector<double> hann(int n) {
    // n == 1 yields {1.0}: a single cell is kept, not erased.
    std::vector<double> w(static_cast<std::size_t>(n), 1.0);
    if (n > 1)
        for (int i = 0; i < n; ++i)
            w[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * i / (n - 1)));
    return w;
}

/// Separable Hann taper, zero on the outermost rows/cols (except for n == 1).
inline RealPlane hann_window(int rows, int cols) {
    const auto wr = hann(rows), wc = hann(cols);
    RealPlane w(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) w(r, c) = wr[r] * wc[c];
    return w;
}

class FilterModel {
public:
    FilterModel() = default;
    FilterModel(SpectrumStack numerator, RealPlane denominator, double lambda)
        : numerator_(std::move(numerator)), denominator_(std::move(denominator)), lambda_(lambda) {
        if (numerator_.empty())
            throw Error(ErrorKind::InvalidArgument, "filter model needs at least one channel");
        for (const auto& n : numerator_)
            if (n.rows() != denominator_.rows() || n.cols() != denominator_.cols())
                throw Error(ErrorKind::DimensionMismatch, "numerator/denominator shape");
        if (!(lambda_ >= 0.0)) throw Error(ErrorKind::InvalidArgument, "lambda must be >= 0");
    }

    int channels() const noexcept { return static_cast<int>(numerator_.size()); }
    int rows() const noexcept { return denominator_.rows(); }
    int cols() const noexcept { return denominator_.cols(); }
    double lambda() const noexcept { return lambda_; }
    bool empty() const noexcept { return numerator_.empty(); }

    const SpectrumStack& numerator() const noexcept { return numerator_; }
    const RealPlane& denominator() const noexcept { return denominator_; }

    /// Spectrum of the spatial correlation filter for channel d.
    ComplexSpectrum filter_spectrum(int d) const {
        ComplexSpectrum w(rows(), cols());
        const auto& num = numerator_.at(static_cast<std::size_t>(d));
        for (std::size_t i = 0; i < w.size(); ++i)
            w.data()[i] = std::conj(num.data()[i]) / (denominator_.data()[i] + lambda_);
        return w;
    }

    friend bool operator==(const FilterModel&, const FilterModel&) = default;

private:
    SpectrumStack numerator_;
    RealPlane denominator_;
    double lambda_ = 0.0;
};

inline FilterModel train_filter(const SpectrumStack& sample_spectra,
                                const ComplexSpectrum& label_spectrum, double lambda) {
    if (sample_spectra.empty())
        throw Error(ErrorKind::InvalidArgument, "training sample has no channels");
    SpectrumStack num;
    num.reserve(sample_spectra.size());
    RealPlane den(label_spectrum.rows(), label_spectrum.cols(), 0.0);
    for (const auto& x : sample_spectra) {
        require_same_shape(x, label_spectrum, "train_filter sample vs label");
        ComplexSpectrum n(x.rows(), x.cols());
        for (std::size_t i = 0; i < x.size(); ++i) {
            const Complex xi = x.data()[i];
            n.data()[i] = label_spectrum.data()[i] * std::conj(xi);
            den.data()[i] += std::norm(xi);
        }
        num.push_back(std::move(n));
    }
    return FilterModel(std::move(num), std::move(den), lambda);
}

/// Closed-form ridge solution for a D-channel sample against an origin-peaked
/// label.
inline FilterModel train_filter(const RealStack& sample, const RealPlane& label, double lambda) {
    for (const auto& x : sample) require_same_shape(x, label, "train_filter sample vs label");
    return train_filter(dft2(sample), dft2(label), lambda);
}

/// Spectrum of the response: sum_d conj(w~^d) . m~^d.
inline ComplexSpectrum response_spectrum(const FilterModel& model, const SpectrumStack& search) {
    if (static_cast<int>(search.size()) != model.channels())
        throw Error(ErrorKind::DimensionMismatch,
                    "search has " + std::to_string(search.size()) + " channels, model " +
                        std::to_string(model.channels()));
    ComplexSpectrum acc(model.rows(), model.cols(), Complex{});
    for (std::size_t d = 0; d < search.size(); ++d) {
        const auto& m = search[d];
        require_same_shape(m, acc, "correlate_response search vs model");
        const auto& num = model.numerator()[d];
        for (std::size_t i = 0; i < acc.size(); ++i) acc.data()[i] += num.data()[i] * m.data()[i];
    }
    const double lambda = model.lambda();
    const auto& den = model.denominator();
    for (std::size_t i = 0; i < acc.size(); ++i) acc.data()[i] /= (den.data()[i] + lambda);
    return acc;
}

inline RealPlane correlate_response(const FilterModel& model, const RealStack& search) {
    for (const auto& m : search)
        if (m.rows() != model.rows() || m.cols() != model.cols())
            throw Error(ErrorKind::DimensionMismatch, "correlate_response search vs model");
    return idft2(response_spectrum(model, dft2(search)));
}

/// Trigonometric interpolation of a response onto a grid `factor_rows` x
/// `factor_cols` times finer, by zero-padding its spectrum. The inverse
/// transform normalises by the enlarged element count, so sample (f r, f c) of
/// the result equals R(r, c) / (factor_rows * factor_cols).
inline RealPlane upsample_response(const ComplexSpectrum& spec, int factor_rows, int factor_cols) {
    if (factor_rows < 1 || factor_cols < 1)
        throw Error(ErrorKind::InvalidArgument, "upsampling factors must be >= 1");
    const int M = spec.rows(), N = spec.cols();
    const int P = M * factor_rows, Q = N * factor_cols;
    ComplexSpectrum padded(P, Q, Complex{});

    // Signed frequency placement; an even-length Nyquist bin is split in half
    // between +n/2 and -n/2 so the padded spectrum stays Hermitian.
    struct Slot {
        int dst;
        double weight;
    };
    auto slots = [](int k, int n, int big) {
        std::vector<Slot> s;
        if (n % 2 == 0 && k == n / 2 && big > n) {
            s.push_back({n / 2, 0.5});
            s.push_back({big - n / 2, 0.5});
        } else if (k <= (n - 1) / 2 || (n % 2 == 0 && k == n / 2)) {
            s.push_back({k, 1.0});
        } else {
            s.push_back({big - (n - k), 1.0});
        }
        return s;
    };
    for (int r = 0; r < M; ++r) {
        const auto sr = slots(r, M, P);
        for (int c = 0; c < N; ++c) {
            const auto sc = slots(c, N, Q);
            for (const auto& a : sr)
                for (const auto& b : sc) padded(a.dst, b.dst) += spec(r, c) * (a.weight * b.weight);
        }
    }
    return idft2(padded);
}

inline FilterModel interpolate_model(const FilterModel& old_model, const FilterModel& fresh,
                                     double theta) {
    if (!(theta >= 0.0 && theta <= 1.0))
        throw Error(ErrorKind::InvalidArgument, "learning rate must lie in [0, 1]");
    if (old_model.channels() != fresh.channels() || old_model.rows() != fresh.rows() ||
        old_model.cols() != fresh.cols())
        throw Error(ErrorKind::DimensionMismatch, "interpolate_model shapes differ");
    if (theta == 0.0) return old_model;
    if (theta == 1.0) return fresh;
    const double keep = 1.0 - theta;
    SpectrumStack num;
    num.reserve(old_model.numerator().size());
    for (std::size_t d = 0; d < old_model.numerator().size(); ++d) {
        const auto& a = old_model.numerator()[d];
        const auto& b = fresh.numerator()[d];
        ComplexSpectrum n(a.rows(), a.cols());
        for (std::size_t i = 0; i < n.size(); ++i) n.data()[i] = keep * a.data()[i] + theta * b.data()[i];
        num.push_back(std::move(n));
    }
    RealPlane den(old_model.rows(), old_model.cols());
    for (std::size_t i = 0; i < den.size(); ++i)
        den.data()[i] = keep * old_model.denominator().data()[i] + theta * fresh.denominator().data()[i];
    return FilterModel(std::move(num), std::move(den), fresh.lambda());
}

}  // namespace jsar
