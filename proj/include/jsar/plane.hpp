#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "jsar/error.hpp"

namespace jsar {

/// Dense row-major 2D grid. RealPlane and ComplexSpectrum are the two
/// instantiations used throughout the tracker.
template <typename T>
class Plane {
public:
    using value_type = T;

    Plane() = default;
    Plane(int rows, int cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(checked_size(rows, cols), fill) {}

    int rows() const noexcept { return rows_; }
    int cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    T& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
    const T& operator()(int r, int c) const {
        return data_[static_cast<std::size_t>(r) * cols_ + c];
    }

    T* data() noexcept { return data_.data(); }
    const T* data() const noexcept { return data_.data(); }
    std::span<T> values() noexcept { return data_; }
    std::span<const T> values() const noexcept { return data_; }

    bool same_shape(const Plane& other) const noexcept {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    friend bool operator==(const Plane&, const Plane&) = default;

private:
    static std::size_t checked_size(int rows, int cols) {
        if (rows < 1 || cols < 1)
            throw Error(ErrorKind::InvalidArgument,
                        "plane dimensions must be positive, got " + std::to_string(rows) +
                            "x" + std::to_string(cols));
        return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
    }

    int rows_ = 0;
    int cols_ = 0;
    std::vector<T> data_;
};

using Complex = std::complex<double>;
using RealPlane = Plane<double>;
using ComplexSpectrum = Plane<Complex>;

/// A stack of equally sized channels (feature maps, filter spectra).
template <typename T>
using PlaneStack = std::vector<Plane<T>>;

using RealStack = PlaneStack<double>;
using SpectrumStack = PlaneStack<Complex>;

template <typename T>
void require_same_shape(const Plane<T>& a, const Plane<T>& b, const char* what) {
    if (!a.same_shape(b))
        throw Error(ErrorKind::DimensionMismatch,
                    std::string(what) + ": " + std::to_string(a.rows()) + "x" +
                        std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                        std::to_string(b.cols()));
}

/// Circular shift: out(r, c) = in(r - dy, c - dx) modulo the plane size.
template <typename T>
Plane<T> circshift(const Plane<T>& in, int dy, int dx) {
    Plane<T> out(in.rows(), in.cols());
    const int R = in.rows(), C = in.cols();
    for (int r = 0; r < R; ++r) {
        const int sr = ((r - dy) % R + R) % R;
        for (int c = 0; c < C; ++c) out(r, c) = in(sr, ((c - dx) % C + C) % C);
    }
    return out;
}

struct PeakLocation {
    int row = 0;
    int col = 0;
    double value = 0.0;
};

/// First maximum in row-major order.
inline PeakLocation argmax(const RealPlane& p) {
    const auto vals = p.values();
    const auto it = std::max_element(vals.begin(), vals.end());
    const auto idx = static_cast<int>(it - vals.begin());
    return {idx / p.cols(), idx % p.cols(), *it};
}

inline double max_abs_diff(const RealPlane& a, const RealPlane& b) {
    require_same_shape(a, b, "max_abs_diff");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

inline bool all_finite(const RealPlane& p) {
    return std::all_of(p.values().begin(), p.values().end(),
                       [](double v) { return std::isfinite(v); });
}

}  // namespace jsar
