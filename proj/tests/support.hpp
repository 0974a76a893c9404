#pragma once

// Shared fixtures and brute-force oracles for the test suites. The oracles
// deliberately avoid the library's transform and training code paths.

#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "jsar/jsar.hpp"

namespace jsar::testing {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
    return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

inline RealPlane random_plane(int rows, int cols, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
    RealPlane p(rows, cols);
    for (auto& v : p.values()) v = uniform(rng, lo, hi);
    return p;
}

inline RealStack random_stack(int depth, int rows, int cols, std::mt19937_64& rng) {
    RealStack s;
    for (int d = 0; d < depth; ++d) s.push_back(random_plane(rows, cols, rng));
    return s;
}

inline Frame noise_frame(int w, int h, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Frame f(w, h);
    for (auto& v : f.rgb) v = static_cast<std::uint8_t>(rng() & 0xff);
    return f;
}

inline Frame uniform_frame(int w, int h, std::uint8_t v) { return Frame(w, h, v); }

/// Content moved by (dx, dy) px with edge replication.
inline Frame shifted(const Frame& f, int dx, int dy) {
    Frame out(f.width, f.height);
    out.index = f.index;
    for (int y = 0; y < f.height; ++y)
        for (int x = 0; x < f.width; ++x) {
            const int sx = std::clamp(x - dx, 0, f.width - 1), sy = std::clamp(y - dy, 0, f.height - 1);
            const auto* s = f.at(sx, sy);
            auto* d = out.at(x, y);
            d[0] = s[0];
            d[1] = s[1];
            d[2] = s[2];
        }
    return out;
}

inline std::shared_ptr<const ColorNameTable> cn_table() {
    static const auto table = ColorNameTable::load_default();
    return table;
}

/// First `n` frames of a preset; occlusions past the cut are dropped.
inline Scenario truncated(Scenario s, int n) {
    s.script.resize(static_cast<std::size_t>(n));
    std::vector<OcclusionEvent> keep;
    for (const auto& o : s.occlusions)
        if (o.t1 < n) keep.push_back(o);
    s.occlusions = keep;
    return s;
}

inline RenderedSequence render_preset(const std::string& name, int n = -1, std::uint64_t seed = 1) {
    Scenario s = preset(name, seed);
    if (n > 0) s = truncated(s, n);
    return render(s);
}

// ------------------------------------------------------------------ oracles

/// Direct O((MN)^2) forward DFT.
inline ComplexSpectrum naive_dft(const RealPlane& x) {
    const int M = x.rows(), N = x.cols();
    ComplexSpectrum out(M, N);
    for (int u = 0; u < M; ++u)
        for (int v = 0; v < N; ++v) {
            Complex acc{};
            for (int r = 0; r < M; ++r)
                for (int c = 0; c < N; ++c) {
                    const double ang = -2.0 * std::numbers::pi * (static_cast<double>(u) * r / M +
                                                                 static_cast<double>(v) * c / N);
                    acc += x(r, c) * Complex(std::cos(ang), std::sin(ang));
                }
            out(u, v) = acc;
        }
    return out;
}

inline RealPlane naive_idft_real(const ComplexSpectrum& X) {
    const int M = X.rows(), N = X.cols();
    RealPlane out(M, N);
    for (int r = 0; r < M; ++r)
        for (int c = 0; c < N; ++c) {
            Complex acc{};
            for (int u = 0; u < M; ++u)
                for (int v = 0; v < N; ++v) {
                    const double ang = 2.0 * std::numbers::pi * (static_cast<double>(u) * r / M +
                                                                static_cast<double>(v) * c / N);
                    acc += X(u, v) * Complex(std::cos(ang), std::sin(ang));
                }
            out(r, c) = acc.real() / (M * N);
        }
    return out;
}

/// Solves (x x^H + lambda I) w = x conj(g) at one frequency bin by Gaussian
/// elimination with partial pivoting: the per-bin minimiser of
/// |sum_d conj(w_d) x_d - g|^2 + lambda sum_d |w_d|^2.
inline std::vector<Complex> ridge_solve_bin(const std::vector<Complex>& x, Complex g, double lambda) {
    const int D = static_cast<int>(x.size());
    std::vector<std::vector<Complex>> A(D, std::vector<Complex>(D + 1));
    for (int i = 0; i < D; ++i) {
        for (int j = 0; j < D; ++j) A[i][j] = x[i] * std::conj(x[j]) + (i == j ? lambda : 0.0);
        A[i][D] = x[i] * std::conj(g);
    }
    for (int col = 0; col < D; ++col) {
        int piv = col;
        for (int r = col + 1; r < D; ++r)
            if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
        std::swap(A[col], A[piv]);
        for (int r = 0; r < D; ++r) {
            if (r == col) continue;
            const Complex f = A[r][col] / A[col][col];
            for (int j = col; j <= D; ++j) A[r][j] -= f * A[col][j];
        }
    }
    std::vector<Complex> w(D);
    for (int i = 0; i < D; ++i) w[i] = A[i][D] / A[i][i];
    return w;
}

/// Spatial correlation filters minimising the ridge objective, from a naive
/// DFT and the per-bin solution x conj(g) / (|x|^2 + lambda).
inline RealStack oracle_spatial_filter(const RealStack& sample, const RealPlane& label, double lambda) {
    const ComplexSpectrum G = naive_dft(label);
    std::vector<ComplexSpectrum> X;
    for (const auto& s : sample) X.push_back(naive_dft(s));
    RealPlane den(label.rows(), label.cols(), 0.0);
    for (const auto& x : X)
        for (std::size_t i = 0; i < den.size(); ++i) den.data()[i] += std::norm(x.data()[i]);
    RealStack out;
    for (const auto& x : X) {
        ComplexSpectrum W(label.rows(), label.cols());
        for (std::size_t i = 0; i < W.size(); ++i)
            W.data()[i] = x.data()[i] * std::conj(G.data()[i]) / (den.data()[i] + lambda);
        out.push_back(naive_idft_real(W));
    }
    return out;
}

/// R(t) = sum_d sum_p w_d(p) m_d(p + t), indices cyclic.
inline RealPlane brute_correlate(const RealStack& filters, const RealStack& search) {
    const int M = filters.front().rows(), N = filters.front().cols();
    RealPlane R(M, N, 0.0);
    for (int tr = 0; tr < M; ++tr)
        for (int tc = 0; tc < N; ++tc) {
            double acc = 0.0;
            for (std::size_t d = 0; d < filters.size(); ++d)
                for (int r = 0; r < M; ++r)
                    for (int c = 0; c < N; ++c)
                        acc += filters[d](r, c) * search[d]((r + tr) % M, (c + tc) % N);
            R(tr, tc) = acc;
        }
    return R;
}

/// Spatial ridge objective sum_t (R(t) - g(t))^2 + lambda sum |w|^2 with R the
/// filters correlated against the sample.
inline double ridge_objective(const RealStack& filters, const RealStack& sample, const RealPlane& label,
                              double lambda) {
    const RealPlane R = brute_correlate(filters, sample);
    double e = 0.0;
    for (std::size_t i = 0; i < R.size(); ++i) {
        const double d = R.data()[i] - label.data()[i];
        e += d * d;
    }
    for (const auto& w : filters)
        for (double v : w.values()) e += lambda * v * v;
    return e;
}

inline double mean_iou(const TrackerOutput& out, const std::vector<Rect>& truth) {
    double s = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) s += iou(out.records[i].box.rect(), truth[i]);
    return s / static_cast<double>(truth.size());
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("jsar_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

private:
    std::filesystem::path path_;
};

}  // namespace jsar::testing
