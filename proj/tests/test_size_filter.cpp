#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

using namespace jsar;
using namespace jsar::testing;

namespace {

/// Two-frame scene: the target at `side` px square in frame 0, then resized
/// in frame 1.
RenderedSequence resized_pair(double wf, double hf, double side = 48) {
    Scenario s = truncated(preset("static", 1), 2);
    for (auto& b : s.script) b.w = b.h = side;
    s.script[1].w *= wf;
    s.script[1].h *= hf;
    return render(s);
}

}  // namespace

// ----------------------------------------------------------------------- grid

TEST(SizeGrid, DefaultCentreIsIdentity) {
    const auto g = build_grid(13, 13, 1.03, 1.02);
    EXPECT_EQ(g.scale_exponent(6), 0);
    EXPECT_EQ(g.aspect_exponent(6), 0);
    EXPECT_EQ(g.width_factor(6, 6), 1.0);
    EXPECT_EQ(g.height_factor(6, 6), 1.0);
    EXPECT_NEAR(g.width_factor(12, 6), 1.1941, 1e-4);
    EXPECT_NEAR(g.width_factor(12, 6), std::pow(1.03, 6), 1e-15);
    EXPECT_EQ(g.scale_exponent(0), -6);
    EXPECT_EQ(g.scale_exponent(12), 6);
}

TEST(SizeGrid, AspectStepPreservesArea) {
    const auto g = build_grid(13, 13, 1.03, 1.02);
    for (int s = 0; s < 13; ++s)
        for (int a = 0; a < 13; ++a)
            EXPECT_NEAR(g.width_factor(s, a) * g.height_factor(s, a), std::pow(1.03, 2 * g.scale_exponent(s)),
                        1e-12);
}

TEST(SizeGrid, ReversalIsReciprocal) {
    for (auto [S, A] : {std::pair{13, 13}, std::pair{5, 9}, std::pair{3, 3}}) {
        const auto g = build_grid(S, A, 1.03, 1.02);
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a) {
                EXPECT_NEAR(g.width_factor(s, a) * g.width_factor(S - 1 - s, A - 1 - a), 1.0, 1e-12);
                EXPECT_NEAR(g.height_factor(s, a) * g.height_factor(S - 1 - s, A - 1 - a), 1.0, 1e-12);
            }
    }
}

TEST(SizeGrid, RejectsEvenOrTinyCounts) {
    for (auto [S, A] : {std::pair{12, 13}, std::pair{13, 4}, std::pair{1, 3}, std::pair{3, 1}}) {
        try {
            build_grid(S, A, 1.03, 1.02);
            FAIL() << S << "x" << A;
        } catch (const Error& e) {
            EXPECT_EQ(e.kind(), ErrorKind::InvalidArgument);
        }
    }
    EXPECT_THROW(build_grid(5, 5, 1.0, 1.02), Error);
    EXPECT_THROW(build_grid(5, 5, 1.03, 0.9), Error);
}

// --------------------------------------------------------------------- sample

TEST(SizeSample, UniformFrameGivesZeroSample) {
    const TrackerConfig cfg;
    const auto g = build_grid(cfg);
    const auto s = sample_size_domain(uniform_frame(200, 150, 90), {100, 75}, 40, 30, g, SizeSampling::from(cfg),
                                      hann_window(13, 13));
    ASSERT_EQ(s.channels.size(), 992u);
    for (const auto& ch : s.channels)
        for (double v : ch.values()) ASSERT_EQ(v, 0.0);
}

TEST(SizeSample, CentreCellIsUnscaledVector) {
    const TrackerConfig cfg;
    const auto g = build_grid(cfg);
    const RealPlane window = hann_window(13, 13);
    const Frame f = render_preset("static", 1).frames[0];
    const auto s = sample_size_domain(f, {321, 178}, 52, 44, g, SizeSampling::from(cfg), window);
    const auto v = size_feature_vector(f, {321, 178}, {52, 44}, 16, 32, 4);
    ASSERT_EQ(s.channels.size(), v.size());
    for (std::size_t k = 0; k < v.size(); ++k) ASSERT_EQ(s.channels[k](6, 6), v[k] * window(6, 6));
}

TEST(SizeSample, OffCentreCellUsesGridFactors) {
    const TrackerConfig cfg;
    const auto g = build_grid(cfg);
    const RealPlane window = hann_window(13, 13);
    const Frame f = render_preset("static", 1).frames[0];
    const auto s = sample_size_domain(f, {320, 180}, 48, 48, g, SizeSampling::from(cfg), window);
    const int si = 9, ai = 3;
    const auto v = size_feature_vector(f, {320, 180}, {48 * g.width_factor(si, ai), 48 * g.height_factor(si, ai)},
                                       16, 32, 4);
    for (std::size_t k = 0; k < v.size(); ++k) ASSERT_EQ(s.channels[k](si, ai), v[k] * window(si, ai));
}

TEST(SizeSample, TinyTargetsAreClampedToMinimumPatch) {
    const TrackerConfig cfg;
    const auto g = build_grid(cfg);
    const RealPlane window = hann_window(13, 13);
    const Frame f = noise_frame(64, 64, 4);
    const auto s = sample_size_domain(f, {32, 32}, 2, 3, g, SizeSampling::from(cfg), window);
    const auto v = size_feature_vector(f, {32, 32}, {8, 8}, 16, 32, 4);
    for (std::size_t k = 0; k < v.size(); ++k) ASSERT_EQ(s.channels[k](6, 6), v[k] * window(6, 6));
    EXPECT_THROW(sample_size_domain(f, {32, 32}, 0, 3, g, SizeSampling::from(cfg), window), Error);
}

// ------------------------------------------------------------ train / detect

TEST(SizeFilter, TrainingFramePeaksAtCentreCell) {
    const auto seq = render_preset("static", 2);
    const auto box = Bbox4DoF::from_rect(seq.truth[0]);
    const TrackerConfig cfg;
    const auto f = SizeFilter::init(seq.frames[0], box, cfg);
    for (int t : {0, 1}) {
        const auto e = f.detect(seq.frames[t], box.center(), box.w, box.h);
        EXPECT_EQ(e.scale_exponent, 0);
        EXPECT_EQ(e.aspect_exponent, 0);
        EXPECT_EQ(e.w, box.w);
        EXPECT_EQ(e.h, box.h);
    }
}

TEST(SizeFilter, LabelPeaksAtIdentityCell) {
    const TrackerConfig cfg;
    const SizeFilter f(build_grid(cfg), SizeSampling::from(cfg), cfg.sigma_size, cfg.lambda);
    const auto p = argmax(f.label());
    EXPECT_EQ(p.row, 0);
    EXPECT_EQ(p.col, 0);
    EXPECT_EQ(p.value, 1.0);
    EXPECT_EQ(f.window()(6, 6), 1.0);
}

TEST(SizeFilter, UpdateRateZeroKeepsModel) {
    const auto seq = render_preset("zoom_in", 5);
    const TrackerConfig cfg;
    EXPECT_EQ(cfg.theta_size, 0.014);
    auto f = SizeFilter::init(seq.frames[0], Bbox4DoF::from_rect(seq.truth[0]), cfg);
    const FilterModel before = f.model();
    const auto b4 = Bbox4DoF::from_rect(seq.truth[4]);
    f.update(f.sample(seq.frames[4], b4.center(), b4.w, b4.h), 0.0);
    EXPECT_EQ(f.model(), before);
    f.update(f.sample(seq.frames[4], b4.center(), b4.w, b4.h), 1.0);
    EXPECT_EQ(f.model(), f.fresh_model(f.sample(seq.frames[4], b4.center(), b4.w, b4.h)));
}

TEST(SizeFilter, ZoomByOneStepFindsScaleExponentOne) {
    const TrackerConfig cfg;
    const auto seq = resized_pair(cfg.gamma, cfg.gamma);
    const auto box = Bbox4DoF::from_rect(seq.truth[0]);
    const auto f = SizeFilter::init(seq.frames[0], box, cfg);
    const auto e = f.detect(seq.frames[1], box.center(), box.w, box.h);
    EXPECT_EQ(e.scale_exponent, 1);
    EXPECT_EQ(e.aspect_exponent, 0);
    EXPECT_NEAR(e.w / box.w, cfg.gamma, 1e-12);
    EXPECT_NEAR(e.h / box.h, cfg.gamma, 1e-12);

    // The same response from a direct spatial correlation.
    const auto sample = f.sample(seq.frames[0], box.center(), box.w, box.h);
    const auto probe = f.sample(seq.frames[1], box.center(), box.w, box.h);
    const auto oracle = brute_correlate(oracle_spatial_filter(sample.channels, f.label(), cfg.lambda), probe.channels);
    EXPECT_LE(max_abs_diff(oracle, e.response), 1e-6);
}

TEST(SizeFilter, AspectByOneStepFindsAspectExponentOne) {
    // At 48 px one aspect step moves each side by under a pixel, below the
    // 4 px cell resolution, so this uses a 96 px target.
    const TrackerConfig cfg;
    for (int k : {1, -1}) {
        const double fa = std::pow(cfg.phi, k);
        const auto seq = resized_pair(fa, 1.0 / fa, 96);
        const auto box = Bbox4DoF::from_rect(seq.truth[0]);
        const auto f = SizeFilter::init(seq.frames[0], box, cfg);
        const auto e = f.detect(seq.frames[1], box.center(), box.w, box.h);
        EXPECT_EQ(e.scale_exponent, 0);
        EXPECT_EQ(e.aspect_exponent, k);
        EXPECT_NEAR(e.w / box.w, fa, 1e-12);
        EXPECT_NEAR(e.h / box.h, 1.0 / fa, 1e-12);
    }
}

TEST(SizeFilter, AspectOverSeveralStepsIsRecovered) {
    const TrackerConfig cfg;
    for (int k : {2, 3}) {
        const auto seq = resized_pair(std::pow(cfg.phi, k), std::pow(cfg.phi, -k), 96);
        const auto box = Bbox4DoF::from_rect(seq.truth[0]);
        const auto f = SizeFilter::init(seq.frames[0], box, cfg);
        const auto e = f.detect(seq.frames[1], box.center(), box.w, box.h);
        EXPECT_EQ(e.aspect_exponent, k);
        EXPECT_NEAR(e.w / e.h, box.w / box.h * std::pow(cfg.phi, 2 * k), 1e-9);
    }
}

TEST(SizeProperty, ResponseMatchesBruteForceOnSmallGrids) {
    std::mt19937_64 rng(21);
    const Frame f0 = render_preset("drift", 1).frames[0];
    const Frame f1 = noise_frame(160, 120, 22);
    for (auto [S, A] : {std::pair{3, 3}, std::pair{5, 7}, std::pair{7, 5}, std::pair{7, 7}}) {
        TrackerConfig cfg;
        cfg.S = S;
        cfg.A = A;
        const SizeFilter f(build_grid(cfg), SizeSampling::from(cfg), cfg.sigma_size, cfg.lambda);
        for (const Frame* frame : {&f0, &f1}) {
            const Point2 c{uniform(rng, 40, 110), uniform(rng, 40, 80)};
            const double w = uniform(rng, 20, 60), h = uniform(rng, 20, 60);
            const auto train = f.sample(*frame, c, w, h);
            const auto probe = f.sample(*frame, {c.x + uniform(rng, -5, 5), c.y + uniform(rng, -5, 5)},
                                        w * uniform(rng, 0.9, 1.1), h * uniform(rng, 0.9, 1.1));
            const auto R = correlate_response(f.fresh_model(train), probe.channels);
            const auto oracle =
                brute_correlate(oracle_spatial_filter(train.channels, f.label(), cfg.lambda), probe.channels);
            ASSERT_LE(max_abs_diff(R, oracle), 1e-6) << S << "x" << A;
        }
    }
}

TEST(SizeProperty, EstimatesAreGridMembersWithBoundedStep) {
    std::mt19937_64 rng(23);
    const TrackerConfig cfg;
    const SizeFilter f(build_grid(cfg), SizeSampling::from(cfg), cfg.sigma_size, cfg.lambda);
    const Frame frame = uniform_frame(640, 360, 0);
    for (int trial = 0; trial < 200; ++trial) {
        const double w = uniform(rng, 10, 200), h = uniform(rng, 10, 200);
        const auto e = f.estimate(random_plane(13, 13, rng), frame, w, h);
        ASSERT_LE(std::abs(e.scale_exponent), 6);
        ASSERT_LE(std::abs(e.aspect_exponent), 6);
        const double sf = std::pow(cfg.gamma, e.scale_exponent), af = std::pow(cfg.phi, e.aspect_exponent);
        ASSERT_NEAR(e.w / w, sf * af, 1e-12);
        ASSERT_NEAR(e.h / h, sf / af, 1e-12);
        const double dlog = 0.5 * std::log(e.w * e.h / (w * h));
        ASSERT_LE(std::abs(dlog), 6 * std::log(cfg.gamma) + 1e-12);
    }
}

TEST(SizeProperty, DoublingIsReachableInFourSteps) {
    const TrackerConfig cfg;
    const SizeFilter f(build_grid(cfg), SizeSampling::from(cfg), cfg.sigma_size, cfg.lambda);
    const Frame frame = uniform_frame(640, 360, 0);
    RealPlane peak(13, 13, 0.0);
    peak(6, 0) = 1.0;  // exponent +6 on the scale axis, 0 on the aspect axis
    const int steps = static_cast<int>(std::ceil(std::log(2.0) / (6 * std::log(cfg.gamma))));
    EXPECT_EQ(steps, 4);
    double w = 40, h = 30;
    for (int i = 0; i < steps; ++i) {
        if (i == steps - 1) EXPECT_LT(w / 40, 2.0);
        const auto e = f.estimate(peak, frame, w, h);
        EXPECT_EQ(e.scale_exponent, 6);
        w = e.w;
        h = e.h;
    }
    EXPECT_GE(w / 40, 2.0);
    EXPECT_GE(h / 30, 2.0);
}

TEST(SizeFilter, EstimateIsClamped) {
    const TrackerConfig cfg;
    const SizeFilter f(build_grid(cfg), SizeSampling::from(cfg), cfg.sigma_size, cfg.lambda);
    const Frame frame = uniform_frame(100, 50, 0);
    RealPlane up(13, 13, 0.0), down(13, 13, 0.0);
    up(6, 0) = 1.0;
    down(7, 0) = 1.0;  // exponent -6
    const auto big = f.estimate(up, frame, 199, 99.5);
    EXPECT_EQ(big.w, 200.0);
    EXPECT_EQ(big.h, 100.0);
    const auto small = f.estimate(down, frame, 4.1, 4.2);
    EXPECT_EQ(small.w, 4.0);
    EXPECT_EQ(small.h, 4.0);
}
