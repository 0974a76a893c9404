#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

using namespace jsar;
using namespace jsar::testing;

namespace {

struct Scene {
    RenderedSequence seq;
    Bbox4DoF box;
};

const Scene& static_scene() {
    static const Scene s = [] {
        Scene sc;
        sc.seq = render_preset("static", 3);
        sc.box = Bbox4DoF::from_rect(sc.seq.truth[0]);
        return sc;
    }();
    return s;
}

double model_delta(const FilterModel& a, const FilterModel& b) {
    double m = max_abs_diff(a.denominator(), b.denominator());
    for (int d = 0; d < a.channels(); ++d)
        for (std::size_t i = 0; i < a.denominator().size(); ++i)
            m = std::max(m, std::abs(a.numerator()[d].data()[i] - b.numerator()[d].data()[i]));
    return m;
}

}  // namespace

TEST(TranslationFilter, DetectOnTrainingFrameStaysPut) {
    const auto& sc = static_scene();
    const TrackerConfig cfg;
    const auto f = TranslationFilter::init(sc.seq.frames[0], sc.box, cfg, cn_table());
    const auto det = f.detect(sc.seq.frames[0], sc.box.center(), sc.box.size());
    EXPECT_EQ(det.peak.row, 0);
    EXPECT_EQ(det.peak.col, 0);
    EXPECT_LE(std::abs(det.new_center.x - sc.box.cx), cfg.C);
    EXPECT_LE(std::abs(det.new_center.y - sc.box.cy), cfg.C);
}

TEST(TranslationFilter, TrainingFramePeakIsWellAboveFailureThreshold) {
    const auto& sc = static_scene();
    const TrackerConfig cfg;
    const auto f = TranslationFilter::init(sc.seq.frames[0], sc.box, cfg, cn_table());
    EXPECT_GT(f.detect(sc.seq.frames[0], sc.box.center(), sc.box.size()).peak_value, cfg.zeta_e);
}

TEST(TranslationFilter, InitIsDeterministic) {
    const auto& sc = static_scene();
    const TrackerConfig cfg;
    const auto a = TranslationFilter::init(sc.seq.frames[0], sc.box, cfg, cn_table());
    const auto b = TranslationFilter::init(sc.seq.frames[0], sc.box, cfg, cn_table());
    EXPECT_EQ(a.model(), b.model());
}

TEST(TranslationFilter, StaticSceneHasNoDisplacement) {
    const auto& sc = static_scene();
    const TrackerConfig cfg;
    auto f = TranslationFilter::init(sc.seq.frames[0], sc.box, cfg, cn_table());
    const Frame& frame = sc.seq.frames[0];
    for (int t = 0; t < 5; ++t) {
        const auto det = f.detect(frame, sc.box.center(), sc.box.size());
        EXPECT_EQ(det.peak.row, 0);
        EXPECT_EQ(det.peak.col, 0);
        EXPECT_NEAR(det.displacement.x, 0.0, 0.05);
        EXPECT_NEAR(det.displacement.y, 0.0, 0.05);
        f.update(frame, sc.box, cfg.theta_trans);
    }
}

TEST(TranslationFilter, EightPixelShiftIsTwoCells) {
    const auto& sc = static_scene();
    const TrackerConfig cfg;
    const auto f = TranslationFilter::init(sc.seq.frames[0], sc.box, cfg, cn_table());
    const Frame moved = shifted(sc.seq.frames[0], 8, 0);
    const auto det = f.detect(moved, sc.box.center(), sc.box.size());
    const auto& geo = f.setup().geometry;
    // Response is on the template pixel grid; convert the peak to frame px.
    const double px_per_template = sc.box.w * f.setup().padding / geo.template_w;
    const double cells = detail::wrap_signed(det.peak.col, det.response.cols()) * px_per_template / cfg.C;
    EXPECT_NEAR(cells, 2.0, 0.5);
    EXPECT_NEAR(det.displacement.x, 8.0, 1.0);
    EXPECT_NEAR(det.displacement.y, 0.0, 1.0);
}

TEST(TranslationFilter, OccluderLowersPeak) {
    Scenario s = truncated(preset("static", 1), 3);
    s.occlusions.push_back({2, 2});
    const auto seq = render(s);
    const auto box = Bbox4DoF::from_rect(seq.truth[0]);
    const TrackerConfig cfg;
    const auto f = TranslationFilter::init(seq.frames[0], box, cfg, cn_table());
    const double visible = f.detect(seq.frames[1], box.center(), box.size()).peak_value;
    const double hidden = f.detect(seq.frames[2], box.center(), box.size()).peak_value;
    EXPECT_LT(hidden, visible);
    EXPECT_LT(hidden, cfg.zeta_e);
}

TEST(TranslationFilter, UpdateRateEndpoints) {
    const auto seq = render_preset("drift", 5);
    const auto box0 = Bbox4DoF::from_rect(seq.truth[0]);
    const auto box4 = Bbox4DoF::from_rect(seq.truth[4]);
    const TrackerConfig cfg;
    auto f = TranslationFilter::init(seq.frames[0], box0, cfg, cn_table());
    const FilterModel before = f.model();
    f.update(seq.frames[4], box4, 0.0);
    EXPECT_EQ(f.model(), before);
    f.update(seq.frames[4], box4, 1.0);
    EXPECT_EQ(f.model(), f.train(seq.frames[4], box4));
}

TEST(TranslationFilter, RepeatedUpdatesConverge) {
    const auto seq = render_preset("drift", 10);
    const auto box0 = Bbox4DoF::from_rect(seq.truth[0]);
    const auto box9 = Bbox4DoF::from_rect(seq.truth[9]);
    const TrackerConfig cfg;
    auto f = TranslationFilter::init(seq.frames[0], box0, cfg, cn_table());
    double prev = std::numeric_limits<double>::infinity();
    double last = prev;
    for (int i = 0; i < 80; ++i) {
        const FilterModel before = f.model();
        f.update(seq.frames[9], box9, 0.5);
        last = model_delta(before, f.model());
        ASSERT_LE(last, prev);
        prev = last;
    }
    EXPECT_LE(last, 1e-12);
}

TEST(TranslationFilter, ShiftingContentAndCentreTogetherIsExact) {
    const auto& sc = static_scene();
    const TrackerConfig cfg;
    const auto f = TranslationFilter::init(sc.seq.frames[0], sc.box, cfg, cn_table());
    const Frame& probe = sc.seq.frames[1];
    const Point2 start{sc.box.cx + 5, sc.box.cy - 3};
    const auto base = f.detect(probe, start, sc.box.size());
    for (auto [dx, dy] : {std::pair{4, 0}, std::pair{0, 8}, std::pair{-12, 4}, std::pair{16, -16}}) {
        const auto det = f.detect(shifted(probe, dx, dy), {start.x + dx, start.y + dy}, sc.box.size());
        EXPECT_EQ(det.displacement, base.displacement);
        EXPECT_EQ(det.new_center.x, base.new_center.x + dx);
        EXPECT_EQ(det.new_center.y, base.new_center.y + dy);
    }
}

TEST(TranslationFilter, PeakValueIsResponseMaximum) {
    const auto seq = render_preset("drift", 6);
    const TrackerConfig cfg;
    const auto box = Bbox4DoF::from_rect(seq.truth[0]);
    const auto f = TranslationFilter::init(seq.frames[0], box, cfg, cn_table());
    for (int t = 1; t < 6; ++t) {
        const auto det = f.detect(seq.frames[t], box.center(), box.size());
        const auto vals = det.response.values();
        EXPECT_EQ(det.peak_value, *std::max_element(vals.begin(), vals.end()));
        const Size2 roi = f.setup().roi_size(box.size());
        EXPECT_LE(std::abs(det.displacement.x), roi.w / 2);
        EXPECT_LE(std::abs(det.displacement.y), roi.h / 2);
    }
}

TEST(TranslationFilter, CentreIsClampedToFrame) {
    const auto& sc = static_scene();
    const TrackerConfig cfg;
    const auto f = TranslationFilter::init(sc.seq.frames[0], sc.box, cfg, cn_table());
    const auto det = f.detect(sc.seq.frames[0], {1.0, 1.0}, sc.box.size());
    EXPECT_GE(det.new_center.x, 0.0);
    EXPECT_GE(det.new_center.y, 0.0);
    EXPECT_LE(det.new_center.x, sc.seq.frames[0].width);
    EXPECT_LE(det.new_center.y, sc.seq.frames[0].height);
}

TEST(TranslationFilter, ModelShapeNeverChanges) {
    const auto seq = render_preset("zoom_in", 8);
    const TrackerConfig cfg;
    auto f = TranslationFilter::init(seq.frames[0], Bbox4DoF::from_rect(seq.truth[0]), cfg, cn_table());
    const int M = f.model().rows(), N = f.model().cols(), D = f.model().channels();
    EXPECT_EQ(D, 42);
    for (int t = 1; t < 8; ++t) {
        f.update(seq.frames[t], Bbox4DoF::from_rect(seq.truth[t]), cfg.theta_trans);
        EXPECT_EQ(f.model().rows(), M);
        EXPECT_EQ(f.model().cols(), N);
        EXPECT_EQ(f.model().channels(), D);
    }
}

TEST(TranslationFilter, DegenerateBoxIsRejected) {
    const auto& sc = static_scene();
    try {
        TranslationFilter::init(sc.seq.frames[0], {100, 100, 0, 10}, TrackerConfig{}, cn_table());
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::InvalidArgument);
    }
}

TEST(TranslationSetup, TemplateSnapsToCells) {
    const TrackerConfig cfg;
    for (auto box : {Bbox4DoF{0, 0, 48, 48}, Bbox4DoF{0, 0, 100, 20}, Bbox4DoF{0, 0, 9, 300}}) {
        const auto s = TranslationSetup::make(box, cfg);
        EXPECT_EQ(s.geometry.template_w % cfg.C, 0);
        EXPECT_EQ(s.geometry.template_h % cfg.C, 0);
        EXPECT_GE(s.geometry.rows(), 3);
        EXPECT_GE(s.geometry.cols(), 3);
        EXPECT_DOUBLE_EQ(s.padding, 2.0);
        EXPECT_EQ(argmax(s.label).row, 0);
        EXPECT_EQ(argmax(s.label).col, 0);
    }
}

TEST(PeakRefinement, ParabolaVertex) {
    EXPECT_DOUBLE_EQ(detail::parabola_offset(1.0, 2.0, 1.0), 0.0);
    // y = -(x - 0.25)^2 sampled at -1, 0, 1.
    EXPECT_NEAR(detail::parabola_offset(-1.5625, -0.0625, -0.5625), 0.25, 1e-12);
    EXPECT_EQ(detail::parabola_offset(1.0, 1.0, 1.0), 0.0);
    EXPECT_EQ(detail::wrap_signed(0, 8), 0);
    EXPECT_EQ(detail::wrap_signed(3, 8), 3);
    EXPECT_EQ(detail::wrap_signed(4, 8), -4);
    EXPECT_EQ(detail::wrap_signed(7, 8), -1);
}
