#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "jsar/config.hpp"
#include "jsar/features.hpp"
#include "jsar/geometry.hpp"
#include "jsar/image.hpp"
#include "jsar/redetection.hpp"
#include "jsar/run_log.hpp"
#include "jsar/size_filter.hpp"
#include "jsar/translation_filter.hpp"

namespace jsar {

enum class Status { Tracked, Redetecting, Reinitialized };

inline const char* to_string(Status s) {
    switch (s) {
        case Status::Tracked: return "tracked";
        case Status::Redetecting: return "redetecting";
        case Status::Reinitialized: return "reinitialized";
    }
    return "tracked";
}

inline Status parse_status(std::string_view s) {
    if (s == "tracked") return Status::Tracked;
    if (s == "redetecting") return Status::Redetecting;
    if (s == "reinitialized") return Status::Reinitialized;
    throw Error(ErrorKind::Parse, "unknown status '" + std::string(s) + "'");
}

struct FrameRecord {
    int index = 0;
    Bbox4DoF box;
    double zeta = 0.0;
    Status status = Status::Tracked;
};

struct TrackerOutput {
    std::vector<FrameRecord> records;
    double fps = 0.0;
};

class Tracker {
public:
    static Tracker create(const Frame& frame, const Bbox4DoF& init_box, const TrackerConfig& cfg,
                          std::shared_ptr<const ColorNameTable> table, RunLog* log = nullptr) {
        validate(cfg);
        require_valid(init_box, "tracker init");
        Tracker t(cfg, log);
        t.translation_.emplace(TranslationFilter::init(frame, init_box, cfg, std::move(table)));
        if (cfg.mode == Mode::Jsar || cfg.mode == Mode::JsarRe) t.size_.emplace(SizeFilter::init(frame, init_box, cfg));
        if (cfg.mode == Mode::JsarRe) t.decision_ = t.translation_->model();
        t.box_ = init_box;
        t.redetect_ = RedetectState::from(cfg);
        const auto det = t.translation_->detect(frame, init_box.center(), init_box.size());
        t.first_ = {frame.index, init_box, det.peak_value, Status::Tracked};
        if (t.log_) {
            t.log_->add(frame.index, EventKind::Detect,
                        {{"zeta", det.peak_value}, {"cx", init_box.cx}, {"cy", init_box.cy}});
            t.log_->end_frame();
        }
        return t;
    }

    /// Record for the initialisation frame.
    const FrameRecord& first_record() const { return first_; }

    FrameRecord step(const Frame& frame) {
        const int t = frame.index;
        const auto det = translation_->detect(frame, box_.center(), box_.size());
        const double zeta = det.peak_value;
        log(t, EventKind::Detect, {{"zeta", zeta}, {"cx", det.new_center.x}, {"cy", det.new_center.y}});

        FrameRecord rec{t, box_, zeta, Status::Tracked};
        const bool lost = cfg_.mode == Mode::JsarRe && monitor(zeta, cfg_.zeta_e);
        if (!lost) {
            track(frame, det, rec);
        } else {
            redetect(frame, rec);
        }
        if (log_) log_->end_frame();
        return rec;
    }

    const Bbox4DoF& box() const { return box_; }
    const TrackerConfig& config() const { return cfg_; }
    const TranslationFilter& translation() const { return *translation_; }
    const std::optional<SizeFilter>& size_filter() const { return size_; }
    const std::optional<FilterModel>& decision() const { return decision_; }
    const RedetectState& redetect_state() const { return redetect_; }

private:
    Tracker(const TrackerConfig& cfg, RunLog* log) : cfg_(cfg), log_(log) {}

    void log(int frame, EventKind kind, std::vector<std::pair<std::string, double>> payload) {
        if (log_) log_->add(frame, kind, std::move(payload));
    }

    void track(const Frame& frame, const DetectionOutcome& det, FrameRecord& rec) {
        const int t = frame.index;
        Bbox4DoF next{det.new_center.x, det.new_center.y, box_.w, box_.h};

        if (cfg_.mode == Mode::MultiScaleBaseline) {
            next = best_scale(frame, det);
        } else if (size_ && !skip_size_) {
            const auto est = size_->detect(frame, next.center(), next.w, next.h);
            next.w = est.w;
            next.h = est.h;
            log(t, EventKind::SizeUpdate,
                {{"s", est.scale_exponent}, {"a", est.aspect_exponent}, {"w", est.w}, {"h", est.h},
                 {"peak", est.peak_value}});
        }
        skip_size_ = false;

        const FilterModel fresh = translation_->train(frame, next);
        translation_->blend(fresh, cfg_.theta_trans);
        if (size_) size_->update(size_->sample(frame, next.center(), next.w, next.h), cfg_.theta_size);
        if (decision_ && should_update_decision(rec.zeta, cfg_.zeta_s))
            *decision_ = interpolate_model(*decision_, fresh, cfg_.theta_trans);

        redetect_ = RedetectState::from(cfg_);
        box_ = next;
        rec.box = next;
        rec.status = Status::Tracked;
    }

    /// Brute-force comparator: re-runs detection at a few isotropic scales and
    /// keeps the one with the highest response peak.
    Bbox4DoF best_scale(const Frame& frame, const DetectionOutcome& unit) {
        const int half = cfg_.baseline_scales / 2;
        Bbox4DoF best{unit.new_center.x, unit.new_center.y, box_.w, box_.h};
        double best_peak = unit.peak_value;
        for (int i = -half; i <= half; ++i) {
            if (i == 0) continue;
            const double f = std::pow(cfg_.baseline_step, i);
            const Size2 sz{box_.w * f, box_.h * f};
            const auto d = translation_->detect(frame, box_.center(), sz);
            if (d.peak_value > best_peak) {
                best_peak = d.peak_value;
                best = {d.new_center.x, d.new_center.y, sz.w, sz.h};
            }
        }
        best.w = std::clamp(best.w, 4.0, 2.0 * frame.width);
        best.h = std::clamp(best.h, 4.0, 2.0 * frame.height);
        return best;
    }

    void redetect(const Frame& frame, FrameRecord& rec) {
        const int t = frame.index;
        if (!redetect_.active) {
            redetect_.active = true;
            log(t, EventKind::RedetectEnter, {{"zeta", rec.zeta}, {"omega", redetect_.omega}, {"eta_d", redetect_.eta_d}});
        }
        rec.box = box_;
        rec.status = Status::Redetecting;
        const auto proposals = generate_proposals(frame, box_, redetect_.omega, cfg_.N_e);
        if (proposals.empty()) {
            log(t, EventKind::ProposalStats, {{"count", 0}, {"eta_b", 0}, {"eta_d", redetect_.eta_d}, {"omega", redetect_.omega}});
            escalate_now(frame);
            return;
        }
        const auto scored = score_proposals(*decision_, *translation_, frame, proposals);
        log(t, EventKind::ProposalStats,
            {{"count", static_cast<double>(proposals.size())}, {"eta_b", scored.eta_b}, {"eta_d", redetect_.eta_d},
             {"omega", redetect_.omega}, {"best_k", scored.best.k}});
        if (!decide_reinit(scored.eta_b, redetect_.eta_d)) {
            escalate_now(frame);
            return;
        }
        Bbox4DoF b = scored.refined;
        b.cx = std::clamp(b.cx, 0.0, static_cast<double>(frame.width));
        b.cy = std::clamp(b.cy, 0.0, static_cast<double>(frame.height));
        translation_->reset(translation_->train(frame, b));
        if (size_) size_->train(size_->sample(frame, b.center(), b.w, b.h));
        log(t, EventKind::Reinit, {{"cx", b.cx}, {"cy", b.cy}, {"w", b.w}, {"h", b.h}, {"eta_b", scored.eta_b}});
        redetect_ = RedetectState::from(cfg_);
        skip_size_ = true;
        box_ = b;
        rec.box = b;
        rec.status = Status::Reinitialized;
    }

    void escalate_now(const Frame& frame) {
        const EscalationLimits lim{cfg_.omega_growth, cfg_.eta_d_decay, omega_cover(frame, box_), cfg_.eta_d_floor};
        const bool was_active = redetect_.active;
        redetect_ = escalate(redetect_, lim);
        redetect_.active = was_active;
    }

    TrackerConfig cfg_;
    RunLog* log_ = nullptr;
    std::optional<TranslationFilter> translation_;
    std::optional<SizeFilter> size_;
    std::optional<FilterModel> decision_;
    RedetectState redetect_;
    Bbox4DoF box_;
    FrameRecord first_;
    bool skip_size_ = false;
};

/// Frames are fetched on demand so long sequences need not sit in memory.
/// Timing covers tracking only, not frame loading.
inline TrackerOutput run_sequence(int frame_count, const std::function<Frame(int)>& fetch, const Bbox4DoF& init_box,
                                  const TrackerConfig& cfg, std::shared_ptr<const ColorNameTable> table,
                                  RunLog* log = nullptr) {
    if (frame_count < 1) throw Error(ErrorKind::InvalidArgument, "run_sequence needs at least one frame");
    using clock = std::chrono::steady_clock;
    TrackerOutput out;
    out.records.reserve(frame_count);
    clock::duration busy{};
    Frame f = fetch(0);
    f.index = 0;
    auto t0 = clock::now();
    Tracker tracker = Tracker::create(f, init_box, cfg, std::move(table), log);
    busy += clock::now() - t0;
    out.records.push_back(tracker.first_record());
    for (int i = 1; i < frame_count; ++i) {
        f = fetch(i);
        f.index = i;
        t0 = clock::now();
        out.records.push_back(tracker.step(f));
        busy += clock::now() - t0;
    }
    const double secs = std::chrono::duration<double>(busy).count();
    out.fps = secs > 0.0 ? frame_count / secs : 0.0;
    return out;
}

inline TrackerOutput run_sequence(const std::vector<Frame>& frames, const Bbox4DoF& init_box, const TrackerConfig& cfg,
                                  std::shared_ptr<const ColorNameTable> table, RunLog* log = nullptr) {
    return run_sequence(
        static_cast<int>(frames.size()), [&](int i) { return frames[i]; }, init_box, cfg, std::move(table), log);
}

}  // namespace jsar
