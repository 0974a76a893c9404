#pragma once

#include <cstdio>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace jsar {

enum class EventKind { Detect, SizeUpdate, RedetectEnter, ProposalStats, Reinit };

inline const char* to_string(EventKind k) {
    switch (k) {
        case EventKind::Detect: return "detect";
        case EventKind::SizeUpdate: return "size_update";
        case EventKind::RedetectEnter: return "redetect_enter";
        case EventKind::ProposalStats: return "proposal_stats";
        case EventKind::Reinit: return "reinit";
    }
    return "?";
}

struct LogEvent {
    int frame = 0;
    EventKind kind = EventKind::Detect;
    std::vector<std::pair<std::string, double>> payload;

    double value(const std::string& key, double fallback = 0.0) const {
        for (const auto& [k, v] : payload)
            if (k == key) return v;
        return fallback;
    }
};

/// Append-only event record of one tracker run. Lines are
/// `frame<TAB>kind<TAB>k=v,...`; with a sink attached they are written as
/// they happen and the sink is flushed at the end of every frame.
class RunLog {
public:
    void attach(std::ostream* sink) { sink_ = sink; }

    void add(int frame, EventKind kind, std::vector<std::pair<std::string, double>> payload) {
        events_.push_back({frame, kind, std::move(payload)});
        if (sink_) *sink_ << format(events_.back()) << '\n';
    }

    void end_frame() {
        if (sink_) sink_->flush();
    }

    const std::vector<LogEvent>& events() const { return events_; }

    std::vector<LogEvent> events_of(EventKind kind) const {
        std::vector<LogEvent> out;
        for (const auto& e : events_)
            if (e.kind == kind) out.push_back(e);
        return out;
    }

    static std::string format(const LogEvent& e) {
        std::string line = std::to_string(e.frame) + '\t' + to_string(e.kind) + '\t';
        for (std::size_t i = 0; i < e.payload.size(); ++i) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.9g", e.payload[i].second);
            if (i) line += ',';
            line += e.payload[i].first + '=' + buf;
        }
        return line;
    }

private:
    std::vector<LogEvent> events_;
    std::ostream* sink_ = nullptr;
};

}  // namespace jsar
