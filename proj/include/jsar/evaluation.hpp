#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "jsar/error.hpp"
#include "jsar/geometry.hpp"
#include "jsar/tracker.hpp"

namespace jsar {

struct SequenceRecord {
    std::string name;
    std::vector<std::filesystem::path> frames;
    std::vector<std::optional<Rect>> truth;  // empty = out of view

    int size() const { return static_cast<int>(frames.size()); }
};

namespace detail {

inline bool is_image_file(const std::filesystem::path& p) {
    auto ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".png" || ext == ".bmp" || ext == ".jpg" || ext == ".jpeg";
}

inline std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',' || c == '\t' || c == ' ') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

inline double parse_number(const std::string& s, const std::string& where) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size()) throw Error(ErrorKind::Parse, where + ": not a number: '" + s + "'");
    return v;
}

}  // namespace detail

/// Parses ground-truth text: one `x,y,w,h` line per frame (comma, tab or space
/// separated); a line with any NaN field marks the target out of view.
inline std::vector<std::optional<Rect>> parse_groundtruth(const std::string& text) {
    std::vector<std::optional<Rect>> out;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto f = detail::split_fields(line);
        if (f.empty()) {
            if (in.peek() == EOF) break;
            throw Error(ErrorKind::Parse, "groundtruth line " + std::to_string(line_no) + ": empty line");
        }
        const std::string where = "groundtruth line " + std::to_string(line_no);
        if (f.size() != 4) throw Error(ErrorKind::Parse, where + ": expected 4 fields, got " + std::to_string(f.size()));
        double v[4];
        bool absent = false;
        for (int i = 0; i < 4; ++i) {
            v[i] = detail::parse_number(f[i], where);
            if (std::isnan(v[i])) absent = true;
        }
        if (absent) {
            out.emplace_back();
            continue;
        }
        if (!(v[2] > 0.0) || !(v[3] > 0.0))
            throw Error(ErrorKind::Parse, where + ": width and height must be positive");
        out.emplace_back(Rect{v[0], v[1], v[2], v[3]});
    }
    return out;
}

/// `dir/img/*` (sorted by name) plus `dir/groundtruth.txt`. With
/// `truth_optional` a missing ground-truth file yields an empty truth list.
inline SequenceRecord load_sequence(const std::filesystem::path& dir, bool truth_optional = false) {
    namespace fs = std::filesystem;
    SequenceRecord rec;
    rec.name = fs::absolute(dir).lexically_normal().filename().string();
    if (rec.name.empty()) rec.name = fs::absolute(dir).lexically_normal().parent_path().filename().string();
    const fs::path img = dir / "img";
    if (!fs::is_directory(img)) throw Error(ErrorKind::Layout, "missing image folder " + img.string());
    for (const auto& e : fs::directory_iterator(img))
        if (e.is_regular_file() && detail::is_image_file(e.path())) rec.frames.push_back(e.path());
    std::sort(rec.frames.begin(), rec.frames.end(),
              [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
    if (rec.frames.empty()) throw Error(ErrorKind::Layout, "no image files in " + img.string());

    const fs::path gt = dir / "groundtruth.txt";
    if (!fs::exists(gt)) {
        if (truth_optional) return rec;
        throw Error(ErrorKind::Layout, "missing " + gt.string());
    }
    std::ifstream in(gt);
    if (!in) throw Error(ErrorKind::Io, "cannot read " + gt.string());
    std::stringstream ss;
    ss << in.rdbuf();
    rec.truth = parse_groundtruth(ss.str());
    if (rec.truth.size() != rec.frames.size())
        throw Error(ErrorKind::Layout, "frame/groundtruth count mismatch: " + std::to_string(rec.frames.size()) +
                                           " images but " + std::to_string(rec.truth.size()) + " groundtruth lines");
    if (!rec.truth.front())
        throw Error(ErrorKind::Layout, "groundtruth line 1: first-frame box must be present");
    return rec;
}

struct EvalResult {
    std::vector<double> center_errors;  // NaN where the target is out of view
    std::vector<double> ious;
    std::vector<double> precision_thresholds;
    std::vector<double> precision_curve;
    std::vector<double> success_thresholds;
    std::vector<double> success_curve;
    double precision_at_20 = 0.0;
    double auc = 0.0;
    double fps = 0.0;
    int evaluated_frames = 0;
};

inline std::vector<double> precision_thresholds() {
    std::vector<double> t(51);
    for (int i = 0; i <= 50; ++i) t[i] = i;
    return t;
}

inline std::vector<double> success_thresholds() {
    std::vector<double> t(51);
    for (int i = 0; i <= 50; ++i) t[i] = i * 0.02;
    return t;
}

/// Precision counts errors strictly below each threshold, success counts IoU
/// strictly above it. Out-of-view frames are left out of both.
inline EvalResult evaluate(const std::vector<Rect>& predicted, const std::vector<std::optional<Rect>>& truth,
                           double fps = 0.0) {
    if (predicted.size() != truth.size())
        throw Error(ErrorKind::DimensionMismatch, "evaluate: " + std::to_string(predicted.size()) +
                                                      " result rows vs " + std::to_string(truth.size()) +
                                                      " groundtruth rows");
    EvalResult r;
    r.fps = fps;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> errs, ious;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (!truth[i]) {
            r.center_errors.push_back(nan);
            r.ious.push_back(nan);
            continue;
        }
        const double e = center_error(predicted[i], *truth[i]);
        const double o = iou(predicted[i], *truth[i]);
        r.center_errors.push_back(e);
        r.ious.push_back(o);
        errs.push_back(e);
        ious.push_back(o);
    }
    if (errs.empty()) throw Error(ErrorKind::InvalidArgument, "evaluate: no frame with the target in view");
    r.evaluated_frames = static_cast<int>(errs.size());
    const double n = static_cast<double>(errs.size());
    r.precision_thresholds = precision_thresholds();
    r.success_thresholds = success_thresholds();
    for (double t : r.precision_thresholds)
        r.precision_curve.push_back(std::count_if(errs.begin(), errs.end(), [t](double e) { return e < t; }) / n);
    for (double t : r.success_thresholds)
        r.success_curve.push_back(std::count_if(ious.begin(), ious.end(), [t](double o) { return o > t; }) / n);
    r.precision_at_20 = r.precision_curve[20];
    double sum = 0.0;
    for (double v : r.success_curve) sum += v;
    r.auc = sum / static_cast<double>(r.success_curve.size());
    return r;
}

inline EvalResult evaluate(const TrackerOutput& out, const SequenceRecord& seq) {
    std::vector<Rect> pred;
    for (const auto& rec : out.records) pred.push_back(rec.box.rect());
    return evaluate(pred, seq.truth, out.fps);
}

// -------------------------------------------------------------- results file

struct ResultsFile {
    std::string sequence;
    std::string config_hash;
    double fps = 0.0;
    std::vector<FrameRecord> records;
    std::vector<std::pair<std::string, std::vector<double>>> curves;
};

namespace detail {

inline std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

}  // namespace detail

/// Line format:
///   sequence <name>
///   config_hash <hex>
///   fps <value>
///   frames <n>
///   idx,x,y,w,h,zeta,status      (n rows, x/y top-left)
///   curve <label> <v0> <v1> ...  (zero or more)
inline std::string format_results(const ResultsFile& r) {
    std::ostringstream o;
    o << "sequence " << r.sequence << '\n';
    o << "config_hash " << r.config_hash << '\n';
    o << "fps " << detail::fmt6(r.fps) << '\n';
    o << "frames " << r.records.size() << '\n';
    for (const auto& rec : r.records) {
        const Rect b = rec.box.rect();
        o << rec.index << ',' << detail::fmt6(b.x) << ',' << detail::fmt6(b.y) << ',' << detail::fmt6(b.w) << ','
          << detail::fmt6(b.h) << ',' << detail::fmt6(rec.zeta) << ',' << to_string(rec.status) << '\n';
    }
    for (const auto& [label, values] : r.curves) {
        o << "curve " << label;
        for (double v : values) o << ' ' << detail::fmt6(v);
        o << '\n';
    }
    return o.str();
}

inline ResultsFile parse_results(const std::string& text) {
    ResultsFile r;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    auto next = [&](const char* key) {
        ++line_no;
        if (!std::getline(in, line)) throw Error(ErrorKind::Parse, std::string("results: missing '") + key + "' line");
        const std::string prefix = std::string(key) + ' ';
        if (line.rfind(prefix, 0) != 0)
            throw Error(ErrorKind::Parse, "results line " + std::to_string(line_no) + ": expected '" + key + "'");
        return line.substr(prefix.size());
    };
    r.sequence = next("sequence");
    r.config_hash = next("config_hash");
    r.fps = detail::parse_number(next("fps"), "results line 3");
    const std::string count_text = next("frames");
    const int n = static_cast<int>(detail::parse_number(count_text, "results line 4"));
    if (n < 0) throw Error(ErrorKind::Parse, "results line 4: negative frame count");
    for (int i = 0; i < n; ++i) {
        ++line_no;
        const std::string where = "results row " + std::to_string(i) + " (line " + std::to_string(line_no) + ")";
        if (!std::getline(in, line)) throw Error(ErrorKind::Parse, where + ": missing");
        std::vector<std::string> f;
        std::stringstream ls(line);
        std::string tok;
        while (std::getline(ls, tok, ',')) f.push_back(tok);
        if (f.size() != 7) throw Error(ErrorKind::Parse, where + ": expected 7 fields, got " + std::to_string(f.size()));
        if (!f[6].empty() && f[6].back() == '\r') f[6].pop_back();
        FrameRecord rec;
        rec.index = static_cast<int>(detail::parse_number(f[0], where));
        const Rect b{detail::parse_number(f[1], where), detail::parse_number(f[2], where),
                     detail::parse_number(f[3], where), detail::parse_number(f[4], where)};
        rec.box = Bbox4DoF::from_rect(b);
        rec.zeta = detail::parse_number(f[5], where);
        try {
            rec.status = parse_status(f[6]);
        } catch (const Error&) {
            throw Error(ErrorKind::Parse, where + ": unknown status '" + f[6] + "'");
        }
        r.records.push_back(rec);
    }
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        std::istringstream ls(line);
        std::string kw, label;
        ls >> kw >> label;
        if (kw != "curve" || label.empty())
            throw Error(ErrorKind::Parse, "results line " + std::to_string(line_no) + ": expected 'curve <label> ...'");
        std::vector<double> values;
        std::string tok;
        while (ls >> tok) values.push_back(detail::parse_number(tok, "results line " + std::to_string(line_no)));
        r.curves.emplace_back(label, std::move(values));
    }
    return r;
}

/// Writes via a temporary sibling and a rename so readers never see a
/// partial file.
inline void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
        out << text;
        if (!out) throw Error(ErrorKind::Io, "write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot read " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_results(const ResultsFile& r, const std::filesystem::path& path) {
    write_text_atomic(path, format_results(r));
}

inline ResultsFile read_results(const std::filesystem::path& path) { return parse_results(read_text(path)); }

}  // namespace jsar
