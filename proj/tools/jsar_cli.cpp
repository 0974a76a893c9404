// Command-line frontend: track, eval, synth, bench.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <opencv2/core.hpp>

#include "jsar/jsar.hpp"

namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kUsage = 1, kLayout = 2, kConfig = 3, kRuntime = 4 };

int exit_code(const jsar::Error& e) {
    switch (e.kind()) {
        case jsar::ErrorKind::Layout:
        case jsar::ErrorKind::Parse:
        case jsar::ErrorKind::DimensionMismatch: return kLayout;
        case jsar::ErrorKind::Config: return kConfig;
        default: return kRuntime;
    }
}

struct CommonOptions {
    std::string config_path;
    std::string mode;
    std::string out = ".";
};

jsar::TrackerConfig load_config(const CommonOptions& o) {
    jsar::TrackerConfig cfg;
    if (!o.config_path.empty()) {
        if (!fs::exists(o.config_path))
            throw jsar::Error(jsar::ErrorKind::Config, "config file not found: " + o.config_path);
        cfg = jsar::parse_config(jsar::read_text(o.config_path));
    }
    if (!o.mode.empty()) cfg.mode = jsar::parse_mode(o.mode);
    jsar::validate(cfg);
    return cfg;
}

std::optional<jsar::Rect> parse_box(const std::string& text) {
    if (text.empty()) return std::nullopt;
    const auto lines = jsar::parse_groundtruth(text);
    if (lines.size() != 1 || !lines.front())
        throw jsar::Error(jsar::ErrorKind::Layout, "--init expects x,y,w,h");
    return lines.front();
}

struct TrackRun {
    jsar::SequenceRecord seq;
    jsar::TrackerOutput output;
    std::optional<jsar::EvalResult> metrics;
    fs::path results_path;
};

std::vector<std::pair<std::string, std::vector<double>>> curves_of(const jsar::EvalResult& r) {
    return {{"precision", r.precision_curve}, {"success", r.success_curve}};
}

TrackRun run_track(const fs::path& seq_dir, const jsar::TrackerConfig& cfg, const fs::path& out_dir,
                   const std::optional<jsar::Rect>& init, bool overlay) {
    TrackRun run;
    run.seq = jsar::load_sequence(seq_dir, /*truth_optional=*/true);
    const bool has_truth = !run.seq.truth.empty();
    jsar::Rect start;
    if (init)
        start = *init;
    else if (has_truth)
        start = *run.seq.truth.front();
    else
        throw jsar::Error(jsar::ErrorKind::Layout,
                          "no groundtruth.txt in " + seq_dir.string() + " and no --init box given");

    fs::create_directories(out_dir);
    std::ofstream log_file(out_dir / (run.seq.name + ".log"));
    jsar::RunLog log;
    log.attach(&log_file);
    const auto table = jsar::ColorNameTable::load_default();
    run.output = jsar::run_sequence(
        run.seq.size(), [&](int i) { return jsar::load_image(run.seq.frames[i]); },
        jsar::Bbox4DoF::from_rect(start), cfg, table, &log);

    jsar::ResultsFile rf{run.seq.name, jsar::hash_hex(jsar::config_hash(cfg)), run.output.fps,
                         run.output.records, {}};
    if (has_truth) {
        run.metrics = jsar::evaluate(run.output, run.seq);
        rf.curves = curves_of(*run.metrics);
    }
    run.results_path = out_dir / (run.seq.name + ".results.txt");
    jsar::write_results(rf, run.results_path);

    if (overlay) {
        const fs::path dir = out_dir / (run.seq.name + "_overlay");
        fs::create_directories(dir);
        for (int i = 0; i < run.seq.size(); ++i) {
            jsar::Frame f = jsar::load_image(run.seq.frames[i]);
            if (has_truth && run.seq.truth[i]) jsar::draw_rect(f, *run.seq.truth[i], {255, 0, 0});
            jsar::draw_rect(f, run.output.records[i].box.rect(), {0, 255, 0});
            char name[32];
            std::snprintf(name, sizeof name, "%05d.png", i + 1);
            const fs::path tmp = dir / (std::string("tmp_") + name);
            jsar::save_image(tmp, f);
            fs::rename(tmp, dir / name);
        }
    }
    return run;
}

std::string metrics_text(const jsar::EvalResult& r, const std::string& name) {
    std::string s = "sequence " + name + "\n";
    char buf[128];
    std::snprintf(buf, sizeof buf, "precision_at_20 %.6f\nauc %.6f\nfps %.6f\nframes %d\n", r.precision_at_20,
                  r.auc, r.fps, r.evaluated_frames);
    s += buf;
    for (const auto& [label, values] : curves_of(r)) {
        s += "curve " + label;
        for (double v : values) {
            std::snprintf(buf, sizeof buf, " %.6f", v);
            s += buf;
        }
        s += '\n';
    }
    return s;
}

void print_metrics(const jsar::EvalResult& r) {
    std::printf("precision@20 = %.3f\nAUC = %.3f\nfps = %.1f\n", r.precision_at_20, r.auc, r.fps);
}

}  // namespace

int main(int argc, char** argv) {
    cv::setNumThreads(1);
    CLI::App app{"Correlation-filter tracker with joint scale and aspect-ratio estimation"};
    app.require_subcommand(1);

    CommonOptions common;
    auto add_common = [&](CLI::App* sub, bool with_config) {
        if (with_config) {
            sub->add_option("--config", common.config_path, "key = value tracker configuration file");
            sub->add_option("--mode", common.mode, "jsar | jsar-re | translation-only | multi-scale-baseline");
        }
        sub->add_option("--out", common.out, "output directory")->capture_default_str();
    };

    std::string seq_dir, init_text;
    bool overlay = false;
    auto* track = app.add_subcommand("track", "run the tracker over one sequence directory");
    track->add_option("sequence", seq_dir, "directory with img/ and optional groundtruth.txt")->required();
    track->add_option("--init", init_text, "initial box x,y,w,h (default: first groundtruth line)");
    track->add_flag("--overlay", overlay, "write frames with the boxes drawn in");
    add_common(track, true);

    std::string results_path, eval_seq;
    auto* eval = app.add_subcommand("eval", "score a results file against a sequence's groundtruth");
    eval->add_option("results", results_path, "results file written by track")->required();
    eval->add_option("sequence", eval_seq, "sequence directory")->required();
    add_common(eval, false);

    std::string preset_name;
    std::uint64_t seed = 1;
    auto* synth = app.add_subcommand("synth", "render a synthetic preset to a sequence directory");
    synth->add_option("preset", preset_name, "static | drift | zoom_in | aspect_shear | occlusion_20f | teleport")
        ->required()
        ->check(CLI::IsMember(jsar::preset_names()));
    synth->add_option("--seed", seed, "scene seed")->capture_default_str();
    add_common(synth, false);

    std::vector<std::string> bench_dirs;
    auto* bench = app.add_subcommand("bench", "track and evaluate several sequences, ranked by AUC");
    bench->add_option("sequences", bench_dirs, "sequence directories")->required();
    add_common(bench, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (*track) {
            const auto cfg = load_config(common);
            const auto run = run_track(seq_dir, cfg, common.out, parse_box(init_text), overlay);
            std::printf("%s: %d frames, %.1f fps, results %s\n", run.seq.name.c_str(), run.seq.size(),
                        run.output.fps, run.results_path.string().c_str());
            if (run.metrics) print_metrics(*run.metrics);
        } else if (*eval) {
            const auto rf = jsar::read_results(results_path);
            const auto seq = jsar::load_sequence(eval_seq);
            std::vector<jsar::Rect> pred;
            for (const auto& r : rf.records) pred.push_back(r.box.rect());
            const auto m = jsar::evaluate(pred, seq.truth, rf.fps);
            print_metrics(m);
            jsar::write_text_atomic(fs::path(common.out) / (seq.name + ".metrics.txt"), metrics_text(m, seq.name));
        } else if (*synth) {
            const auto sc = jsar::preset(preset_name, seed);
            jsar::export_sequence(jsar::render(sc), common.out);
            std::printf("wrote %d frames of '%s' (seed %llu) to %s\n", sc.frames(), preset_name.c_str(),
                        static_cast<unsigned long long>(seed), common.out.c_str());
        } else if (*bench) {
            const auto cfg = load_config(common);
            struct Row {
                std::string name;
                double auc, precision, fps;
            };
            std::vector<Row> rows;
            for (const auto& d : bench_dirs) {
                const auto run = run_track(d, cfg, common.out, std::nullopt, false);
                if (!run.metrics) throw jsar::Error(jsar::ErrorKind::Layout, "bench needs groundtruth in " + d);
                rows.push_back({run.seq.name, run.metrics->auc, run.metrics->precision_at_20, run.output.fps});
            }
            std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.auc > b.auc; });
            std::printf("%-4s %-24s %8s %8s %8s\n", "rank", "sequence", "AUC", "P@20", "fps");
            double fps_sum = 0.0;
            for (std::size_t i = 0; i < rows.size(); ++i) {
                std::printf("%-4zu %-24s %8.3f %8.3f %8.1f\n", i + 1, rows[i].name.c_str(), rows[i].auc,
                            rows[i].precision, rows[i].fps);
                fps_sum += rows[i].fps;
            }
            std::printf("mean fps %.1f over %zu sequences (mode %s)\n", fps_sum / rows.size(), rows.size(),
                        jsar::to_string(cfg.mode));
        }
    } catch (const jsar::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: runtime: %s\n", e.what());
        return kRuntime;
    }
    return kOk;
}
