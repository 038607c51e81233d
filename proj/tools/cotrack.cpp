#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include "cotrack/errors.hpp"
#include "cotrack/eval.hpp"
#include "cotrack/selfcheck.hpp"
#include "cotrack/synth.hpp"
#include "cotrack/tracker.hpp"

namespace fs = std::filesystem;
using namespace cotrack;

namespace {

// Exit codes: 0 ok, 1 partial bench failure, 2 config/argument error,
// 3 io/data error, 4 numerical error.
int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const InvalidArgument*>(&e))
        return 2;
    if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const DataError*>(&e))
        return 3;
    if (dynamic_cast<const NumericalError*>(&e))
        return 4;
    return 1;
}

TrackerConfig config_from_options(const std::string& config_path,
                                  const std::string& features) {
    TrackerConfig cfg = config_path.empty() ? TrackerConfig{} : load_config(config_path);
    if (!features.empty()) {
        cfg.features_enabled.clear();
        std::stringstream ss(features);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (item == "hog") cfg.features_enabled.push_back(FeatureKind::Hog);
            else if (item == "cn") cfg.features_enabled.push_back(FeatureKind::Cn);
            else if (item == "lbp") cfg.features_enabled.push_back(FeatureKind::Lbp);
            else throw ConfigError("config: unknown feature \"" + item + "\"");
        }
        cfg.validate();
    }
    return cfg;
}

TrackResult track_dataset(const SequenceDataset& ds, const TrackerConfig& cfg,
                          const TrackOptions& opts = {}) {
    FrameSource frames = [&ds](int t) { return load_image(ds.frame_paths[t]); };
    return track_sequence(frames, static_cast<int>(ds.frame_paths.size()), ds.gt_boxes.at(0),
                          cfg, opts);
}

EvalReport evaluate_run(const std::vector<BBox>& boxes, const std::vector<BBox>& gt) {
    std::vector<double> overlaps(boxes.size());
    for (std::size_t i = 0; i < boxes.size(); ++i)
        overlaps[i] = overlap_ratio(boxes[i], gt[i]);
    return success_analysis(overlaps);
}

int run_track(const std::string& seq_dir, const std::string& config_path,
              const std::string& out_csv, const std::string& render_dir,
              const std::string& trace_csv, const std::string& features) {
    const TrackerConfig cfg = config_from_options(config_path, features);
    const SequenceDataset ds = load_otb_sequence(seq_dir);

    std::ofstream trace_stream;
    TrackOptions opts;
    opts.render_dir = render_dir;
    if (!trace_csv.empty()) {
        trace_stream.open(trace_csv);
        if (!trace_stream)
            throw IoError("cannot write trace \"" + trace_csv + "\"");
        opts.trace = &trace_stream;
    }

    const TrackResult result = track_dataset(ds, cfg, opts);
    write_boxes_csv(result.boxes, out_csv);
    if (result.lost_at)
        std::cerr << "warning: lost at frame " << *result.lost_at << "\n";
    if (result.cn_fallback)
        std::cerr << "note: grayscale input, color naming replaced by intensity\n";
    for (int f : result.skipped_updates)
        std::cerr << "note: model update skipped at frame " << f << "\n";
    std::cout << ds.name << ": " << result.boxes.size() << " frames tracked -> " << out_csv
              << "\n";
    return 0;
}

int run_eval(const std::string& results_csv, const std::string& seq_dir) {
    const SequenceDataset ds = load_otb_sequence(seq_dir);
    const std::vector<BBox> boxes = read_boxes_csv(results_csv);
    if (boxes.size() != ds.gt_boxes.size())
        throw DataError("eval: " + std::to_string(boxes.size()) + " result rows but " +
                        std::to_string(ds.gt_boxes.size()) + " ground-truth boxes");
    const EvalReport rep = evaluate_run(boxes, ds.gt_boxes);
    std::printf("average overlap %.3f\n", rep.average_overlap);
    std::printf("auc %.3f\n", rep.auc);
    fs::path report_path(results_csv);
    report_path.replace_extension(".report.csv");
    write_report_csv({{ds.name, rep}}, report_path.string());
    std::cout << "report written to " << report_path.string() << "\n";
    return 0;
}

int run_synth(const std::string& kind, const SynthSpec& base, const std::string& out_dir) {
    SynthSpec spec = base;
    spec.kind = synth_kind_from_name(kind);
    const SequenceDataset ds = generate_synthetic(spec, out_dir);
    std::cout << out_dir << ": " << ds.frame_paths.size() << " frames\n";
    return 0;
}

struct SuiteSpec {
    std::vector<std::string> sequences;
    std::vector<std::string> configs; // "default" or config file paths
    std::vector<std::string> names;   // column names (defaults derived)
    std::string out_prefix = "report";
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> parse_string_list(const std::string& v, const std::string& key) {
    if (v.size() < 2 || v.front() != '[' || v.back() != ']')
        throw ConfigError("suite: key \"" + key + "\" expects a [..] list");
    std::vector<std::string> items;
    std::stringstream ss(v.substr(1, v.size() - 2));
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty())
            items.push_back(item);
    }
    return items;
}

SuiteSpec load_suite(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("suite: cannot read \"" + path + "\"");
    SuiteSpec suite;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("suite: line " + std::to_string(lineno) +
                              " is not of the form key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "sequences") suite.sequences = parse_string_list(value, key);
        else if (key == "configs") suite.configs = parse_string_list(value, key);
        else if (key == "names") suite.names = parse_string_list(value, key);
        else if (key == "out") suite.out_prefix = value;
        else throw ConfigError("suite: unknown key \"" + key + "\"");
    }
    if (suite.sequences.empty())
        throw ConfigError("suite: no sequences listed");
    if (suite.configs.empty())
        suite.configs.push_back("default");
    if (suite.names.empty()) {
        for (const auto& c : suite.configs)
            suite.names.push_back(c == "default" ? "default" : fs::path(c).stem().string());
    }
    if (suite.names.size() != suite.configs.size())
        throw ConfigError("suite: names and configs must have equal length");
    return suite;
}

int run_bench(const std::string& suite_path) {
    const SuiteSpec suite = load_suite(suite_path);
    std::vector<TrackerConfig> cfgs;
    for (const auto& c : suite.configs)
        cfgs.push_back(c == "default" ? TrackerConfig{} : load_config(c));

    const std::size_t n_seq = suite.sequences.size();
    const std::size_t n_cfg = cfgs.size();
    ReportTable table;
    table.columns = suite.names;
    table.rows.resize(n_seq);

    // Sequences are independent tracker instances; run them concurrently.
    std::vector<std::future<ReportTable::Row>> futures;
    bool any_failed = false;
    for (std::size_t s = 0; s < n_seq; ++s) {
        futures.push_back(std::async(std::launch::async, [&, s]() {
            ReportTable::Row row;
            row.cells.resize(n_cfg);
            try {
                const SequenceDataset ds = load_otb_sequence(suite.sequences[s]);
                row.sequence = ds.name;
                for (std::size_t c = 0; c < n_cfg; ++c) {
                    try {
                        const TrackResult res = track_dataset(ds, cfgs[c]);
                        row.cells[c] = evaluate_run(res.boxes, ds.gt_boxes);
                    } catch (const std::exception& e) {
                        std::cerr << "bench: " << ds.name << " / " << suite.names[c]
                                  << " failed: " << e.what() << "\n";
                    }
                }
            } catch (const std::exception& e) {
                row.sequence = fs::path(suite.sequences[s]).filename().string();
                std::cerr << "bench: " << row.sequence << " failed: " << e.what() << "\n";
            }
            return row;
        }));
    }
    for (std::size_t s = 0; s < n_seq; ++s) {
        table.rows[s] = futures[s].get();
        for (const auto& cell : table.rows[s].cells)
            if (!cell)
                any_failed = true;
    }

    std::cout << render_report_table(table);
    for (std::size_t c = 0; c < n_cfg; ++c) {
        std::vector<std::pair<std::string, EvalReport>> rows;
        for (const auto& row : table.rows)
            if (row.cells[c])
                rows.push_back({row.sequence, *row.cells[c]});
        if (!rows.empty()) {
            const std::string path = suite.out_prefix + "_" + suite.names[c] + ".csv";
            write_report_csv(rows, path);
            std::cout << "report written to " << path << "\n";
        }
    }
    return any_failed ? 1 : 0;
}

int run_selfcheck_cmd() {
    const auto results = run_selfcheck();
    bool all_pass = true;
    for (const auto& r : results) {
        std::printf("%s %s (%.2fs)%s%s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.seconds,
                    r.detail.empty() ? "" : ": ", r.detail.c_str());
        all_pass = all_pass && r.pass;
    }
    return all_pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-feature correlation filter tracker"};
    app.require_subcommand(1);

    // track
    auto* track = app.add_subcommand("track", "track a sequence and write per-frame boxes");
    std::string seq_dir, config_path, out_csv, render_dir, trace_csv, features;
    track->add_option("--seq", seq_dir, "sequence directory (benchmark layout)")->required();
    track->add_option("--config", config_path, "config file");
    track->add_option("--out", out_csv, "output boxes CSV")->required();
    track->add_option("--render-dir", render_dir, "write annotated PNG frames here");
    track->add_option("--trace", trace_csv, "write solver convergence CSV here");
    track->add_option("--features", features, "comma list overriding features_enabled");

    // eval
    auto* eval = app.add_subcommand("eval", "score a results CSV against ground truth");
    std::string results_csv, eval_seq;
    eval->add_option("--results", results_csv, "boxes CSV from track")->required();
    eval->add_option("--seq", eval_seq, "sequence directory")->required();

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic sequence");
    std::string kind, synth_out;
    SynthSpec spec;
    synth->add_option("kind", kind, "translate|scale_ramp|illumination_ramp|deform")
        ->required();
    synth->add_option("--out", synth_out, "output directory")->required();
    synth->add_option("--frames", spec.frames, "frame count");
    synth->add_option("--seed", spec.seed, "texture/noise seed");
    synth->add_option("--frame-w", spec.frame_w, "frame width");
    synth->add_option("--frame-h", spec.frame_h, "frame height");
    synth->add_option("--target-w", spec.target_w, "target width");
    synth->add_option("--target-h", spec.target_h, "target height");
    synth->add_option("--amp-x", spec.amp_x, "translate amplitude x");
    synth->add_option("--amp-y", spec.amp_y, "translate amplitude y");
    synth->add_option("--period-x", spec.period_x, "translate period x");
    synth->add_option("--period-y", spec.period_y, "translate period y");
    synth->add_option("--rate", spec.rate, "scale_ramp per-frame growth");
    synth->add_option("--gain-start", spec.gain_start, "illumination start gain");
    synth->add_option("--gain-end", spec.gain_end, "illumination end gain");
    synth->add_option("--deform-amp", spec.deform_amp, "deform amplitude");
    synth->add_option("--deform-period", spec.deform_period, "deform period");
    synth->add_option("--noise-sigma", spec.noise_sigma, "additive pixel noise sigma");

    // bench
    auto* bench = app.add_subcommand("bench", "run a suite and render the comparison report");
    std::string suite_path;
    bench->add_option("--suite", suite_path, "suite file")->required();

    // selfcheck
    auto* selfcheck = app.add_subcommand("selfcheck", "run the embedded oracle suite");

    CLI11_PARSE(app, argc, argv);

    try {
        if (track->parsed())
            return run_track(seq_dir, config_path, out_csv, render_dir, trace_csv, features);
        if (eval->parsed())
            return run_eval(results_csv, eval_seq);
        if (synth->parsed())
            return run_synth(kind, spec, synth_out);
        if (bench->parsed())
            return run_bench(suite_path);
        if (selfcheck->parsed())
            return run_selfcheck_cmd();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
    return 0;
}
