// dcifp — synthetic DCI-trace fingerprinting pipeline, one subcommand per
// stage with file-based handoff. Every run emits a JSON manifest with the
// exact invocation and content digests of inputs/outputs; `--replay`
// re-runs a manifest and verifies outputs reproduce byte-identically.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "dcifp/attacks.hpp"
#include "dcifp/capture.hpp"
#include "dcifp/digest.hpp"
#include "dcifp/eval.hpp"
#include "dcifp/gradcheck.hpp"
#include "dcifp/manifest.hpp"
#include "dcifp/model_io.hpp"
#include "dcifp/synth.hpp"

namespace {

using namespace dcifp;

int run(const std::vector<std::string>& args);

std::string digest_of(const std::string& path) { return hex64(fnv1a64_file(path)); }

// Collects params/inputs/outputs during a subcommand and writes the
// manifest when the command finishes.
struct ManifestBuilder {
    RunManifest m;
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    std::vector<std::string> output_paths;
    std::string path_override;

    ManifestBuilder(std::string subcommand, const std::vector<std::string>& argv) {
        m.subcommand = std::move(subcommand);
        m.argv = argv;
    }
    void input(const std::string& p) { m.inputs[p] = digest_of(p); }
    void output(const std::string& p) {
        if (!p.empty()) output_paths.push_back(p);
    }
    void param(const std::string& k, const std::string& v) { m.params[k] = v; }
    void param(const std::string& k, const char* v) { m.params[k] = v; }
    void param(const std::string& k, bool v) { m.params[k] = v ? "true" : "false"; }
    template <typename T>
    void param(const std::string& k, T v) {
        std::ostringstream ss;
        ss << v;
        m.params[k] = ss.str();
    }
    std::string finish(int threads) {
        for (const auto& p : output_paths) m.outputs[p] = digest_of(p);
        m.threads = threads;
        m.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        m.created = utc_timestamp_now();
        std::string path = path_override;
        if (path.empty())
            path = output_paths.empty() ? "dcifp-" + m.subcommand + ".manifest.json"
                                        : output_paths.front() + ".manifest.json";
        write_manifest(m, path);
        return path;
    }
};

Trace load_trace(const std::string& path) {
    std::vector<std::string> warnings;
    Trace t = read_trace_file(path, &warnings);
    for (const auto& w : warnings) std::cerr << path << ": warning: " << w << "\n";
    return t;
}

std::vector<Trace> load_traces(const std::vector<std::string>& paths) {
    std::vector<Trace> out;
    out.reserve(paths.size());
    for (const auto& p : paths) out.push_back(load_trace(p));
    return out;
}

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(tok);
    return out;
}

// "20:160:20" (start:stop:step, inclusive) or "20,40,100"
std::vector<size_t> parse_windows(const std::string& s) {
    std::vector<size_t> out;
    if (s.find(':') != std::string::npos) {
        unsigned long start = 0, stop = 0, step = 0;
        char c1 = 0, c2 = 0;
        std::istringstream ss(s);
        if (!(ss >> start >> c1 >> stop >> c2 >> step) || c1 != ':' || c2 != ':' || step == 0 ||
            stop < start || !ss.eof())
            throw std::runtime_error("bad --windows range '" + s + "' (want start:stop:step)");
        for (unsigned long w = start; w <= stop; w += step) out.push_back(w);
    } else {
        for (const auto& tok : split_csv(s)) {
            size_t pos = 0;
            unsigned long w = std::stoul(tok, &pos);
            if (pos != tok.size() || w == 0)
                throw std::runtime_error("bad --windows entry '" + tok + "'");
            out.push_back(w);
        }
    }
    if (out.empty()) throw std::runtime_error("--windows resolved to an empty list");
    return out;
}

std::map<AppLabel, AppProfile> resolve_profiles(const std::string& profiles_file) {
    if (profiles_file.empty()) return builtin_profiles();
    return read_profiles_file(profiles_file);
}

const AppProfile& profile_or_throw(const std::map<AppLabel, AppProfile>& profiles,
                                   const std::string& name) {
    auto it = profiles.find(name);
    if (it != profiles.end()) return it->second;
    std::string known;
    for (const auto& [label, p] : profiles) known += (known.empty() ? "" : ", ") + label;
    throw std::runtime_error("unknown app '" + name + "' (known: " + known + ")");
}

ExecConfig make_exec(bool serial, int threads) {
    ExecConfig exec;
    exec.engine = serial ? Engine::Serial : Engine::OpenMP;
    exec.threads = threads;
    return exec;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for write: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failure: " + path);
}

// ---------------------------------------------------------------- gen --
struct GenOpts {
    std::string app, profiles_file, out, rnti = "4ABC", rnti_base = "1000", apps_csv;
    std::string inject_spec, inject_rnti;
    double duration = 0, inject_t0_ms = 5000, inject_capture_est = 0;
    uint64_t seed = 1, inject_seed = 0;
    bool cell = false, have_inject_seed = false;
    size_t ues = 8;
    std::string manifest;
};

int do_gen(const GenOpts& o, const std::vector<std::string>& argv) {
    ManifestBuilder mb("gen", argv);
    mb.path_override = o.manifest;
    auto profiles = resolve_profiles(o.profiles_file);
    if (!o.profiles_file.empty()) mb.input(o.profiles_file);

    Trace trace;
    if (o.cell) {
        if (o.ues == 0) throw std::runtime_error("gen: --ues must be positive");
        std::vector<std::string> apps;
        if (!o.apps_csv.empty()) {
            apps = split_csv(o.apps_csv);
        } else {
            std::vector<AppLabel> labels;
            for (const auto& [label, profile] : profiles) labels.push_back(label);
            apps = display_label_order(labels);
        }
        uint16_t base = parse_rnti_hex(o.rnti_base);
        if (static_cast<size_t>(base) + o.ues - 1 > 0xFFFF)
            throw std::runtime_error("gen: rnti range overflows 16 bits");
        std::map<uint16_t, AppProfile> assignment;
        for (size_t i = 0; i < o.ues; ++i)
            assignment[static_cast<uint16_t>(base + i)] =
                profile_or_throw(profiles, apps[i % apps.size()]);
        trace = generate_cell(assignment, o.duration, o.seed);
        mb.param("mode", "cell");
        mb.param("ues", o.ues);
        std::string apps_str;
        for (const auto& a : apps) apps_str += (apps_str.empty() ? "" : ",") + a;
        mb.param("apps", apps_str);
        mb.param("rnti_base", o.rnti_base);
    } else {
        if (o.app.empty()) throw std::runtime_error("gen: need --app NAME or --cell");
        trace = generate(profile_or_throw(profiles, o.app), o.duration, parse_rnti_hex(o.rnti),
                         o.seed);
        mb.param("mode", "app");
        mb.param("app", o.app);
        mb.param("rnti", o.rnti);
    }
    mb.param("duration_s", o.duration);
    mb.param("seed", o.seed);
    mb.param("profiles_file", o.profiles_file.empty() ? "<builtin>" : o.profiles_file);

    if (!o.inject_spec.empty()) {
        SignatureSpec spec = read_signature_file(o.inject_spec);
        mb.input(o.inject_spec);
        if (o.inject_rnti.empty())
            throw std::runtime_error("gen: --inject-spec requires --inject-rnti");
        uint64_t iseed = o.have_inject_seed ? o.inject_seed : o.seed;
        std::optional<double> est;
        if (o.inject_capture_est > 0) est = o.inject_capture_est;
        trace = inject_signature(trace, parse_rnti_hex(o.inject_rnti), spec, o.inject_t0_ms,
                                 iseed, est);
        mb.param("inject_spec", o.inject_spec);
        mb.param("inject_rnti", o.inject_rnti);
        mb.param("inject_t0_ms", o.inject_t0_ms);
        mb.param("inject_seed", iseed);
        mb.param("inject_capture_est",
                 o.inject_capture_est > 0 ? std::to_string(o.inject_capture_est) : "none");
    }

    write_trace_file(o.out, trace);
    mb.param("out", o.out);
    mb.output(o.out);
    std::string mpath = mb.finish(resolve_threads({}));
    std::cout << "wrote " << trace.records.size() << " records to " << o.out << "\nmanifest: "
              << mpath << "\n";
    return 0;
}

// ------------------------------------------------------------ capture --
struct CaptureOpts {
    std::string in, out, manifest;
    double ratio = 0.05;
    uint64_t seed = 1;
    uint32_t jitter_ms = 0;
    bool gilbert = false;
    double gilbert_bad_ms = 2000;
};

int do_capture(const CaptureOpts& o, const std::vector<std::string>& argv) {
    ManifestBuilder mb("capture", argv);
    mb.path_override = o.manifest;
    Trace generated = load_trace(o.in);
    mb.input(o.in);
    CaptureConfig cfg;
    cfg.capture_prob = o.ratio;
    cfg.seed = o.seed;
    cfg.jitter_ms = o.jitter_ms;
    cfg.gilbert = o.gilbert;
    cfg.gilbert_mean_bad_ms = o.gilbert_bad_ms;
    Trace captured = apply_capture(generated, cfg);
    write_trace_file(o.out, captured);
    mb.param("in", o.in);
    mb.param("out", o.out);
    mb.param("ratio", o.ratio);
    mb.param("seed", o.seed);
    mb.param("jitter_ms", o.jitter_ms);
    mb.param("gilbert", o.gilbert);
    mb.param("gilbert_bad_ms", o.gilbert_bad_ms);
    mb.output(o.out);
    std::string mpath = mb.finish(1);
    std::cout << "kept " << captured.records.size() << " of " << generated.records.size()
              << " records";
    if (!generated.records.empty())
        std::cout << " (ratio " << estimate_capture_ratio(generated, captured) << ")";
    std::cout << "\nmanifest: " << mpath << "\n";
    return 0;
}

// ------------------------------------------------------------ dataset --
struct DatasetOpts {
    std::vector<std::string> in;
    std::string out, manifest;
    size_t window = 0, stride = 0, max_per_class = 0;
    uint32_t burst_gap_ms = kDefaultBurstGapMs;
};

int do_dataset(const DatasetOpts& o, const std::vector<std::string>& argv) {
    ManifestBuilder mb("dataset", argv);
    mb.path_override = o.manifest;
    auto traces = load_traces(o.in);
    for (const auto& p : o.in) mb.input(p);
    Dataset ds;
    ds.W = o.window;
    ds.stride = o.stride == 0 ? o.window : o.stride;
    ds.burst_gap_ms = o.burst_gap_ms;
    ds.samples = windows_per_class(traces, o.window, ds.stride, o.max_per_class, o.burst_gap_ms);
    if (ds.samples.empty()) throw std::runtime_error("dataset: no windows produced");
    write_dataset_file(o.out, ds);
    std::map<AppLabel, size_t> hist;
    for (const auto& s : ds.samples) ++hist[*s.label];
    mb.param("window", o.window);
    mb.param("stride", ds.stride);
    mb.param("burst_gap_ms", o.burst_gap_ms);
    mb.param("max_per_class", o.max_per_class);
    mb.param("out", o.out);
    mb.output(o.out);
    std::string mpath = mb.finish(1);
    std::cout << ds.samples.size() << " windows (W=" << o.window << ")";
    for (const auto& [label, n] : hist) std::cout << "  " << label << "=" << n;
    std::cout << "\nmanifest: " << mpath << "\n";
    return 0;
}

// -------------------------------------------------------------- train --
struct TrainOpts {
    std::string dataset, out, optimizer = "adam", manifest;
    size_t epochs = 30, batch = 64, patience = 0;
    double lr = 1e-3, val_fraction = 0.1;
    uint64_t seed = 1;
    int threads = 0;
    bool serial = false;
};

int do_train(const TrainOpts& o, const std::vector<std::string>& argv) {
    ManifestBuilder mb("train", argv);
    mb.path_override = o.manifest;
    Dataset ds = read_dataset_file(o.dataset);
    mb.input(o.dataset);
    TrainConfig cfg;
    cfg.epochs = o.epochs;
    cfg.batch_size = o.batch;
    cfg.learning_rate = o.lr;
    cfg.optimizer = o.optimizer;
    cfg.seed = o.seed;
    cfg.val_fraction = o.val_fraction;
    cfg.patience = o.patience;
    cfg.exec = make_exec(o.serial, o.threads);
    ModelBundle bundle = train(ds.samples, cfg, std::nullopt, ds.burst_gap_ms);
    save_model(bundle, o.out);
    mb.param("dataset", o.dataset);
    mb.param("out", o.out);
    mb.param("epochs", o.epochs);
    mb.param("batch", o.batch);
    mb.param("lr", o.lr);
    mb.param("optimizer", o.optimizer);
    mb.param("seed", o.seed);
    mb.param("val_fraction", o.val_fraction);
    mb.param("patience", o.patience);
    mb.param("engine", o.serial ? "serial" : "openmp");
    mb.output(o.out);
    std::string mpath = mb.finish(resolve_threads(cfg.exec));
    std::cout << "trained W=" << bundle.net.spec().W << " on " << ds.samples.size()
              << " windows, " << bundle.train_loss.size() << " epochs";
    if (!bundle.val_accuracy.empty())
        std::cout << ", val accuracy " << bundle.final_val_accuracy()
                  << (bundle.restored_epoch > 0
                          ? " (epoch " + std::to_string(bundle.restored_epoch) + ")"
                          : "");
    std::cout << "\nmodel: " << o.out << "\nmanifest: " << mpath << "\n";
    return 0;
}

// --------------------------------------------------------------- eval --
struct EvalOpts {
    std::string model, dataset, report, kv, manifest;
    int threads = 0;
    bool serial = false;
};

int do_eval(const EvalOpts& o, const std::vector<std::string>& argv) {
    ManifestBuilder mb("eval", argv);
    mb.path_override = o.manifest;
    ModelBundle bundle = load_model(o.model);
    Dataset ds = read_dataset_file(o.dataset);
    mb.input(o.model);
    mb.input(o.dataset);
    if (ds.W != bundle.net.spec().W)
        throw std::runtime_error("eval: dataset W=" + std::to_string(ds.W) +
                                 " does not match model W=" +
                                 std::to_string(bundle.net.spec().W));
    for (const auto& s : ds.samples)
        if (!s.label) throw std::runtime_error("eval: dataset contains unlabeled windows");
    ExecConfig exec = make_exec(o.serial, o.threads);
    auto preds = predict_batch(bundle, ds.samples, exec);
    std::vector<AppLabel> truth, predicted;
    truth.reserve(ds.samples.size());
    predicted.reserve(ds.samples.size());
    for (size_t i = 0; i < ds.samples.size(); ++i) {
        truth.push_back(*ds.samples[i].label);
        predicted.push_back(bundle.class_order[preds[i].class_index]);
    }
    EvalReport report = compute_metrics(truth, predicted, bundle.class_order);
    report.W = ds.W;
    write_text_file(o.report, format_report(report));
    mb.output(o.report);
    if (!o.kv.empty()) {
        write_text_file(o.kv, report_key_values(report));
        mb.output(o.kv);
    }
    mb.param("model", o.model);
    mb.param("dataset", o.dataset);
    mb.param("report", o.report);
    mb.param("kv", o.kv.empty() ? "<none>" : o.kv);
    mb.param("engine", o.serial ? "serial" : "openmp");
    std::string mpath = mb.finish(resolve_threads(exec));
    std::cout << "accuracy " << report.accuracy << " on " << report.total << " windows (W="
              << ds.W << ")\nreport: " << o.report << "\nmanifest: " << mpath << "\n";
    return 0;
}

// -------------------------------------------------------------- sweep --
struct SweepOpts {
    std::vector<std::string> train_in, test_in;
    std::string windows = "20:160:20", out, reports_dir, optimizer = "adam", manifest;
    size_t samples_per_class = 1000, budget_ref = 100, eval_per_class = 250;
    size_t epochs = 30, batch = 64, patience = 0;
    double lr = 1e-3, val_fraction = 0.1;
    uint64_t seed = 1;
    uint32_t burst_gap_ms = kDefaultBurstGapMs;
    int threads = 0;
    bool serial = false;
};

int do_sweep(const SweepOpts& o, const std::vector<std::string>& argv) {
    ManifestBuilder mb("sweep", argv);
    mb.path_override = o.manifest;
    auto train_traces = load_traces(o.train_in);
    auto test_traces = load_traces(o.test_in);
    for (const auto& p : o.train_in) mb.input(p);
    for (const auto& p : o.test_in) mb.input(p);

    SweepConfig cfg;
    cfg.windows = parse_windows(o.windows);
    cfg.samples_per_class = o.samples_per_class;
    cfg.budget_ref_W = o.budget_ref;
    cfg.eval_per_class = o.eval_per_class;
    cfg.burst_gap_ms = o.burst_gap_ms;
    cfg.train.epochs = o.epochs;
    cfg.train.batch_size = o.batch;
    cfg.train.learning_rate = o.lr;
    cfg.train.optimizer = o.optimizer;
    cfg.train.seed = o.seed;
    cfg.train.val_fraction = o.val_fraction;
    cfg.train.patience = o.patience;
    cfg.train.exec = make_exec(o.serial, o.threads);

    auto entries = window_sweep(train_traces, test_traces, cfg);
    std::string table = format_sweep_table(entries);
    write_text_file(o.out, table);
    mb.output(o.out);
    if (!o.reports_dir.empty()) {
        std::filesystem::create_directories(o.reports_dir);
        for (const auto& e : entries) {
            std::string path = o.reports_dir + "/report_W" + std::to_string(e.W) + ".txt";
            write_text_file(path, format_report(e.report));
            mb.output(path);
        }
    }
    mb.param("windows", o.windows);
    mb.param("samples_per_class", o.samples_per_class);
    mb.param("budget_ref", o.budget_ref);
    mb.param("eval_per_class", o.eval_per_class);
    mb.param("epochs", o.epochs);
    mb.param("batch", o.batch);
    mb.param("lr", o.lr);
    mb.param("optimizer", o.optimizer);
    mb.param("seed", o.seed);
    mb.param("out", o.out);
    mb.param("engine", o.serial ? "serial" : "openmp");
    std::string mpath = mb.finish(resolve_threads(cfg.train.exec));
    std::cout << table << "manifest: " << mpath << "\n";
    return 0;
}

// ------------------------------------------------------------ latency --
struct LatencyOpts {
    std::vector<std::string> in;
    std::string out, csv, manifest;
    size_t window = 40, trials = 100;
};

int do_latency(const LatencyOpts& o, const std::vector<std::string>& argv) {
    ManifestBuilder mb("latency", argv);
    mb.path_override = o.manifest;
    auto traces = load_traces(o.in);
    for (const auto& p : o.in) mb.input(p);
    auto rows = classification_latency(traces, o.window, o.trials);
    std::string table = format_latency_table(rows);
    write_text_file(o.out, table);
    mb.output(o.out);
    if (!o.csv.empty()) {
        write_text_file(o.csv, format_latency_csv(rows));
        mb.output(o.csv);
    }
    mb.param("window", o.window);
    mb.param("trials", o.trials);
    mb.param("out", o.out);
    mb.param("csv", o.csv.empty() ? "<none>" : o.csv);
    std::string mpath = mb.finish(1);
    std::cout << table << "manifest: " << mpath << "\n";
    return 0;
}

// --------------------------------------------------------------- scan --
struct ScanOpts {
    std::string model, trace, out, csv, activity_csv, rnti, manifest;
    size_t window = 0;
    double min_confidence = 0.5;
    int threads = 0;
    bool serial = false;
};

int do_scan(const ScanOpts& o, const std::vector<std::string>& argv) {
    ManifestBuilder mb("scan", argv);
    mb.path_override = o.manifest;
    ModelBundle bundle = load_model(o.model);
    Trace captured = load_trace(o.trace);
    mb.input(o.model);
    mb.input(o.trace);
    if (o.window != 0 && o.window != bundle.net.spec().W)
        throw std::runtime_error("scan: --window " + std::to_string(o.window) +
                                 " does not match model W=" +
                                 std::to_string(bundle.net.spec().W));
    ExecConfig exec = make_exec(o.serial, o.threads);
    ScanReport report = o.rnti.empty()
                            ? cell_scan(captured, bundle, o.min_confidence, exec)
                            : track_target(captured, parse_rnti_hex(o.rnti), bundle,
                                           o.min_confidence, exec);
    std::string text = format_scan_report(report);
    write_text_file(o.out, text);
    mb.output(o.out);
    if (!o.csv.empty()) {
        write_text_file(o.csv, format_scan_csv(report));
        mb.output(o.csv);
    }
    if (!o.activity_csv.empty()) {
        write_text_file(o.activity_csv, format_activity_csv(report));
        mb.output(o.activity_csv);
    }
    mb.param("model", o.model);
    mb.param("trace", o.trace);
    mb.param("window", bundle.net.spec().W);
    mb.param("min_confidence", o.min_confidence);
    mb.param("rnti", o.rnti.empty() ? "<all>" : o.rnti);
    mb.param("engine", o.serial ? "serial" : "openmp");
    std::string mpath = mb.finish(resolve_threads(exec));
    std::cout << text << "report: " << o.out << "\nmanifest: " << mpath << "\n";
    return 0;
}

// --------------------------------------------------------------- hunt --
struct HuntOpts {
    std::string spec, trace, out, manifest;
    double t0_ms = 0;
};

int do_hunt(const HuntOpts& o, const std::vector<std::string>& argv) {
    ManifestBuilder mb("hunt", argv);
    mb.path_override = o.manifest;
    SignatureSpec spec;  // paper-default pattern when no file given
    if (!o.spec.empty()) {
        spec = read_signature_file(o.spec);
        mb.input(o.spec);
    }
    Trace captured = load_trace(o.trace);
    mb.input(o.trace);
    HuntResult result = detect_target(captured, spec, o.t0_ms);
    std::string text = format_hunt_result(result, spec);
    if (!o.out.empty()) {
        write_text_file(o.out, text);
        mb.output(o.out);
    }
    mb.param("spec", o.spec.empty() ? "<default>" : o.spec);
    mb.param("trace", o.trace);
    mb.param("t0_ms", o.t0_ms);
    mb.param("out", o.out.empty() ? "<stdout>" : o.out);
    std::string mpath = mb.finish(1);
    std::cout << text << "manifest: " << mpath << "\n";
    return 0;
}

// ---------------------------------------------------------- gradcheck --
struct GradcheckOpts {
    std::string out, manifest;
    size_t window = 20, classes = 8, features = 3, batch = 2;
    double h = 1e-4, tolerance = 1e-4;
    uint64_t seed = 42;
    int threads = 0;
    bool serial = false;
};

int do_gradcheck(const GradcheckOpts& o, const std::vector<std::string>& argv) {
    ManifestBuilder mb("gradcheck", argv);
    mb.path_override = o.manifest;
    GradCheckOptions opt;
    opt.batch = o.batch;
    opt.h = o.h;
    opt.tolerance = o.tolerance;
    opt.exec = make_exec(o.serial, o.threads);
    ModelSpec spec = build_model(o.window, o.features, o.classes);
    GradCheckReport rep = numeric_grad_check(spec, o.seed, opt);
    std::string text = format_report(rep);
    if (!o.out.empty()) {
        write_text_file(o.out, text);
        mb.output(o.out);
    }
    mb.param("window", o.window);
    mb.param("classes", o.classes);
    mb.param("features", o.features);
    mb.param("batch", o.batch);
    mb.param("h", o.h);
    mb.param("tolerance", o.tolerance);
    mb.param("seed", o.seed);
    mb.param("engine", o.serial ? "serial" : "openmp");
    std::string mpath = mb.finish(resolve_threads(opt.exec));
    std::cout << text << "manifest: " << mpath << "\n";
    return rep.pass ? 0 : 1;
}

// ------------------------------------------------------------- replay --
int do_replay(const std::string& manifest_path) {
    RunManifest m = read_manifest(manifest_path);
    for (const auto& [path, digest] : m.inputs)
        if (digest_of(path) != digest)
            throw std::runtime_error("replay: input " + path +
                                     " changed since the manifest was written");
    std::cout << "replaying: dcifp";
    for (const auto& a : m.argv) std::cout << " " << a;
    std::cout << "\n";
    int rc = run(m.argv);
    if (rc != 0) {
        std::cerr << "replay: re-run failed with exit code " << rc << "\n";
        return rc;
    }
    bool ok = true;
    for (const auto& [path, digest] : m.outputs) {
        std::string now = digest_of(path);
        bool same = now == digest;
        ok = ok && same;
        std::cout << "  " << path << ": " << (same ? "byte-identical" : "MISMATCH") << "\n";
    }
    std::cout << (ok ? "replay OK: all outputs byte-identical\n"
                     : "replay FAILED: outputs differ\n");
    return ok ? 0 : 1;
}

int run(const std::vector<std::string>& args) {
    CLI::App app{"synthetic DCI-trace capture, fingerprinting, and RNTI-attack pipeline"};
    app.require_subcommand(0, 1);
    std::string replay_path;
    app.add_option("--replay", replay_path,
                   "re-run a manifest and verify outputs are byte-identical");

    GenOpts g;
    CLI::App* gen = app.add_subcommand("gen", "synthesize DCI traces (one UE or a whole cell)");
    gen->add_option("--app", g.app, "profile name for single-UE mode");
    gen->add_flag("--cell", g.cell, "generate a multi-UE cell trace");
    gen->add_option("--ues", g.ues, "number of UEs in cell mode")->capture_default_str();
    gen->add_option("--apps", g.apps_csv, "comma-separated profile cycle for cell mode");
    gen->add_option("--rnti", g.rnti, "RNTI (hex) in single-UE mode")->capture_default_str();
    gen->add_option("--rnti-base", g.rnti_base, "first RNTI (hex) in cell mode")
        ->capture_default_str();
    gen->add_option("--profiles", g.profiles_file, "profile config file (default: builtin)");
    gen->add_option("--duration", g.duration, "trace duration, seconds")->required();
    gen->add_option("--seed", g.seed, "master seed")->capture_default_str();
    gen->add_option("--inject-spec", g.inject_spec, "signature config to inject");
    gen->add_option("--inject-rnti", g.inject_rnti, "target RNTI (hex) for injection");
    gen->add_option("--inject-t0-ms", g.inject_t0_ms, "first burst time, ms")
        ->capture_default_str();
    auto* iseed = gen->add_option("--inject-seed", g.inject_seed,
                                  "injection seed (default: --seed)");
    gen->add_option("--inject-capture-est", g.inject_capture_est,
                    "attacker's capture-ratio estimate for burst oversizing (0 = off)");
    gen->add_option("--out", g.out, "output trace path")->required();
    gen->add_option("--manifest", g.manifest, "manifest path override");

    CaptureOpts c;
    CLI::App* cap = app.add_subcommand("capture", "thin a trace through the lossy sniffer model");
    cap->add_option("--in", c.in, "generated trace")->required();
    cap->add_option("--out", c.out, "captured trace")->required();
    cap->add_option("--ratio", c.ratio, "capture probability (0,1]")->required();
    cap->add_option("--seed", c.seed, "seed")->capture_default_str();
    cap->add_option("--jitter-ms", c.jitter_ms, "max |timestamp jitter|")->capture_default_str();
    cap->add_flag("--gilbert", c.gilbert, "correlated-outage loss model");
    cap->add_option("--gilbert-bad-ms", c.gilbert_bad_ms, "mean outage length, ms")
        ->capture_default_str();
    cap->add_option("--manifest", c.manifest, "manifest path override");

    DatasetOpts d;
    CLI::App* ds = app.add_subcommand("dataset", "window labeled traces into a training set");
    ds->add_option("--in", d.in, "labeled captured trace (repeatable)")->required();
    ds->add_option("--window", d.window, "window size W")->required();
    ds->add_option("--stride", d.stride, "window stride (default: W)");
    ds->add_option("--burst-gap-ms", d.burst_gap_ms, "burst boundary threshold")
        ->capture_default_str();
    ds->add_option("--max-per-class", d.max_per_class, "cap windows per class (0 = all)");
    ds->add_option("--out", d.out, "output dataset path")->required();
    ds->add_option("--manifest", d.manifest, "manifest path override");

    TrainOpts t;
    CLI::App* tr = app.add_subcommand("train", "train the window classifier");
    tr->add_option("--dataset", t.dataset, "training dataset")->required();
    tr->add_option("--out", t.out, "output model path")->required();
    tr->add_option("--epochs", t.epochs)->capture_default_str();
    tr->add_option("--batch", t.batch)->capture_default_str();
    tr->add_option("--lr", t.lr, "learning rate")->capture_default_str();
    tr->add_option("--optimizer", t.optimizer, "adam or sgd")->capture_default_str();
    tr->add_option("--seed", t.seed)->capture_default_str();
    tr->add_option("--val-fraction", t.val_fraction, "validation split")->capture_default_str();
    tr->add_option("--patience", t.patience, "early-stop patience (0 = off)")
        ->capture_default_str();
    tr->add_option("--threads", t.threads, "worker threads (0 = runtime default)");
    tr->add_flag("--serial", t.serial, "reference serial engine");
    tr->add_option("--manifest", t.manifest, "manifest path override");

    EvalOpts e;
    CLI::App* ev = app.add_subcommand("eval", "evaluate a model on a labeled dataset");
    ev->add_option("--model", e.model)->required();
    ev->add_option("--dataset", e.dataset)->required();
    ev->add_option("--report", e.report, "aligned-table report path")->required();
    ev->add_option("--kv", e.kv, "machine-readable key=value report path");
    ev->add_option("--threads", e.threads);
    ev->add_flag("--serial", e.serial);
    ev->add_option("--manifest", e.manifest, "manifest path override");

    SweepOpts s;
    CLI::App* sw = app.add_subcommand("sweep", "train/evaluate across window sizes");
    sw->add_option("--train-in", s.train_in, "labeled training trace (repeatable)")->required();
    sw->add_option("--test-in", s.test_in, "labeled held-out trace (repeatable)")->required();
    sw->add_option("--windows", s.windows, "start:stop:step or comma list")
        ->capture_default_str();
    sw->add_option("--samples-per-class", s.samples_per_class)->capture_default_str();
    sw->add_option("--budget-ref", s.budget_ref,
                   "W above which per-class samples shrink proportionally")
        ->capture_default_str();
    sw->add_option("--eval-per-class", s.eval_per_class)->capture_default_str();
    sw->add_option("--epochs", s.epochs)->capture_default_str();
    sw->add_option("--batch", s.batch)->capture_default_str();
    sw->add_option("--lr", s.lr)->capture_default_str();
    sw->add_option("--optimizer", s.optimizer)->capture_default_str();
    sw->add_option("--seed", s.seed)->capture_default_str();
    sw->add_option("--val-fraction", s.val_fraction)->capture_default_str();
    sw->add_option("--patience", s.patience)->capture_default_str();
    sw->add_option("--burst-gap-ms", s.burst_gap_ms)->capture_default_str();
    sw->add_option("--threads", s.threads);
    sw->add_flag("--serial", s.serial);
    sw->add_option("--out", s.out, "summary table path")->required();
    sw->add_option("--reports-dir", s.reports_dir, "write one full report per W here");
    sw->add_option("--manifest", s.manifest, "manifest path override");

    LatencyOpts l;
    CLI::App* la = app.add_subcommand("latency", "time-to-classification per app");
    la->add_option("--in", l.in, "labeled captured trace (repeatable)")->required();
    la->add_option("--window", l.window)->capture_default_str();
    la->add_option("--trials", l.trials, "max measurements per app")->capture_default_str();
    la->add_option("--out", l.out, "table path")->required();
    la->add_option("--csv", l.csv, "plot-ready CSV path");
    la->add_option("--manifest", l.manifest, "manifest path override");

    ScanOpts sc;
    CLI::App* scan = app.add_subcommand("scan", "fingerprint every RNTI in a captured trace");
    scan->add_option("--model", sc.model)->required();
    scan->add_option("--trace", sc.trace)->required();
    scan->add_option("--window", sc.window, "must match the model's W (0 = use model's)");
    scan->add_option("--min-confidence", sc.min_confidence)->capture_default_str();
    scan->add_option("--rnti", sc.rnti, "track a single RNTI (hex) instead of the whole cell");
    scan->add_option("--out", sc.out, "report path")->required();
    scan->add_option("--csv", sc.csv, "timeline CSV path");
    scan->add_option("--activity-csv", sc.activity_csv, "active-RNTIs-per-second CSV path");
    scan->add_option("--threads", sc.threads);
    scan->add_flag("--serial", sc.serial);
    scan->add_option("--manifest", sc.manifest, "manifest path override");

    HuntOpts h;
    CLI::App* hunt = app.add_subcommand("hunt", "detect a planted traffic signature");
    hunt->add_option("--spec", h.spec, "signature config (default: builtin pattern)");
    hunt->add_option("--trace", h.trace, "captured trace")->required();
    hunt->add_option("--t0-ms", h.t0_ms, "first burst time, ms")->required();
    hunt->add_option("--out", h.out, "result path (also printed)");
    hunt->add_option("--manifest", h.manifest, "manifest path override");

    GradcheckOpts gc;
    CLI::App* gck = app.add_subcommand("gradcheck", "finite-difference gradient verification");
    gck->add_option("--window", gc.window)->capture_default_str();
    gck->add_option("--classes", gc.classes)->capture_default_str();
    gck->add_option("--features", gc.features)->capture_default_str();
    gck->add_option("--batch", gc.batch)->capture_default_str();
    gck->add_option("--step", gc.h, "finite-difference step")->capture_default_str();
    gck->add_option("--tolerance", gc.tolerance)->capture_default_str();
    gck->add_option("--seed", gc.seed)->capture_default_str();
    gck->add_option("--threads", gc.threads);
    gck->add_flag("--serial", gc.serial);
    gck->add_option("--out", gc.out, "report path (also printed)");
    gck->add_option("--manifest", gc.manifest, "manifest path override");

    std::vector<const char*> cargv;
    cargv.push_back("dcifp");
    for (const auto& a : args) cargv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(cargv.size()), cargv.data());
    } catch (const CLI::CallForHelp& ex) {
        return app.exit(ex);
    } catch (const CLI::CallForVersion& ex) {
        return app.exit(ex);
    } catch (const CLI::ParseError& ex) {
        app.exit(ex);
        return 2;
    }

    g.have_inject_seed = iseed->count() > 0;

    try {
        if (!replay_path.empty()) return do_replay(replay_path);
        if (gen->parsed()) return do_gen(g, args);
        if (cap->parsed()) return do_capture(c, args);
        if (ds->parsed()) return do_dataset(d, args);
        if (tr->parsed()) return do_train(t, args);
        if (ev->parsed()) return do_eval(e, args);
        if (sw->parsed()) return do_sweep(s, args);
        if (la->parsed()) return do_latency(l, args);
        if (scan->parsed()) return do_scan(sc, args);
        if (hunt->parsed()) return do_hunt(h, args);
        if (gck->parsed()) return do_gradcheck(gc, args);
        std::cout << app.help();
        return 0;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args);
}
