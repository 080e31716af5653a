#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lite/baseline.hpp"
#include "lite/errors.hpp"
#include "lite/eval.hpp"
#include "lite/ingest.hpp"
#include "lite/mlp.hpp"
#include "lite/signature.hpp"
#include "lite/simulate.hpp"
#include "lite/types.hpp"

using namespace lite;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open " + path);
    return in;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    return out;
}

template <typename F>
void check_usage(F&& validate) {
    try {
        validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
}

LabeledTrace load_trace(const std::string& path) {
    auto in = open_in(path);
    return ingest::read_collection_csv(in);
}

std::vector<GestureLabel> to_labels(const std::vector<int>& idx) {
    std::vector<GestureLabel> out;
    out.reserve(idx.size());
    for (int i : idx) out.push_back(label_from_index(std::size_t(i)));
    return out;
}

// ---- simulate

struct SimulateArgs {
    std::string script;
    std::string profiles;
    std::string out;
    sim::SimConfig cfg;
};

int cmd_simulate(const SimulateArgs& a) {
    check_usage([&] { a.cfg.validate(); });
    auto script_in = open_in(a.script);
    std::vector<sim::GestureProfile> profiles = sim::default_profiles();
    if (!a.profiles.empty()) {
        auto in = open_in(a.profiles);
        profiles = sim::profiles_from_table(read_signature_csv(in, {1, 2, 3, 4, 5}));
    }
    const auto trace = sim::synth_trace(sim::read_script(script_in), profiles, a.cfg);
    auto out = open_out(a.out);
    ingest::write_collection_csv(trace, out);

    std::map<GestureLabel, std::size_t> counts;
    for (auto l : trace.labels) ++counts[l];
    const double duration = trace.empty() ? 0.0 : trace.frames.back().t_rel + trace.sample_interval;
    char secs[32];
    std::snprintf(secs, sizeof secs, "%.2f", duration);
    std::cout << "frames " << trace.size() << ", duration " << secs << " s";
    for (auto l : kAllLabels) std::cout << ", " << to_string(l) << ' ' << counts[l];
    std::cout << '\n';
    return 0;
}

// ---- train-signatures

struct TrainSignaturesArgs {
    std::vector<std::string> traces;
    std::string out;
    std::vector<int> sensors = default_active_sensors();
};

int cmd_train_signatures(const TrainSignaturesArgs& a) {
    SignatureOptions opts;
    opts.active = a.sensors;
    check_usage([&] { SignatureTable probe(opts.active); });
    std::vector<LabeledTrace> traces;
    for (const auto& p : a.traces) traces.push_back(load_trace(p));
    const auto table = generate_signatures(traces, opts);
    auto out = open_out(a.out);
    write_signature_csv(table, out);

    std::printf("%-8s", "gesture");
    for (int s : table.active_sensors()) std::printf("%10s", ("sensor" + std::to_string(s)).c_str());
    std::printf("\n");
    for (auto g : table.gestures()) {
        std::printf("%-8s", std::string(to_string(g)).c_str());
        for (int s : table.active_sensors()) std::printf("%10.2f", table.at(g, s));
        std::printf("\n");
    }
    return 0;
}

// ---- classify

struct ClassifyArgs {
    std::string trace;
    std::string table;
    std::string out;
    std::vector<int> sensors = default_active_sensors();
    bool serial = false;
    double interval = kDefaultSampleInterval;
    BaselineConfig baseline;
    ClassifierConfig classifier;
};

int cmd_classify(const ClassifyArgs& a) {
    check_usage([&] {
        a.baseline.validate();
        a.classifier.validate();
        if (!(a.interval > 0.0)) throw std::invalid_argument("interval must be positive");
        SignatureTable probe(a.sensors);
    });
    auto table_in = open_in(a.table);
    const auto table = read_signature_csv(table_in, a.sensors);
    auto trace_in = open_in(a.trace);
    const auto trace =
        a.serial ? ingest::read_frames_from_line_stream(trace_in, a.interval) : ingest::read_collection_csv(trace_in);
    const auto labels = classify_trace(trace, table, a.baseline, a.classifier);

    auto out = open_out(a.out);
    out << "t_rel,label\n";
    for (std::size_t i = 0; i < labels.size(); ++i)
        out << ingest::format_real(trace.frames[i].t_rel) << ',' << to_string(labels[i]) << '\n';
    out.flush();
    if (!out) throw Error("failed writing " + a.out);

    if (!a.serial) std::cout << eval::render_report(eval::confusion(trace.labels, labels));
    return 0;
}

// ---- nn

struct NnArgs {
    std::string trace;
    std::string x;
    std::string y;
    std::string model;
    std::string metrics;
    std::string out;
    std::size_t split = 880;
    nn::MlpConfig cfg;
};

nn::Dataset load_dataset(const NnArgs& a, bool labels_required) {
    if (!a.trace.empty()) {
        if (!a.x.empty() || !a.y.empty()) throw UsageError("use either --trace or --x/--y");
        return nn::dataset_from_trace(load_trace(a.trace));
    }
    if (a.x.empty()) throw UsageError("need --trace or --x");
    if (labels_required && a.y.empty()) throw UsageError("--x needs --y");
    nn::Dataset d;
    auto xin = open_in(a.x);
    d.x = nn::read_matrix_csv(xin);
    if (!a.y.empty()) {
        auto yin = open_in(a.y);
        d.labels = nn::read_labels_csv(yin);
        if (d.labels.size() != std::size_t(d.x.rows()))
            throw Error("--x has " + std::to_string(d.x.rows()) + " rows but --y has " +
                        std::to_string(d.labels.size()) + " labels");
    }
    return d;
}

int cmd_nn_train(const NnArgs& a) {
    check_usage([&] { a.cfg.validate(); });
    const auto data = load_dataset(a, true);
    if (a.split > data.size())
        throw Error("split " + std::to_string(a.split) + " exceeds " + std::to_string(data.size()) + " rows");
    const auto [train_set, test_set] = nn::split_dataset(data, a.split);
    const auto [model, report] = nn::train(train_set, a.cfg, test_set);

    auto out = open_out(a.model);
    nn::save_model(model, out);
    out.flush();
    if (!out) throw Error("failed writing " + a.model);
    if (!a.metrics.empty()) {
        auto m = open_out(a.metrics);
        nn::write_metrics_csv(report, m);
    }

    std::cout << "train rows " << train_set.size() << ", held-out rows " << test_set.size() << ", epochs "
              << report.epochs.size() << '\n';
    if (!report.epochs.empty()) {
        const auto& last = report.epochs.back();
        std::cout << "final train loss " << ingest::format_real(last.train_loss) << ", accuracy "
                  << eval::format_percent(last.train_accuracy) << '\n';
    }
    if (test_set.size() > 0) {
        const auto pred = nn::predict_labels(model, test_set.x);
        std::cout << eval::render_report(eval::confusion(to_labels(test_set.labels), to_labels(pred)));
    }
    return 0;
}

int cmd_nn_predict(const NnArgs& a) {
    auto in = open_in(a.model);
    const auto model = nn::load_model(in);
    const auto data = load_dataset(a, false);
    if (data.x.cols() != model.input_dim())
        throw Error("model expects " + std::to_string(model.input_dim()) + " inputs, data has " +
                    std::to_string(data.x.cols()));
    const auto pred = nn::predict_labels(model, data.x);
    auto out = open_out(a.out);
    nn::write_labels_csv(pred, out);
    out.flush();
    if (!out) throw Error("failed writing " + a.out);
    if (!data.labels.empty())
        std::cout << eval::render_report(eval::confusion(to_labels(data.labels), to_labels(pred)));
    return 0;
}

// ---- physics

int cmd_physics(const sim::FiberOptics& optics) {
    check_usage([&] { optics.validate(); });
    std::printf("%.2f\n", optics.critical_angle_deg());
    return 0;
}

void add_nn_options(CLI::App* cmd, NnArgs& a) {
    cmd->add_option("--trace", a.trace, "collection CSV; TRANSITION rows are dropped")->check(CLI::ExistingFile);
    cmd->add_option("--x", a.x, "feature matrix CSV, 5 columns")->check(CLI::ExistingFile);
    cmd->add_option("--y", a.y, "class index per line")->check(CLI::ExistingFile);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Glove gesture recognition pipeline"};
    app.require_subcommand(1);

    SimulateArgs sim_args;
    auto* simulate = app.add_subcommand("simulate", "synthesize a labelled collection CSV");
    simulate->add_option("--script", sim_args.script, "one gesture name per line")->required()->check(CLI::ExistingFile);
    simulate->add_option("--profiles", sim_args.profiles, "gesture,sensor,delta CSV (default built-in)")
        ->check(CLI::ExistingFile);
    simulate->add_option("--out", sim_args.out, "output collection CSV")->required();
    simulate->add_option("--seed", sim_args.cfg.seed);
    simulate->add_option("--noise", sim_args.cfg.noise_sigma, "per-sample Gaussian sigma");
    simulate->add_option("--drift", sim_args.cfg.drift, "random-walk step sigma");
    simulate->add_option("--gesture-hold", sim_args.cfg.gesture_hold, "seconds");
    simulate->add_option("--relax-hold", sim_args.cfg.relax_hold, "seconds");
    simulate->add_option("--transition-time", sim_args.cfg.transition_time, "seconds");
    simulate->add_option("--interval", sim_args.cfg.sample_interval, "seconds between readings");

    TrainSignaturesArgs sig_args;
    auto* train_sig = app.add_subcommand("train-signatures", "learn per-gesture deltas from labelled traces");
    train_sig->add_option("traces", sig_args.traces, "collection CSVs")->required()->check(CLI::ExistingFile);
    train_sig->add_option("--out", sig_args.out, "output signature CSV")->required();
    train_sig->add_option("--sensors", sig_args.sensors, "active sensors")->delimiter(',');

    ClassifyArgs cls_args;
    auto* classify = app.add_subcommand("classify", "label each reading of a trace");
    classify->add_option("trace", cls_args.trace, "collection CSV, or raw device lines with --serial")
        ->required()
        ->check(CLI::ExistingFile);
    classify->add_option("--table", cls_args.table, "signature CSV")->required()->check(CLI::ExistingFile);
    classify->add_option("--out", cls_args.out, "output t_rel,label CSV")->required();
    classify->add_option("--sensors", cls_args.sensors, "active sensors")->delimiter(',');
    classify->add_flag("--serial", cls_args.serial, "input is device output, one v1,...,v5 line per reading");
    classify->add_option("--interval", cls_args.interval, "seconds between serial readings");
    classify->add_option("--alpha", cls_args.baseline.alpha, "EWMA weight of the new reading");
    classify->add_option("--window", cls_args.baseline.window, "baseline max window, seconds");
    classify->add_option("--tolerance", cls_args.classifier.tolerance, "relative match tolerance");

    NnArgs nn_args;
    auto* nn_cmd = app.add_subcommand("nn", "feed-forward classifier");
    nn_cmd->require_subcommand(1);
    auto* nn_train = nn_cmd->add_subcommand("train", "fit and save a model");
    add_nn_options(nn_train, nn_args);
    nn_train->add_option("--model", nn_args.model, "output model file")->required();
    nn_train->add_option("--metrics", nn_args.metrics, "per-epoch metrics CSV");
    nn_train->add_option("--split", nn_args.split, "rows used for training; the rest are held out");
    nn_train->add_option("--seed", nn_args.cfg.seed);
    nn_train->add_option("--epochs", nn_args.cfg.epochs);
    nn_train->add_option("--batch-size", nn_args.cfg.batch_size);
    nn_train->add_option("--dropout", nn_args.cfg.dropout);
    nn_train->add_option("--l2", nn_args.cfg.l2);
    nn_train->add_option("--learning-rate", nn_args.cfg.learning_rate);
    nn_train->add_flag("--normalize", nn_args.cfg.normalize, "scale inputs by 1/1023");
    auto* nn_predict = nn_cmd->add_subcommand("predict", "label samples with a saved model");
    add_nn_options(nn_predict, nn_args);
    nn_predict->add_option("--model", nn_args.model)->required()->check(CLI::ExistingFile);
    nn_predict->add_option("--out", nn_args.out, "output labels, one class index per line")->required();

    sim::FiberOptics optics;
    auto* physics = app.add_subcommand("physics", "critical angle of the fiber core");
    physics->add_option("--n-medium", optics.n_medium, "core refractive index");
    physics->add_option("--n-cladding", optics.n_cladding, "surrounding refractive index");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*simulate) return cmd_simulate(sim_args);
        if (*train_sig) return cmd_train_signatures(sig_args);
        if (*classify) return cmd_classify(cls_args);
        if (*nn_train) return cmd_nn_train(nn_args);
        if (*nn_predict) return cmd_nn_predict(nn_args);
        if (*physics) return cmd_physics(optics);
    } catch (const UsageError& e) {
        std::cerr << "lite: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "lite: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}
