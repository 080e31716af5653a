#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "lite/errors.hpp"
#include "lite/ingest.hpp"
#include "lite/mlp.hpp"

namespace lite::nn {

namespace {

constexpr std::string_view kMagic = "lite-mlp v1";

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t pos; (pos = s.find(sep, start)) != std::string::npos; start = pos + 1)
        out.push_back(s.substr(start, pos - start));
    out.push_back(s.substr(start));
    return out;
}

std::string trimmed(const std::string& s) {
    auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    return s.substr(first, s.find_last_not_of(" \t\r\n") - first + 1);
}

std::size_t infer_classes(const std::vector<int>& a, const std::vector<int>& b) {
    int hi = -1;
    for (int v : a) hi = std::max(hi, v);
    for (int v : b) hi = std::max(hi, v);
    return std::size_t(hi + 1);
}

/// Reads whitespace-separated tokens across lines, tracking the line number for errors.
class TokenReader {
public:
    explicit TokenReader(std::istream& in) : in_(in) {}

    bool next(std::string& token) {
        while (!(line_stream_ >> token)) {
            std::string line;
            if (!std::getline(in_, line)) return false;
            ++line_no_;
            line_stream_.clear();
            line_stream_.str(line);
        }
        return true;
    }

    std::string expect(const char* what) {
        std::string token;
        if (!next(token))
            throw ParseError(ParseErrorKind::Truncated, std::string("stream ended before ") + what, line_no_);
        return token;
    }

    double real(const char* what) {
        const auto token = expect(what);
        double v;
        try {
            v = ingest::parse_real(token);
        } catch (const ParseError& e) {
            throw e.at_line(line_no_);
        }
        if (!std::isfinite(v)) throw ParseError(ParseErrorKind::NonFinite, "non-finite parameter", line_no_);
        return v;
    }

    std::size_t count(const char* what) {
        const double v = real(what);
        if (v < 0 || v != std::floor(v) || v > 1e9)
            throw ParseError(ParseErrorKind::NonNumber, std::string("bad ") + what, line_no_);
        return std::size_t(v);
    }

    std::size_t line_no() const noexcept { return line_no_; }

private:
    std::istream& in_;
    std::istringstream line_stream_;
    std::size_t line_no_ = 0;
};

} // namespace

void MlpConfig::validate() const {
    if (input_dim == 0) throw std::invalid_argument("input dimension must be at least 1");
    for (auto h : hidden)
        if (h == 0) throw std::invalid_argument("hidden layer widths must be at least 1");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw std::invalid_argument("dropout rate must lie in [0, 1)");
    if (!(l2 >= 0.0) || !std::isfinite(l2)) throw std::invalid_argument("L2 coefficient must be non-negative");
    if (batch_size == 0) throw std::invalid_argument("batch size must be at least 1");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
    if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0))
        throw std::invalid_argument("Adam decay rates must lie in [0, 1)");
    if (!(adam_epsilon > 0.0)) throw std::invalid_argument("Adam epsilon must be positive");
}

void Dataset::validate(std::size_t input_dim) const {
    if (std::size_t(x.rows()) != labels.size())
        throw std::invalid_argument("dataset has " + std::to_string(x.rows()) + " rows but " +
                                    std::to_string(labels.size()) + " labels");
    if (x.rows() > 0 && std::size_t(x.cols()) != input_dim)
        throw std::invalid_argument("dataset has " + std::to_string(x.cols()) + " features, expected " +
                                    std::to_string(input_dim));
    for (int l : labels)
        if (l < 0) throw std::out_of_range("negative class index");
    if (!x.allFinite()) throw std::invalid_argument("dataset contains non-finite features");
}

Eigen::MatrixXd one_hot(const std::vector<int>& labels, std::size_t num_classes) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(Eigen::Index(labels.size()), Eigen::Index(num_classes));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || std::size_t(labels[i]) >= num_classes)
            throw std::out_of_range("class index " + std::to_string(labels[i]) + " outside [0, " +
                                    std::to_string(num_classes) + ")");
        out(Eigen::Index(i), labels[i]) = 1.0;
    }
    return out;
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& data, std::size_t boundary) {
    data.validate(std::size_t(std::max<Eigen::Index>(data.x.cols(), 1)));
    if (boundary > data.size())
        throw std::out_of_range("split boundary " + std::to_string(boundary) + " beyond " +
                                std::to_string(data.size()) + " rows");
    const auto b = Eigen::Index(boundary);
    const auto rest = data.x.rows() - b;
    Dataset train{data.x.topRows(b), {data.labels.begin(), data.labels.begin() + b}};
    Dataset test{data.x.bottomRows(rest), {data.labels.begin() + b, data.labels.end()}};
    return {std::move(train), std::move(test)};
}

Dataset dataset_from_trace(const LabeledTrace& trace) {
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < trace.size(); ++i)
        if (trace.labels[i] != GestureLabel::Transition) keep.push_back(i);
    Dataset out{Eigen::MatrixXd(Eigen::Index(keep.size()), Eigen::Index(kChannels)), {}};
    for (std::size_t r = 0; r < keep.size(); ++r) {
        for (std::size_t c = 0; c < kChannels; ++c)
            out.x(Eigen::Index(r), Eigen::Index(c)) = trace.frames[keep[r]].channels[c];
        out.labels.push_back(int(class_index(trace.labels[keep[r]])));
    }
    return out;
}

std::vector<int> predict_labels(const MlpModel& model, const Eigen::MatrixXd& x) {
    if (x.rows() == 0) return {};
    const Eigen::MatrixXd probs = forward_masked(model, Eigen::MatrixXd(x.transpose()), {}).output;
    std::vector<int> out(std::size_t(probs.cols()));
    for (Eigen::Index c = 0; c < probs.cols(); ++c) {
        Eigen::Index best = 0;
        for (Eigen::Index r = 1; r < probs.rows(); ++r)
            if (probs(r, c) > probs(best, c)) best = r;
        out[std::size_t(c)] = int(best);
    }
    return out;
}

EpochMetrics evaluate(const MlpModel& model, const Dataset& data, std::size_t num_classes) {
    EpochMetrics m;
    if (data.size() == 0) return m;
    const auto pass = forward_masked(model, Eigen::MatrixXd(data.x.transpose()), {});
    const Eigen::MatrixXd target = one_hot(data.labels, num_classes).transpose();
    m.train_loss = bce_loss<double>(pass.output, target, model, model.config().l2);
    const auto pred = predict_labels(model, data.x);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == data.labels[i];
    m.train_accuracy = double(hits) / double(pred.size());
    return m;
}

std::pair<MlpModel, TrainReport> train(const Dataset& data, const MlpConfig& cfg, const Dataset& validation) {
    cfg.validate();
    if (data.size() == 0) throw std::invalid_argument("cannot train on an empty dataset");
    data.validate(cfg.input_dim);
    if (validation.size() > 0) validation.validate(cfg.input_dim);

    const std::size_t classes = infer_classes(data.labels, validation.labels);
    MlpModel model(cfg, classes);
    AdamOptimizer<double> adam(model);
    std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);

    const Eigen::MatrixXd xt = data.x.transpose();
    const Eigen::MatrixXd yt = one_hot(data.labels, classes).transpose();
    const Dataset& val = validation.size() > 0 ? validation : data;

    std::vector<Eigen::Index> order(data.size());
    std::iota(order.begin(), order.end(), Eigen::Index(0));

    TrainReport report;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double loss_sum = 0.0;
        std::size_t hits = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t n = std::min(cfg.batch_size, order.size() - start);
            Eigen::MatrixXd xb(xt.rows(), Eigen::Index(n));
            Eigen::MatrixXd yb(yt.rows(), Eigen::Index(n));
            for (std::size_t j = 0; j < n; ++j) {
                xb.col(Eigen::Index(j)) = xt.col(order[start + j]);
                yb.col(Eigen::Index(j)) = yt.col(order[start + j]);
            }
            const auto pass = forward(model, xb, true, rng);
            loss_sum += bce_loss<double>(pass.output, yb, model, cfg.l2) * double(n);
            for (Eigen::Index j = 0; j < Eigen::Index(n); ++j) {
                Eigen::Index best = 0;
                for (Eigen::Index r = 1; r < pass.output.rows(); ++r)
                    if (pass.output(r, j) > pass.output(best, j)) best = r;
                Eigen::Index truth = 0;
                yb.col(j).maxCoeff(&truth);
                hits += best == truth;
            }
            adam.step(model, backward(model, pass, yb, cfg.l2));
        }
        EpochMetrics m;
        m.train_loss = loss_sum / double(order.size());
        m.train_accuracy = double(hits) / double(order.size());
        const auto v = evaluate(model, val, classes);
        m.val_loss = v.train_loss;
        m.val_accuracy = v.train_accuracy;
        report.epochs.push_back(m);
    }
    return {std::move(model), std::move(report)};
}

void write_metrics_csv(const TrainReport& report, std::ostream& sink) {
    sink << "epoch,train_loss,train_accuracy,val_loss,val_accuracy\n";
    for (std::size_t i = 0; i < report.epochs.size(); ++i) {
        const auto& m = report.epochs[i];
        sink << i + 1 << ',' << ingest::format_real(m.train_loss) << ',' << ingest::format_real(m.train_accuracy)
             << ',' << ingest::format_real(m.val_loss) << ',' << ingest::format_real(m.val_accuracy) << '\n';
    }
    if (!sink) throw Error("failed writing metrics CSV");
}

void save_model(const MlpModel& model, std::ostream& sink) {
    const auto& c = model.config();
    sink << kMagic << '\n';
    sink << "config input_dim=" << c.input_dim << " hidden=";
    for (std::size_t i = 0; i < c.hidden.size(); ++i) sink << (i ? "," : "") << c.hidden[i];
    if (c.hidden.empty()) sink << "none";
    sink << " dropout=" << ingest::format_real(c.dropout) << " l2=" << ingest::format_real(c.l2)
         << " epochs=" << c.epochs << " batch_size=" << c.batch_size << " seed=" << c.seed
         << " normalize=" << (c.normalize ? 1 : 0) << " learning_rate=" << ingest::format_real(c.learning_rate)
         << " beta1=" << ingest::format_real(c.beta1) << " beta2=" << ingest::format_real(c.beta2)
         << " adam_epsilon=" << ingest::format_real(c.adam_epsilon) << '\n';
    sink << "layers " << model.layers().size() << '\n';
    for (const auto& layer : model.layers()) {
        sink << "layer " << layer.outputs() << ' ' << layer.inputs() << '\n';
        for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
            for (Eigen::Index k = 0; k < layer.weights.cols(); ++k)
                sink << (k ? " " : "") << ingest::format_real(layer.weights(r, k));
            sink << '\n';
        }
        for (Eigen::Index r = 0; r < layer.bias.size(); ++r)
            sink << (r ? " " : "") << ingest::format_real(layer.bias(r));
        sink << '\n';
    }
    sink << "end\n";
    sink.flush();
    if (!sink) throw Error("failed writing model");
}

MlpModel load_model(std::istream& source) {
    std::string line;
    if (!std::getline(source, line) || trimmed(line) != kMagic)
        throw ParseError(ParseErrorKind::Version, "not a lite-mlp v1 model file", 1);

    if (!std::getline(source, line)) throw ParseError(ParseErrorKind::Truncated, "missing config line", 2);
    MlpConfig cfg;
    {
        auto fields = split(trimmed(line), ' ');
        if (fields.empty() || fields[0] != "config")
            throw ParseError(ParseErrorKind::Version, "expected config line", 2);
        try {
            for (std::size_t i = 1; i < fields.size(); ++i) {
                const auto eq = fields[i].find('=');
                if (eq == std::string::npos) throw ParseError(ParseErrorKind::NonNumber, "bad config field");
                const auto key = fields[i].substr(0, eq);
                const auto val = fields[i].substr(eq + 1);
                if (key == "hidden") {
                    cfg.hidden.clear();
                    if (val != "none")
                        for (const auto& h : split(val, ',')) cfg.hidden.push_back(std::size_t(ingest::parse_real(h)));
                } else {
                    const double v = ingest::parse_real(val);
                    if (!std::isfinite(v)) throw ParseError(ParseErrorKind::NonFinite, "non-finite config value");
                    if (key == "input_dim") cfg.input_dim = std::size_t(v);
                    else if (key == "dropout") cfg.dropout = v;
                    else if (key == "l2") cfg.l2 = v;
                    else if (key == "epochs") cfg.epochs = std::size_t(v);
                    else if (key == "batch_size") cfg.batch_size = std::size_t(v);
                    else if (key == "seed") cfg.seed = std::stoull(val);
                    else if (key == "normalize") cfg.normalize = v != 0.0;
                    else if (key == "learning_rate") cfg.learning_rate = v;
                    else if (key == "beta1") cfg.beta1 = v;
                    else if (key == "beta2") cfg.beta2 = v;
                    else if (key == "adam_epsilon") cfg.adam_epsilon = v;
                    else throw ParseError(ParseErrorKind::Version, "unknown config key '" + key + "'");
                }
            }
        } catch (const ParseError& e) {
            throw e.at_line(2);
        }
    }

    TokenReader tokens(source);
    if (tokens.expect("layer count") != "layers")
        throw ParseError(ParseErrorKind::Version, "expected 'layers'", tokens.line_no() + 2);
    const std::size_t count = tokens.count("layer count");
    std::vector<DenseLayer<double>> layers;
    for (std::size_t i = 0; i < count; ++i) {
        if (tokens.expect("layer header") != "layer")
            throw ParseError(ParseErrorKind::Version, "expected 'layer'", tokens.line_no() + 2);
        const auto out = Eigen::Index(tokens.count("layer rows"));
        const auto in = Eigen::Index(tokens.count("layer columns"));
        DenseLayer<double> layer{Eigen::MatrixXd(out, in), Eigen::VectorXd(out)};
        for (Eigen::Index r = 0; r < out; ++r)
            for (Eigen::Index k = 0; k < in; ++k) layer.weights(r, k) = tokens.real("end of weights");
        for (Eigen::Index r = 0; r < out; ++r) layer.bias(r) = tokens.real("end of biases");
        layers.push_back(std::move(layer));
    }
    if (tokens.expect("end marker") != "end")
        throw ParseError(ParseErrorKind::Version, "expected 'end'", tokens.line_no() + 2);
    try {
        return MlpModel(cfg, std::move(layers));
    } catch (const std::invalid_argument& e) {
        throw ParseError(ParseErrorKind::Version, e.what());
    }
}

Eigen::MatrixXd read_matrix_csv(std::istream& source, std::size_t columns) {
    std::vector<double> values;
    std::string line;
    std::size_t line_no = 0, rows = 0;
    while (std::getline(source, line)) {
        ++line_no;
        if (trimmed(line).empty()) continue;
        auto fields = split(trimmed(line), ',');
        if (fields.size() == columns + 1 && trimmed(fields.back()).empty()) fields.pop_back();
        if (fields.size() != columns)
            throw ParseError(ParseErrorKind::FieldCount,
                             "expected " + std::to_string(columns) + " values, got " + std::to_string(fields.size()),
                             line_no);
        try {
            for (const auto& f : fields) {
                const double v = ingest::parse_real(f);
                if (!std::isfinite(v)) throw ParseError(ParseErrorKind::NonFinite, "non-finite feature");
                values.push_back(v);
            }
        } catch (const ParseError& e) {
            throw e.at_line(line_no);
        }
        ++rows;
    }
    return Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        values.data(), Eigen::Index(rows), Eigen::Index(columns));
}

void write_matrix_csv(const Eigen::MatrixXd& x, std::ostream& sink) {
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        for (Eigen::Index c = 0; c < x.cols(); ++c) sink << (c ? "," : "") << ingest::format_real(x(r, c));
        sink << '\n';
    }
    if (!sink) throw Error("failed writing feature matrix");
}

std::vector<int> read_labels_csv(std::istream& source) {
    std::vector<int> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(source, line)) {
        ++line_no;
        const auto t = trimmed(line);
        if (t.empty()) continue;
        double v;
        try {
            v = ingest::parse_real(t);
        } catch (const ParseError& e) {
            throw e.at_line(line_no);
        }
        if (v < 0 || v != std::floor(v) || v > 1e6)
            throw ParseError(ParseErrorKind::NonInteger, "class index must be a non-negative integer", line_no);
        out.push_back(int(v));
    }
    return out;
}

void write_labels_csv(const std::vector<int>& labels, std::ostream& sink) {
    for (int l : labels) sink << l << '\n';
    if (!sink) throw Error("failed writing labels");
}

} // namespace lite::nn
