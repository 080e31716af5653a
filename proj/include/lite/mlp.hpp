#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "lite/types.hpp"

namespace lite::nn {

/// Architecture and training regime. The defaults are the Keras model the classifier
/// replicates: 5 -> 100 -> 100 -> classes, ReLU hidden, sigmoid output, binary
/// cross-entropy, Adam, dropout 0.3, L2 0.01 on kernels.
struct MlpConfig {
    std::size_t input_dim = kChannels;
    std::vector<std::size_t> hidden{100, 100};
    double dropout = 0.3;
    double l2 = 0.01;
    std::size_t epochs = 150;
    std::size_t batch_size = 20;
    std::uint64_t seed = 1;
    bool normalize = false; ///< divide inputs by 1023 before the first layer

    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_epsilon = 1e-8;

    /// Throws std::invalid_argument on an out-of-range field.
    void validate() const;
};

/// Predictions are clamped to [eps, 1 - eps] before the logarithm.
inline constexpr double kProbabilityClamp = 1e-7;

template <typename Scalar>
struct DenseLayer {
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    Matrix weights; ///< out x in
    Vector bias;

    Eigen::Index inputs() const { return weights.cols(); }
    Eigen::Index outputs() const { return weights.rows(); }
};

/// Fully connected network; the last layer is the sigmoid output, the rest are ReLU.
template <typename Scalar>
class BasicMlp {
public:
    using Layer = DenseLayer<Scalar>;
    using Matrix = typename Layer::Matrix;
    using Vector = typename Layer::Vector;

    BasicMlp() = default;

    /// Glorot-uniform weights (seeded by cfg.seed), zero biases.
    BasicMlp(const MlpConfig& cfg, std::size_t output_dim) : config_(cfg) {
        cfg.validate();
        if (output_dim == 0) throw std::invalid_argument("output dimension must be at least 1");
        std::mt19937_64 rng(cfg.seed);
        std::size_t fan_in = cfg.input_dim;
        auto dims = cfg.hidden;
        dims.push_back(output_dim);
        for (std::size_t fan_out : dims) {
            const double limit = std::sqrt(6.0 / double(fan_in + fan_out));
            std::uniform_real_distribution<double> u(-limit, limit);
            Layer layer{Matrix(Eigen::Index(fan_out), Eigen::Index(fan_in)), Vector::Zero(Eigen::Index(fan_out))};
            for (Eigen::Index r = 0; r < layer.weights.rows(); ++r)
                for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) layer.weights(r, c) = Scalar(u(rng));
            layers_.push_back(std::move(layer));
            fan_in = fan_out;
        }
    }

    /// Takes ownership of explicit parameters; shapes must chain from cfg.input_dim.
    BasicMlp(const MlpConfig& cfg, std::vector<Layer> layers) : config_(cfg), layers_(std::move(layers)) {
        cfg.validate();
        if (layers_.size() != cfg.hidden.size() + 1)
            throw std::invalid_argument("layer count does not match the configured architecture");
        Eigen::Index in = Eigen::Index(cfg.input_dim);
        for (std::size_t i = 0; i < layers_.size(); ++i) {
            const auto& l = layers_[i];
            if (l.inputs() != in || l.bias.size() != l.outputs() ||
                (i < cfg.hidden.size() && l.outputs() != Eigen::Index(cfg.hidden[i])))
                throw std::invalid_argument("layer " + std::to_string(i) + " has inconsistent shape");
            if (!l.weights.allFinite() || !l.bias.allFinite())
                throw std::invalid_argument("layer " + std::to_string(i) + " has non-finite parameters");
            in = l.outputs();
        }
    }

    const MlpConfig& config() const noexcept { return config_; }
    const std::vector<Layer>& layers() const noexcept { return layers_; }
    std::vector<Layer>& layers() noexcept { return layers_; }
    Eigen::Index input_dim() const { return layers_.front().inputs(); }
    Eigen::Index output_dim() const { return layers_.back().outputs(); }

    template <typename Other>
    BasicMlp<Other> cast() const {
        std::vector<DenseLayer<Other>> out;
        for (const auto& l : layers_) out.push_back({l.weights.template cast<Other>(), l.bias.template cast<Other>()});
        return BasicMlp<Other>(config_, std::move(out));
    }

    friend bool operator==(const BasicMlp& a, const BasicMlp& b) {
        if (a.layers_.size() != b.layers_.size()) return false;
        for (std::size_t i = 0; i < a.layers_.size(); ++i) {
            const auto& x = a.layers_[i];
            const auto& y = b.layers_[i];
            if (x.weights.rows() != y.weights.rows() || x.weights.cols() != y.weights.cols() ||
                x.weights != y.weights || x.bias != y.bias)
                return false;
        }
        return true;
    }

private:
    MlpConfig config_;
    std::vector<Layer> layers_;
};

using MlpModel = BasicMlp<double>;

/// Activations of one forward pass over a batch stored column-per-sample.
/// `masks[i]` is the scaled dropout mask applied after hidden layer i (empty when inactive).
template <typename Scalar>
struct ForwardPass {
    using Matrix = typename BasicMlp<Scalar>::Matrix;
    std::vector<Matrix> inputs;   ///< input to each layer (after dropout)
    std::vector<Matrix> pre;      ///< pre-activation of each layer
    std::vector<Matrix> masks;
    Matrix output;                ///< sigmoid probabilities, classes x batch
};

/// Scaled inverted-dropout mask: entries are 0 with probability `rate`, else 1 / (1 - rate).
template <typename Scalar, typename Rng>
typename BasicMlp<Scalar>::Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, Rng& rng) {
    typename BasicMlp<Scalar>::Matrix mask(rows, cols);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Scalar keep = Scalar(1.0 / (1.0 - rate));
    for (Eigen::Index c = 0; c < cols; ++c)
        for (Eigen::Index r = 0; r < rows; ++r) mask(r, c) = u(rng) < rate ? Scalar(0) : keep;
    return mask;
}

namespace detail {

template <typename Derived>
auto scaled_input(const Eigen::MatrixBase<Derived>& x, bool normalize) {
    using Scalar = typename Derived::Scalar;
    return (x * Scalar(normalize ? 1.0 / kMaxIntensity : 1.0)).eval();
}

template <typename Scalar>
void check_input(const BasicMlp<Scalar>& model, Eigen::Index rows) {
    if (rows != model.input_dim())
        throw std::invalid_argument("input has " + std::to_string(rows) + " features, model expects " +
                                    std::to_string(model.input_dim()));
}

} // namespace detail

/// Forward pass over columns of `x` with caller-supplied dropout masks (one per hidden
/// layer, or none for inference).
template <typename Scalar>
ForwardPass<Scalar> forward_masked(const BasicMlp<Scalar>& model,
                                   const typename BasicMlp<Scalar>::Matrix& x,
                                   std::vector<typename BasicMlp<Scalar>::Matrix> masks) {
    detail::check_input(model, x.rows());
    const auto& layers = model.layers();
    if (!masks.empty() && masks.size() != layers.size() - 1)
        throw std::invalid_argument("need one dropout mask per hidden layer");
    ForwardPass<Scalar> pass;
    pass.masks = std::move(masks);
    typename BasicMlp<Scalar>::Matrix a = detail::scaled_input(x, model.config().normalize);
    for (std::size_t i = 0; i < layers.size(); ++i) {
        pass.inputs.push_back(a);
        typename BasicMlp<Scalar>::Matrix z = (layers[i].weights * a).colwise() + layers[i].bias;
        pass.pre.push_back(z);
        if (i + 1 < layers.size()) {
            a = z.cwiseMax(Scalar(0));
            if (!pass.masks.empty()) a = a.cwiseProduct(pass.masks[i]);
        } else {
            pass.output = (Scalar(1) / (Scalar(1) + (-z.array()).exp())).matrix();
        }
    }
    return pass;
}

/// Inference (training = false) or training-mode forward pass; dropout draws come from `rng`.
template <typename Scalar, typename Rng>
ForwardPass<Scalar> forward(const BasicMlp<Scalar>& model, const typename BasicMlp<Scalar>::Matrix& x,
                            bool training, Rng& rng) {
    std::vector<typename BasicMlp<Scalar>::Matrix> masks;
    const double rate = model.config().dropout;
    if (training && rate > 0.0) {
        const auto& layers = model.layers();
        for (std::size_t i = 0; i + 1 < layers.size(); ++i)
            masks.push_back(dropout_mask<Scalar>(layers[i].outputs(), x.cols(), rate, rng));
    }
    return forward_masked(model, x, std::move(masks));
}

/// Inference on a single sample.
template <typename Scalar>
typename BasicMlp<Scalar>::Vector predict_proba(const BasicMlp<Scalar>& model,
                                                const typename BasicMlp<Scalar>::Vector& x) {
    return forward_masked(model, typename BasicMlp<Scalar>::Matrix(x), {}).output.col(0);
}

template <typename Scalar>
Scalar l2_penalty(const BasicMlp<Scalar>& model, double l2) {
    Scalar sum(0);
    for (const auto& layer : model.layers()) sum += layer.weights.squaredNorm();
    return Scalar(l2) * sum;
}

/// Mean over samples and outputs of binary cross-entropy on clamped predictions, plus
/// l2 * sum of squared weights (biases are not penalised).
template <typename Scalar>
Scalar bce_loss(const typename BasicMlp<Scalar>::Matrix& pred, const typename BasicMlp<Scalar>::Matrix& target,
                const BasicMlp<Scalar>& model, double l2) {
    if (pred.rows() != target.rows() || pred.cols() != target.cols())
        throw std::invalid_argument("prediction and target shapes differ");
    if (pred.size() == 0) throw std::invalid_argument("empty prediction");
    const Scalar eps = Scalar(kProbabilityClamp);
    const auto p = pred.array().cwiseMax(eps).cwiseMin(Scalar(1) - eps);
    const auto& t = target.array();
    const Scalar bce = -(t * p.log() + (Scalar(1) - t) * (Scalar(1) - p).log()).sum() / Scalar(pred.size());
    return bce + l2_penalty(model, l2);
}

template <typename Scalar>
struct Gradients {
    std::vector<typename BasicMlp<Scalar>::Matrix> weights;
    std::vector<typename BasicMlp<Scalar>::Vector> bias;
};

/// Exact gradient of bce_loss(pass.output, target, model, l2) with respect to every parameter,
/// holding the pass's dropout masks fixed. Clamped predictions contribute no gradient.
template <typename Scalar>
Gradients<Scalar> backward(const BasicMlp<Scalar>& model, const ForwardPass<Scalar>& pass,
                           const typename BasicMlp<Scalar>::Matrix& target, double l2) {
    using Matrix = typename BasicMlp<Scalar>::Matrix;
    const auto& layers = model.layers();
    const auto& p = pass.output;
    if (p.rows() != target.rows() || p.cols() != target.cols())
        throw std::invalid_argument("prediction and target shapes differ");
    const Scalar eps = Scalar(kProbabilityClamp);
    const Scalar scale = Scalar(1) / Scalar(p.size());

    // d(bce)/dz for sigmoid + cross-entropy collapses to (p - t).
    Matrix delta = ((p - target) * scale).eval();
    for (Eigen::Index c = 0; c < p.cols(); ++c)
        for (Eigen::Index r = 0; r < p.rows(); ++r)
            if (p(r, c) < eps || p(r, c) > Scalar(1) - eps) delta(r, c) = Scalar(0);

    Gradients<Scalar> g;
    g.weights.resize(layers.size());
    g.bias.resize(layers.size());
    for (std::size_t i = layers.size(); i-- > 0;) {
        g.weights[i] = delta * pass.inputs[i].transpose() + Scalar(2.0 * l2) * layers[i].weights;
        g.bias[i] = delta.rowwise().sum();
        if (i == 0) break;
        Matrix upstream = layers[i].weights.transpose() * delta;
        if (!pass.masks.empty()) upstream = upstream.cwiseProduct(pass.masks[i - 1]);
        const auto& z = pass.pre[i - 1];
        delta = (z.array() > Scalar(0)).select(upstream, Matrix::Zero(upstream.rows(), upstream.cols()));
    }
    return g;
}

/// Adam state for every parameter of one model.
template <typename Scalar>
class AdamOptimizer {
public:
    explicit AdamOptimizer(const BasicMlp<Scalar>& model) {
        for (const auto& l : model.layers()) {
            m_.weights.push_back(BasicMlp<Scalar>::Matrix::Zero(l.weights.rows(), l.weights.cols()));
            m_.bias.push_back(BasicMlp<Scalar>::Vector::Zero(l.bias.size()));
        }
        v_ = m_;
    }

    void step(BasicMlp<Scalar>& model, const Gradients<Scalar>& g) {
        const auto& cfg = model.config();
        ++t_;
        const Scalar b1 = Scalar(cfg.beta1), b2 = Scalar(cfg.beta2);
        const Scalar c1 = Scalar(1) - Scalar(std::pow(cfg.beta1, double(t_)));
        const Scalar c2 = Scalar(1) - Scalar(std::pow(cfg.beta2, double(t_)));
        const Scalar lr = Scalar(cfg.learning_rate), eps = Scalar(cfg.adam_epsilon);
        auto update = [&](auto& param, auto& m, auto& v, const auto& grad) {
            m = b1 * m + (Scalar(1) - b1) * grad;
            v = b2 * v + (Scalar(1) - b2) * grad.cwiseAbs2();
            param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
        };
        auto& layers = model.layers();
        for (std::size_t i = 0; i < layers.size(); ++i) {
            update(layers[i].weights, m_.weights[i], v_.weights[i], g.weights[i]);
            update(layers[i].bias, m_.bias[i], v_.bias[i], g.bias[i]);
        }
    }

    std::size_t steps() const noexcept { return t_; }

private:
    Gradients<Scalar> m_, v_;
    std::size_t t_ = 0;
};

/// Samples as rows (one per reading, input_dim columns) with class-index labels.
struct Dataset {
    Eigen::MatrixXd x;
    std::vector<int> labels;

    std::size_t size() const noexcept { return labels.size(); }
    void validate(std::size_t input_dim = kChannels) const;
};

/// Row i is 1 at labels[i], 0 elsewhere. Throws std::out_of_range for an index outside [0, num_classes).
Eigen::MatrixXd one_hot(const std::vector<int>& labels, std::size_t num_classes);

/// First `boundary` rows train, the rest test; order preserved.
/// Throws std::out_of_range when boundary exceeds the row count.
std::pair<Dataset, Dataset> split_dataset(const Dataset& data, std::size_t boundary);

/// Non-TRANSITION frames of a labeled trace, in order.
Dataset dataset_from_trace(const LabeledTrace& trace);

struct EpochMetrics {
    double train_loss = 0.0;
    double train_accuracy = 0.0;
    double val_loss = 0.0;
    double val_accuracy = 0.0;
};

struct TrainReport {
    std::vector<EpochMetrics> epochs;
};

/// Argmax per row; ties resolve to the lowest class index.
std::vector<int> predict_labels(const MlpModel& model, const Eigen::MatrixXd& x);

/// Loss (including the L2 term) and argmax accuracy in inference mode.
EpochMetrics evaluate(const MlpModel& model, const Dataset& data, std::size_t num_classes);

/// Mini-batch Adam over per-epoch shuffles drawn from cfg.seed. Training metrics are
/// running averages over the epoch's batches (dropout active); validation metrics are
/// computed in inference mode on `validation`, or on the training set when it is empty.
/// The output width is the largest label + 1 across both sets.
std::pair<MlpModel, TrainReport> train(const Dataset& data, const MlpConfig& cfg,
                                       const Dataset& validation = {});

void write_metrics_csv(const TrainReport& report, std::ostream& sink);

/// Versioned text format, parameters in shortest round-trip decimal form.
void save_model(const MlpModel& model, std::ostream& sink);
/// Throws ParseError with kind Version, Truncated, NonFinite or NonNumber.
MlpModel load_model(std::istream& source);

/// Headerless CSV, one sample per row.
Eigen::MatrixXd read_matrix_csv(std::istream& source, std::size_t columns = kChannels);
void write_matrix_csv(const Eigen::MatrixXd& x, std::ostream& sink);
/// One integer class index per line.
std::vector<int> read_labels_csv(std::istream& source);
void write_labels_csv(const std::vector<int>& labels, std::ostream& sink);

} // namespace lite::nn
