#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "lite/errors.hpp"
#include "lite/mlp.hpp"

using namespace lite;
using namespace lite::nn;

namespace {

MlpConfig tiny_config() {
    MlpConfig cfg;
    cfg.hidden = {3, 3};
    cfg.seed = 5;
    return cfg;
}

MlpModel zero_model(const MlpConfig& cfg, std::size_t classes) {
    MlpModel m(cfg, classes);
    for (auto& l : m.layers()) {
        l.weights.setZero();
        l.bias.setZero();
    }
    return m;
}

MlpModel random_model(const MlpConfig& cfg, std::size_t classes, std::uint64_t seed) {
    MlpModel m(cfg, classes);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 0.7);
    for (auto& l : m.layers()) {
        for (Eigen::Index i = 0; i < l.weights.size(); ++i) l.weights.data()[i] = n(rng);
        for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias(i) = n(rng);
    }
    return m;
}

/// Loss as a pure function of the parameters for the finite-difference oracle.
double loss_of(const MlpModel& m, const Eigen::MatrixXd& x, const Eigen::MatrixXd& t,
               const std::vector<Eigen::MatrixXd>& masks, double l2) {
    return bce_loss<double>(forward_masked(m, x, masks).output, t, m, l2);
}

struct GradCheck {
    double worst_rel = 0.0;
    std::size_t checked = 0;
};

GradCheck check_gradients(MlpModel model, const Eigen::MatrixXd& x, const Eigen::MatrixXd& t,
                          const std::vector<Eigen::MatrixXd>& masks, double l2) {
    const auto analytic = backward(model, forward_masked(model, x, masks), t, l2);
    const double h = 1e-5;
    GradCheck out;
    auto probe = [&](double& param, double a) {
        const double saved = param;
        param = saved + h;
        const double up = loss_of(model, x, t, masks, l2);
        param = saved - h;
        const double down = loss_of(model, x, t, masks, l2);
        param = saved;
        const double numeric = (up - down) / (2 * h);
        const double scale = std::max(std::abs(a), std::abs(numeric));
        const double rel = scale < 1e-10 ? 0.0 : std::abs(a - numeric) / scale;
        out.worst_rel = std::max(out.worst_rel, rel);
        ++out.checked;
    };
    for (std::size_t li = 0; li < model.layers().size(); ++li) {
        auto& layer = model.layers()[li];
        for (Eigen::Index r = 0; r < layer.weights.rows(); ++r)
            for (Eigen::Index c = 0; c < layer.weights.cols(); ++c)
                probe(layer.weights(r, c), analytic.weights[li](r, c));
        for (Eigen::Index r = 0; r < layer.bias.size(); ++r) probe(layer.bias(r), analytic.bias[li](r));
    }
    return out;
}

} // namespace

TEST(OneHot, Encoding) {
    const auto m = one_hot({2}, 5);
    ASSERT_EQ(m.rows(), 1);
    ASSERT_EQ(m.cols(), 5);
    EXPECT_EQ(m.row(0), Eigen::RowVectorXd::Unit(5, 2));
    EXPECT_EQ(one_hot({}, 5).rows(), 0);
    EXPECT_THROW(one_hot({5}, 5), std::out_of_range);
    EXPECT_THROW(one_hot({-1}, 5), std::out_of_range);
}

TEST(MlpConfig, Validation) {
    EXPECT_NO_THROW(MlpConfig{}.validate());
    MlpConfig c;
    c.dropout = 1.0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = {};
    c.l2 = -1;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = {};
    c.hidden = {100, 0};
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = {};
    c.batch_size = 0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(MlpModel, DefaultArchitectureChains) {
    const MlpModel m(MlpConfig{}, 4);
    ASSERT_EQ(m.layers().size(), 3u);
    EXPECT_EQ(m.layers()[0].weights.rows(), 100);
    EXPECT_EQ(m.layers()[0].weights.cols(), 5);
    EXPECT_EQ(m.layers()[1].weights.rows(), 100);
    EXPECT_EQ(m.layers()[1].weights.cols(), 100);
    EXPECT_EQ(m.layers()[2].weights.rows(), 4);
    EXPECT_EQ(m.layers()[2].weights.cols(), 100);
    const double limit = std::sqrt(6.0 / 105.0);
    EXPECT_LE(m.layers()[0].weights.cwiseAbs().maxCoeff(), limit);
    EXPECT_TRUE(m.layers()[0].bias.isZero());
}

TEST(Forward, ZeroModelOutputsHalf) {
    const auto m = zero_model(MlpConfig{}, 4);
    const Eigen::VectorXd x = Eigen::VectorXd::Constant(5, 700.0);
    const auto y = predict_proba(m, x);
    for (Eigen::Index i = 0; i < y.size(); ++i) EXPECT_DOUBLE_EQ(y(i), 0.5);
    EXPECT_EQ(predict_labels(m, Eigen::MatrixXd::Random(7, 5)), std::vector<int>(7, 0));
}

TEST(Forward, InferenceDeterministicAndSeededTraining) {
    const MlpModel m(MlpConfig{}, 4);
    const Eigen::MatrixXd x = Eigen::MatrixXd::Constant(5, 3, 600.0);
    std::mt19937_64 r0(1);
    EXPECT_EQ(forward(m, x, false, r0).output, forward(m, x, false, r0).output);

    std::mt19937_64 a(77), b(77), c(78);
    const auto ya = forward(m, x, true, a).output;
    EXPECT_EQ(ya, forward(m, x, true, b).output);
    EXPECT_NE(ya, forward(m, x, true, c).output);
    EXPECT_THROW(predict_proba(m, Eigen::VectorXd::Zero(4)), std::invalid_argument);
}

TEST(Forward, FloatInstantiationAgrees) {
    const MlpModel m(MlpConfig{}, 3);
    const auto mf = m.cast<float>();
    Eigen::VectorXd x(5);
    x << 420, 760, 690, 800, 930;
    const auto yd = predict_proba(m, x);
    const auto yf = predict_proba(mf, Eigen::VectorXf(x.cast<float>()));
    EXPECT_LT((yd - yf.cast<double>()).cwiseAbs().maxCoeff(), 1e-4);
}

TEST(Dropout, InvertedScalingPreservesExpectation) {
    std::mt19937_64 rng(3);
    const auto mask = dropout_mask<double>(100000, 1, 0.3, rng);
    EXPECT_NEAR(mask.mean(), 1.0, 0.01);
    const double zeros = double((mask.array() == 0.0).count()) / double(mask.size());
    EXPECT_NEAR(zeros, 0.3, 0.01);
    EXPECT_DOUBLE_EQ(mask.maxCoeff(), 1.0 / 0.7);
}

TEST(BceLoss, AnalyticValues) {
    const auto m = zero_model(tiny_config(), 4);
    Eigen::MatrixXd half = Eigen::MatrixXd::Constant(4, 1, 0.5);
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(4, 1);
    t(0, 0) = 1.0;
    EXPECT_NEAR(bce_loss<double>(half, t, m, 0.01), std::log(2.0), 1e-15);

    const double eps = kProbabilityClamp;
    const double perfect = bce_loss<double>(t, t, m, 0.0);
    EXPECT_NEAR(perfect, -std::log(1.0 - eps), 1e-15);
    EXPECT_LT(perfect, 1e-6);

    const MlpModel r(tiny_config(), 4);
    EXPECT_NEAR(bce_loss<double>(half, t, r, 0.01) - std::log(2.0), 0.01 * (r.layers()[0].weights.squaredNorm() +
                                                                         r.layers()[1].weights.squaredNorm() +
                                                                         r.layers()[2].weights.squaredNorm()),
                1e-12);
    EXPECT_THROW(bce_loss<double>(half, Eigen::MatrixXd::Zero(3, 1), m, 0.0), std::invalid_argument);
}

TEST(Backward, MatchesCentralDifferences) {
    auto cfg = tiny_config();
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto model = random_model(cfg, 2, seed);
        std::mt19937_64 rng(seed + 100);
        std::normal_distribution<double> n(0.0, 1.0);
        Eigen::MatrixXd x(5, 4);
        for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = n(rng);
        Eigen::MatrixXd t = Eigen::MatrixXd::Zero(2, 4);
        for (Eigen::Index c = 0; c < 4; ++c) t(c % 2, c) = 1.0;

        const auto plain = check_gradients(model, x, t, {}, 0.01);
        EXPECT_EQ(plain.checked, 5u * 3 + 3 + 3 * 3 + 3 + 3 * 2 + 2);
        EXPECT_LT(plain.worst_rel, 1e-4) << "seed " << seed;

        std::vector<Eigen::MatrixXd> masks{dropout_mask<double>(3, 4, 0.3, rng), dropout_mask<double>(3, 4, 0.3, rng)};
        EXPECT_LT(check_gradients(model, x, t, masks, 0.01).worst_rel, 1e-4) << "seed " << seed;
    }
}

TEST(SplitDataset, Boundaries) {
    Dataset d{Eigen::MatrixXd::Random(1000, 5), std::vector<int>(1000)};
    for (int i = 0; i < 1000; ++i) d.labels[std::size_t(i)] = i % 4;
    auto [train, test] = split_dataset(d, 880);
    EXPECT_EQ(train.size(), 880u);
    EXPECT_EQ(test.size(), 120u);
    EXPECT_EQ(test.x.row(0), d.x.row(880));
    EXPECT_EQ(test.labels.front(), d.labels[880]);
    EXPECT_EQ(split_dataset(d, 0).first.size(), 0u);
    EXPECT_EQ(split_dataset(d, 1000).second.size(), 0u);
    EXPECT_THROW(split_dataset(d, 1001), std::out_of_range);
}

TEST(PredictLabels, ArgmaxWithLowIndexTies) {
    MlpConfig cfg;
    cfg.input_dim = 1;
    cfg.hidden = {};
    std::vector<DenseLayer<double>> layers{{Eigen::MatrixXd::Zero(3, 1), Eigen::VectorXd(3)}};
    // sigmoid^-1 of 0.1, 0.9, 0.2
    layers[0].bias << std::log(0.1 / 0.9), std::log(0.9 / 0.1), std::log(0.2 / 0.8);
    const MlpModel m(cfg, layers);
    EXPECT_EQ(predict_labels(m, Eigen::MatrixXd::Zero(1, 1)), std::vector<int>{1});
    layers[0].bias << 0.0, 0.0, -1.0;
    EXPECT_EQ(predict_labels(MlpModel(cfg, layers), Eigen::MatrixXd::Zero(1, 1)), std::vector<int>{0});
    EXPECT_THROW(predict_labels(m, Eigen::MatrixXd::Zero(1, 2)), std::invalid_argument);
}

namespace {

Dataset separable_toy() {
    // Two clusters along a 5-d direction, margin well above 1.
    Dataset d{Eigen::MatrixXd(20, 5), std::vector<int>(20)};
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-0.4, 0.4);
    for (int i = 0; i < 20; ++i) {
        const int cls = i % 2;
        for (int c = 0; c < 5; ++c) d.x(i, c) = (cls ? 3.0 : -3.0) + u(rng);
        d.labels[std::size_t(i)] = cls;
    }
    return d;
}

} // namespace

TEST(Train, SeparableToyReachesPerfectAccuracy) {
    auto cfg = MlpConfig{};
    cfg.seed = 3;
    const auto [model, report] = train(separable_toy(), cfg);
    ASSERT_EQ(report.epochs.size(), 150u);
    EXPECT_EQ(model.output_dim(), 2);
    const auto d = separable_toy();
    const auto pred = predict_labels(model, d.x);
    EXPECT_EQ(pred, d.labels);
    EXPECT_DOUBLE_EQ(report.epochs.back().val_accuracy, 1.0);
    for (const auto& e : report.epochs) {
        EXPECT_GE(e.train_accuracy, 0.0);
        EXPECT_LE(e.train_accuracy, 1.0);
    }
    EXPECT_LT(report.epochs.back().train_loss, report.epochs.front().train_loss);
}

TEST(Train, ZeroEpochsReturnsInitialization) {
    auto cfg = MlpConfig{};
    cfg.epochs = 0;
    const auto [model, report] = train(separable_toy(), cfg);
    EXPECT_TRUE(report.epochs.empty());
    EXPECT_EQ(model, MlpModel(cfg, 2));
}

TEST(Train, DeterministicUnderSeed) {
    auto cfg = MlpConfig{};
    cfg.epochs = 20;
    cfg.seed = 12;
    const auto a = train(separable_toy(), cfg);
    const auto b = train(separable_toy(), cfg);
    EXPECT_EQ(a.first, b.first);
    for (std::size_t i = 0; i < a.second.epochs.size(); ++i) {
        EXPECT_EQ(a.second.epochs[i].train_loss, b.second.epochs[i].train_loss);
        EXPECT_EQ(a.second.epochs[i].val_loss, b.second.epochs[i].val_loss);
    }
}

TEST(Train, Errors) {
    EXPECT_THROW(train(Dataset{}, MlpConfig{}), std::invalid_argument);
    Dataset wide{Eigen::MatrixXd::Zero(3, 6), {0, 1, 0}};
    EXPECT_THROW(train(wide, MlpConfig{}), std::invalid_argument);
    Dataset ragged{Eigen::MatrixXd::Zero(3, 5), {0, 1}};
    EXPECT_THROW(train(ragged, MlpConfig{}), std::invalid_argument);
}

TEST(ModelFile, RoundTripIsExact) {
    auto cfg = MlpConfig{};
    cfg.seed = 4;
    cfg.normalize = true;
    const MlpModel m(cfg, 4);
    std::stringstream io;
    save_model(m, io);
    const auto back = load_model(io);
    EXPECT_EQ(back, m);
    EXPECT_EQ(back.config().hidden, cfg.hidden);
    EXPECT_TRUE(back.config().normalize);
    EXPECT_EQ(back.config().seed, 4u);
}

TEST(ModelFile, Errors) {
    const MlpModel m(tiny_config(), 2);
    std::stringstream io;
    save_model(m, io);
    const std::string text = io.str();

    auto kind = [](const std::string& s) {
        std::istringstream in(s);
        try {
            load_model(in);
        } catch (const ParseError& e) {
            return e.kind();
        }
        ADD_FAILURE() << "loaded";
        return ParseErrorKind::Header;
    };
    EXPECT_EQ(kind("lite-mlp v2\n" + text.substr(text.find('\n') + 1)), ParseErrorKind::Version);
    EXPECT_EQ(kind("garbage"), ParseErrorKind::Version);
    EXPECT_EQ(kind(text.substr(0, text.size() / 2)), ParseErrorKind::Truncated);

    std::string poisoned = text;
    const auto layer = poisoned.find("layer 3 5\n") + 10;
    poisoned.replace(layer, poisoned.find(' ', layer) - layer, "nan");
    EXPECT_EQ(kind(poisoned), ParseErrorKind::NonFinite);
}

TEST(MatrixFiles, RoundTrip) {
    Eigen::MatrixXd x(3, 5);
    x << 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 1023, 0, 512, 480, 333;
    std::stringstream io;
    write_matrix_csv(x, io);
    EXPECT_EQ(read_matrix_csv(io), x);
    std::stringstream labels;
    write_labels_csv({0, 3, 1}, labels);
    EXPECT_EQ(read_labels_csv(labels), (std::vector<int>{0, 3, 1}));
    std::istringstream bad("1,2,3\n");
    EXPECT_THROW(read_matrix_csv(bad), ParseError);
    std::istringstream neg("-1\n");
    EXPECT_THROW(read_labels_csv(neg), ParseError);
}
