#include "lite/eval.hpp"

#include <cmath>
#include <cstdio>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "lite/errors.hpp"

namespace lite::eval {

namespace {

int column_of(GestureLabel pred) {
    return pred == GestureLabel::Transition ? ConfusionMatrix::kTransitionColumn : int(class_index(pred));
}

constexpr std::array<std::string_view, ConfusionMatrix::kCols> kHeadings{"relax", "extend", "fist", "one",
                                                                         "transition"};

} // namespace

void ConfusionMatrix::add(GestureLabel truth, GestureLabel pred, std::int64_t n) {
    if (truth == GestureLabel::Transition) return;
    counts_(int(class_index(truth)), column_of(pred)) += n;
}

std::int64_t ConfusionMatrix::count(GestureLabel truth, GestureLabel pred) const {
    if (truth == GestureLabel::Transition) return 0;
    return counts_(int(class_index(truth)), column_of(pred));
}

std::int64_t ConfusionMatrix::row_total(GestureLabel truth) const {
    if (truth == GestureLabel::Transition) return 0;
    return counts_.row(int(class_index(truth))).sum();
}

ConfusionMatrix confusion(const std::vector<GestureLabel>& truth, const std::vector<GestureLabel>& pred) {
    if (truth.size() != pred.size())
        throw Error("truth has " + std::to_string(truth.size()) + " labels but prediction has " +
                    std::to_string(pred.size()));
    ConfusionMatrix m;
    for (std::size_t i = 0; i < truth.size(); ++i) m.add(truth[i], pred[i]);
    return m;
}

double accuracy(const ConfusionMatrix& m) {
    if (m.total() == 0) throw Error("accuracy of an empty confusion matrix");
    return double(m.correct()) / double(m.total());
}

std::string format_percent(double fraction) {
    // Small epsilon keeps exact decimals like 0.5 from truncating to 49.9.
    const double tenths = std::floor(fraction * 1000.0 + 1e-9);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f%%", tenths / 10.0);
    return buf;
}

std::string render_report(const ConfusionMatrix& m) {
    if (m.total() == 0) return "no scorable frames\n";
    constexpr int w = 11;
    std::ostringstream out;
    out << std::left << std::setw(w) << "truth\\pred" << std::right;
    for (auto h : kHeadings) out << std::setw(w) << h;
    out << std::setw(w) << "total" << '\n';
    for (int r = 0; r < ConfusionMatrix::kRows; ++r) {
        out << std::left << std::setw(w) << kHeadings[r] << std::right;
        for (int c = 0; c < ConfusionMatrix::kCols; ++c) out << std::setw(w) << m.counts()(r, c);
        out << std::setw(w) << m.counts().row(r).sum() << '\n';
    }
    out << "scored frames: " << m.total() << ", correct: " << m.correct() << '\n';
    out << "accuracy: " << format_percent(accuracy(m)) << '\n';
    return out.str();
}

void write_counts_csv(const ConfusionMatrix& m, std::ostream& sink) {
    sink << "truth";
    for (auto h : kHeadings) sink << ',' << h;
    sink << '\n';
    for (int r = 0; r < ConfusionMatrix::kRows; ++r) {
        sink << kHeadings[r];
        for (int c = 0; c < ConfusionMatrix::kCols; ++c) sink << ',' << m.counts()(r, c);
        sink << '\n';
    }
    if (!sink) throw Error("failed writing confusion counts");
}

} // namespace lite::eval
