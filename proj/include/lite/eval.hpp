#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lite/types.hpp"

namespace lite::eval {

/// Rows: truth RELAX, EXTEND, FIST, ONE. Columns: the same four predictions plus a
/// final column for frames predicted TRANSITION. Truth-TRANSITION frames are never counted.
class ConfusionMatrix {
public:
    static constexpr int kRows = 4;
    static constexpr int kCols = 5;
    static constexpr int kTransitionColumn = 4;
    using Counts = Eigen::Matrix<std::int64_t, kRows, kCols>;

    ConfusionMatrix() : counts_(Counts::Zero()) {}

    void add(GestureLabel truth, GestureLabel pred, std::int64_t n = 1);

    const Counts& counts() const noexcept { return counts_; }
    std::int64_t count(GestureLabel truth, GestureLabel pred) const;
    std::int64_t total() const { return counts_.sum(); }
    std::int64_t correct() const { return counts_.leftCols<kRows>().trace(); }
    std::int64_t row_total(GestureLabel truth) const;

    friend bool operator==(const ConfusionMatrix& a, const ConfusionMatrix& b) {
        return a.counts_ == b.counts_;
    }

private:
    Counts counts_;
};

/// Throws lite::Error on a length mismatch.
ConfusionMatrix confusion(const std::vector<GestureLabel>& truth, const std::vector<GestureLabel>& pred);

/// Diagonal / total. Throws lite::Error for an empty matrix.
double accuracy(const ConfusionMatrix& m);

/// Percentage truncated (not rounded) to one decimal, e.g. 1492/1494 -> "99.8%".
std::string format_percent(double fraction);

std::string render_report(const ConfusionMatrix& m);

/// `truth,relax,extend,fist,one,transition` rows of raw counts.
void write_counts_csv(const ConfusionMatrix& m, std::ostream& sink);

} // namespace lite::eval
