#include "lite/types.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>
#include <string>

#include "lite/errors.hpp"

namespace lite {

namespace {

std::string_view trim(std::string_view s) {
    auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() &&
           std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               return std::tolower(static_cast<unsigned char>(x)) ==
                      std::tolower(static_cast<unsigned char>(y));
           });
}

} // namespace

Intensity checked_intensity(long long value) {
    if (value < 0 || value > kMaxIntensity)
        throw std::out_of_range("intensity " + std::to_string(value) + " outside [0, 1023]");
    return static_cast<Intensity>(value);
}

GestureLabel label_from_index(std::size_t index) {
    if (index >= kLabelCount)
        throw std::out_of_range("class index " + std::to_string(index) + " has no label");
    return kAllLabels[index];
}

std::string_view to_string(GestureLabel label) {
    switch (label) {
    case GestureLabel::Relax: return "relax";
    case GestureLabel::Extend: return "extend";
    case GestureLabel::Fist: return "fist";
    case GestureLabel::One: return "one";
    case GestureLabel::Transition: return "transition";
    }
    return "?";
}

GestureLabel parse_label(std::string_view text) {
    const auto token = trim(text);
    for (auto label : kAllLabels)
        if (iequals(token, to_string(label))) return label;
    throw ParseError(ParseErrorKind::UnknownLabel, "unknown label '" + std::string(token) + "'");
}

void LabeledTrace::validate() const {
    if (frames.size() != labels.size())
        throw Error("trace has " + std::to_string(frames.size()) + " frames but " +
                    std::to_string(labels.size()) + " labels");
    if (!(sample_interval > 0.0) || !std::isfinite(sample_interval))
        throw Error("sample interval must be positive");
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const auto& f = frames[i];
        if (!(f.t_rel >= 0.0) || !std::isfinite(f.t_rel))
            throw Error("frame " + std::to_string(i) + ": negative or non-finite t_rel");
        for (auto c : f.channels)
            if (c > kMaxIntensity)
                throw Error("frame " + std::to_string(i) + ": channel value outside [0, 1023]");
        if (i == 0) continue;
        const double gap = f.t_rel - frames[i - 1].t_rel;
        if (!(gap > 0.0))
            throw Error("frame " + std::to_string(i) + ": t_rel not strictly increasing");
        if (gap < 0.5 * sample_interval || gap > 1.5 * sample_interval)
            throw Error("frame " + std::to_string(i) + ": gap " + std::to_string(gap) +
                        " s outside 50% of the sample interval");
    }
}

bool same_content(const LabeledTrace& a, const LabeledTrace& b) {
    return a.frames == b.frames && a.labels == b.labels;
}

std::vector<Segment> segment_labels(const std::vector<GestureLabel>& labels) {
    if (labels.empty()) throw Error("cannot segment an empty trace");
    std::vector<Segment> runs;
    std::size_t start = 0;
    for (std::size_t i = 1; i <= labels.size(); ++i) {
        if (i == labels.size() || labels[i] != labels[start]) {
            runs.push_back({labels[start], start, i});
            start = i;
        }
    }
    return runs;
}

std::vector<Segment> segment_trace(const LabeledTrace& trace) { return segment_labels(trace.labels); }

} // namespace lite
