#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace lite {

inline constexpr std::size_t kChannels = 5;
inline constexpr int kMaxIntensity = 1023;
inline constexpr double kDefaultSampleInterval = 0.02;

/// Scaled light intensity from the 10-bit ADC, 0..1023.
using Intensity = std::uint16_t;
using Channels = std::array<Intensity, kChannels>;

/// Throws std::out_of_range unless 0 <= value <= 1023.
Intensity checked_intensity(long long value);

struct SensorFrame {
    double t_rel = 0.0;   ///< seconds since trace start
    double t_unix = 0.0;  ///< absolute seconds; carried, never interpreted
    Channels channels{};

    friend bool operator==(const SensorFrame&, const SensorFrame&) = default;
};

/// Closed label set. The numeric value doubles as the class index.
enum class GestureLabel : std::uint8_t { Relax = 0, Extend = 1, Fist = 2, One = 3, Transition = 4 };

inline constexpr std::size_t kLabelCount = 5;
inline constexpr std::array<GestureLabel, kLabelCount> kAllLabels{
    GestureLabel::Relax, GestureLabel::Extend, GestureLabel::Fist, GestureLabel::One,
    GestureLabel::Transition};
inline constexpr std::array<GestureLabel, 3> kGestures{
    GestureLabel::Extend, GestureLabel::Fist, GestureLabel::One};

constexpr std::size_t class_index(GestureLabel label) { return static_cast<std::size_t>(label); }
GestureLabel label_from_index(std::size_t index);

/// Lower-case canonical name ("relax", "extend", ...).
std::string_view to_string(GestureLabel label);

/// Case-insensitive, whitespace-trimmed. Throws ParseError(UnknownLabel).
GestureLabel parse_label(std::string_view text);

struct LabeledTrace {
    std::vector<SensorFrame> frames;
    std::vector<GestureLabel> labels;
    double sample_interval = kDefaultSampleInterval;

    std::size_t size() const noexcept { return frames.size(); }
    bool empty() const noexcept { return frames.empty(); }

    void push_back(const SensorFrame& frame, GestureLabel label) {
        frames.push_back(frame);
        labels.push_back(label);
    }

    /// Checks the trace invariants; throws lite::Error describing the first violation.
    void validate() const;
};

/// Frames and labels equal element-wise; sample_interval is derived data and not compared.
bool same_content(const LabeledTrace& a, const LabeledTrace& b);

struct Segment {
    GestureLabel label;
    std::size_t start;
    std::size_t end; ///< exclusive

    std::size_t length() const noexcept { return end - start; }
    friend bool operator==(const Segment&, const Segment&) = default;
};

/// Maximal runs of identical labels, in order. Throws lite::Error on an empty trace.
std::vector<Segment> segment_labels(const std::vector<GestureLabel>& labels);
std::vector<Segment> segment_trace(const LabeledTrace& trace);

} // namespace lite
