#pragma once

#include <deque>
#include <iosfwd>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "lite/baseline.hpp"
#include "lite/types.hpp"

namespace lite {

/// 1-based sensor indices.
using SensorSet = std::vector<int>;

inline SensorSet default_active_sensors() { return {2, 3, 4}; }

/// Mean intensity change from the relax baseline per (gesture, sensor). Negative = dip.
class SignatureTable {
public:
    explicit SignatureTable(SensorSet active = default_active_sensors());

    const SensorSet& active_sensors() const noexcept { return active_; }
    void set_active_sensors(SensorSet active);

    /// Throws std::invalid_argument for a non-gesture label, a sensor outside 1..5,
    /// or a non-finite delta.
    void set(GestureLabel gesture, int sensor, double delta);
    std::optional<double> find(GestureLabel gesture, int sensor) const;
    /// Throws lite::Error when the entry is absent.
    double at(GestureLabel gesture, int sensor) const;

    /// Gestures with at least one entry, in EXTEND, FIST, ONE order.
    std::vector<GestureLabel> gestures() const;
    const std::map<std::pair<GestureLabel, int>, double>& entries() const noexcept { return entries_; }

    /// Every active sensor has an entry for every gesture present; throws lite::Error otherwise.
    void validate() const;

    friend bool operator==(const SignatureTable&, const SignatureTable&) = default;

private:
    SensorSet active_;
    std::map<std::pair<GestureLabel, int>, double> entries_;
};

/// `gesture,sensor,delta` CSV, one row per entry, full-precision deltas.
void write_signature_csv(const SignatureTable& table, std::ostream& sink);
/// Stores every row in the file; `active` names the sensors the classifier will use.
SignatureTable read_signature_csv(std::istream& source, SensorSet active = default_active_sensors());

struct SignatureOptions {
    SensorSet active = default_active_sensors();
    std::vector<GestureLabel> gestures{kGestures.begin(), kGestures.end()};
    std::size_t min_segment_frames = 5;
};

/// Averages (gesture-segment mean - preceding relax-segment mean) over every
/// RELAX -> [TRANSITION] -> gesture adjacency in the traces.
/// Throws lite::Error when a gesture has no pair or a used segment is too short.
SignatureTable generate_signatures(const std::vector<LabeledTrace>& traces, const SignatureOptions& opts = {});

struct ClassifierConfig {
    double tolerance = 0.10;             ///< relative to |signature|
    std::size_t transition_horizon = 10; ///< readings
    double absolute_floor = 0.0;         ///< optional minimum tolerance in intensity units; 0 = off

    void validate() const;
};

/// Raw-label history for transition smoothing. Single owner.
class ClassifierState {
public:
    explicit ClassifierState(ClassifierConfig cfg = {});

    const ClassifierConfig& config() const noexcept { return cfg_; }
    const std::deque<GestureLabel>& recent_labels() const noexcept { return recent_; }
    std::optional<GestureLabel> last_raw() const;

    /// Records `raw` and returns TRANSITION if it differs from any label in the history.
    GestureLabel observe(GestureLabel raw);

private:
    ClassifierConfig cfg_;
    std::deque<GestureLabel> recent_;
};

/// Raw label before transition smoothing: the matching gesture with the lowest mean
/// relative error, or RELAX when nothing matches on every active sensor.
GestureLabel match_gesture(const SensorFrame& frame, const ChannelValues& baselines,
                           const SignatureTable& table, const ClassifierConfig& cfg);

GestureLabel classify_frame(const SensorFrame& frame, const ChannelValues& baselines,
                            const SignatureTable& table, ClassifierState& state);

std::vector<GestureLabel> classify_trace(const LabeledTrace& trace, const SignatureTable& table,
                                         const BaselineConfig& baseline_cfg = {},
                                         const ClassifierConfig& classifier_cfg = {});

} // namespace lite
