#pragma once

#include <array>
#include <deque>

#include "lite/types.hpp"

namespace lite {

struct BaselineConfig {
    double alpha = 0.2;   ///< EWMA weight of the newest reading, in (0, 1]
    double window = 4.0;  ///< seconds of smoothed history the maximum is taken over

    /// Throws std::invalid_argument when a field is out of range.
    void validate() const;
};

using ChannelValues = std::array<double, kChannels>;

/// (1 - alpha) * prev + alpha * x. Throws std::invalid_argument unless 0 < alpha <= 1.
double ewma_step(double prev, double x, double alpha);

/// Streaming relax-baseline estimate: per channel, the maximum EWMA value whose timestamp
/// lies in (now - window, now]. Single owner; not safe for concurrent updates.
class BaselineTracker {
public:
    explicit BaselineTracker(BaselineConfig cfg = {});

    /// Advances every channel by one frame and returns the per-channel baselines.
    /// The first frame seeds the EWMA with the raw reading.
    /// Throws lite::Error if frame.t_rel is earlier than the previous frame.
    ChannelValues update(const SensorFrame& frame);

    const ChannelValues& smoothed() const noexcept { return smoothed_; }
    const ChannelValues& baseline() const noexcept { return baseline_; }
    const BaselineConfig& config() const noexcept { return cfg_; }
    bool started() const noexcept { return started_; }

    /// Entries currently held for a channel (monotonic, so at most the window population).
    std::size_t buffered(std::size_t channel) const { return windows_.at(channel).size(); }

    void reset();

private:
    struct Entry {
        double t;
        double value;
    };

    BaselineConfig cfg_;
    bool started_ = false;
    double last_t_ = 0.0;
    ChannelValues smoothed_{};
    ChannelValues baseline_{};
    // Values are non-increasing front to back; the front is the window maximum.
    std::array<std::deque<Entry>, kChannels> windows_;
};

} // namespace lite
