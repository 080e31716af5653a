#include "lite/baseline.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "lite/errors.hpp"

namespace lite {

void BaselineConfig::validate() const {
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw std::invalid_argument("alpha must lie in (0, 1], got " + std::to_string(alpha));
    if (!(window > 0.0) || !std::isfinite(window))
        throw std::invalid_argument("baseline window must be positive, got " + std::to_string(window));
}

double ewma_step(double prev, double x, double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw std::invalid_argument("alpha must lie in (0, 1], got " + std::to_string(alpha));
    return (1.0 - alpha) * prev + alpha * x;
}

BaselineTracker::BaselineTracker(BaselineConfig cfg) : cfg_(cfg) { cfg_.validate(); }

void BaselineTracker::reset() {
    started_ = false;
    last_t_ = 0.0;
    smoothed_ = {};
    baseline_ = {};
    for (auto& w : windows_) w.clear();
}

ChannelValues BaselineTracker::update(const SensorFrame& frame) {
    if (started_ && frame.t_rel < last_t_)
        throw Error("non-monotonic timestamp: " + std::to_string(frame.t_rel) + " after " +
                    std::to_string(last_t_));

    const double horizon = frame.t_rel - cfg_.window;
    for (std::size_t c = 0; c < kChannels; ++c) {
        const double x = frame.channels[c];
        smoothed_[c] = started_ ? ewma_step(smoothed_[c], x, cfg_.alpha) : x;

        auto& w = windows_[c];
        while (!w.empty() && w.back().value <= smoothed_[c]) w.pop_back();
        w.push_back({frame.t_rel, smoothed_[c]});
        while (w.front().t <= horizon) w.pop_front();
        baseline_[c] = w.front().value;
    }
    started_ = true;
    last_t_ = frame.t_rel;
    return baseline_;
}

} // namespace lite
