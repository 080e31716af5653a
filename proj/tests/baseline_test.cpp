#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "lite/baseline.hpp"
#include "lite/errors.hpp"

using namespace lite;

namespace {

SensorFrame frame_at(double t, Intensity v) {
    SensorFrame f;
    f.t_rel = t;
    f.channels.fill(v);
    return f;
}

/// Independent recomputation: run the whole EWMA history, then scan every entry whose
/// timestamp lies in (t - window, t] for the maximum.
std::vector<ChannelValues> brute_force(const std::vector<SensorFrame>& frames, const BaselineConfig& cfg) {
    std::vector<ChannelValues> smoothed(frames.size());
    for (std::size_t i = 0; i < frames.size(); ++i)
        for (std::size_t c = 0; c < kChannels; ++c)
            smoothed[i][c] = i == 0 ? frames[i].channels[c]
                                    : (1.0 - cfg.alpha) * smoothed[i - 1][c] + cfg.alpha * frames[i].channels[c];
    std::vector<ChannelValues> out(frames.size());
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const double horizon = frames[i].t_rel - cfg.window;
        for (std::size_t c = 0; c < kChannels; ++c) {
            double best = -1.0;
            for (std::size_t j = 0; j <= i; ++j)
                if (frames[j].t_rel > horizon) best = std::max(best, smoothed[j][c]);
            out[i][c] = best;
        }
    }
    return out;
}

} // namespace

TEST(Ewma, Step) {
    EXPECT_DOUBLE_EQ(ewma_step(100.0, 200.0, 0.2), 120.0);
    EXPECT_DOUBLE_EQ(ewma_step(7.0, 42.0, 1.0), 42.0);
    for (double a : {0.01, 0.2, 0.5, 0.99}) EXPECT_DOUBLE_EQ(ewma_step(321.5, 321.5, a), 321.5);
    EXPECT_THROW(ewma_step(1, 2, 0.0), std::invalid_argument);
    EXPECT_THROW(ewma_step(1, 2, 1.5), std::invalid_argument);
}

TEST(BaselineConfig, Validate) {
    EXPECT_NO_THROW((BaselineConfig{0.2, 4.0}.validate()));
    EXPECT_NO_THROW((BaselineConfig{1.0, 4.0}.validate()));
    EXPECT_THROW((BaselineConfig{0.0, 4.0}.validate()), std::invalid_argument);
    EXPECT_THROW((BaselineConfig{0.2, 0.0}.validate()), std::invalid_argument);
    EXPECT_THROW(BaselineTracker(BaselineConfig{-1.0, 4.0}), std::invalid_argument);
}

TEST(BaselineTracker, FirstFrameInitializes) {
    BaselineTracker tracker;
    SensorFrame f;
    f.channels = {800, 700, 600, 500, 400};
    const auto b = tracker.update(f);
    for (std::size_t c = 0; c < kChannels; ++c) EXPECT_DOUBLE_EQ(b[c], f.channels[c]);
}

TEST(BaselineTracker, ConstantStreamIsFixedPoint) {
    BaselineTracker tracker;
    for (int i = 0; i < 400; ++i) {
        const auto b = tracker.update(frame_at(0.02 * i, 800));
        for (double v : b) ASSERT_DOUBLE_EQ(v, 800.0);
    }
}

TEST(BaselineTracker, StepDownDecaysAfterWindow) {
    const BaselineConfig cfg;
    std::vector<SensorFrame> frames;
    for (int i = 0; i < 700; ++i) frames.push_back(frame_at(0.02 * i, i < 200 ? 900 : 600));
    const auto expected = brute_force(frames, cfg);

    BaselineTracker tracker(cfg);
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const auto b = tracker.update(frames[i]);
        for (std::size_t c = 0; c < kChannels; ++c) ASSERT_EQ(b[c], expected[i][c]) << i;
    }
    // Pre-drop readings remain in the window for 4 s after the drop.
    BaselineTracker again(cfg);
    for (int i = 0; i < 399; ++i) {
        const auto b = again.update(frames[std::size_t(i)]);
        ASSERT_DOUBLE_EQ(b[0], 900.0) << i;
    }
    // Once everything in the window post-dates the drop the baseline follows the EWMA to 600.
    BaselineTracker last(cfg);
    ChannelValues b{};
    for (const auto& f : frames) b = last.update(f);
    EXPECT_NEAR(b[0], 600.0, 1e-9);
}

TEST(BaselineTracker, HalfOpenWindowBoundary) {
    BaselineTracker tracker(BaselineConfig{1.0, 1.0});
    tracker.update(frame_at(0.0, 900));
    EXPECT_DOUBLE_EQ(tracker.update(frame_at(0.5, 100))[0], 900.0);
    // Entry at t = 0 sits exactly on now - window and is evicted.
    EXPECT_DOUBLE_EQ(tracker.update(frame_at(1.0, 100))[0], 100.0);
}

TEST(BaselineTracker, RejectsTimeGoingBackwards) {
    BaselineTracker tracker;
    tracker.update(frame_at(1.0, 500));
    EXPECT_NO_THROW(tracker.update(frame_at(1.0, 500)));
    EXPECT_THROW(tracker.update(frame_at(0.98, 500)), Error);
}

TEST(BaselineTracker, MatchesBruteForceOracle) {
    std::mt19937_64 rng(42);
    std::uniform_int_distribution<int> value(0, 1023);
    std::uniform_real_distribution<double> gap(0.005, 0.05), alpha(0.01, 1.0), window(0.1, 6.0);
    for (int trial = 0; trial < 20; ++trial) {
        const BaselineConfig cfg{alpha(rng), window(rng)};
        std::vector<SensorFrame> frames;
        double t = 0.0;
        const int n = trial == 0 ? 10000 : 1500;
        for (int i = 0; i < n; ++i) {
            SensorFrame f;
            f.t_rel = t;
            for (auto& c : f.channels) c = Intensity(value(rng));
            frames.push_back(f);
            t += (i % 97 == 0) ? 0.0 : gap(rng);
        }
        const auto expected = brute_force(frames, cfg);
        BaselineTracker tracker(cfg);
        for (std::size_t i = 0; i < frames.size(); ++i) {
            const auto b = tracker.update(frames[i]);
            for (std::size_t c = 0; c < kChannels; ++c) {
                ASSERT_NEAR(b[c], expected[i][c], 1e-12) << "trial " << trial << " frame " << i;
                ASSERT_GE(b[c], tracker.smoothed()[c]);
            }
        }
    }
}

TEST(BaselineTracker, EqualsSmoothedWhenNonDecreasing) {
    BaselineTracker tracker;
    for (int i = 0; i < 300; ++i) {
        const auto b = tracker.update(frame_at(0.02 * i, Intensity(100 + 3 * i)));
        for (std::size_t c = 0; c < kChannels; ++c) ASSERT_DOUBLE_EQ(b[c], tracker.smoothed()[c]);
    }
}

TEST(BaselineTracker, ShortDipsNeverPullBaselineBelowRelaxPlateau) {
    std::mt19937 rng(7);
    std::uniform_int_distribution<int> level(500, 1000), depth(50, 400), dip_len(10, 150), relax_len(210, 400);
    for (int trial = 0; trial < 50; ++trial) {
        BaselineTracker tracker;
        double t = 0.0;
        auto feed = [&](Intensity v) {
            auto b = tracker.update(frame_at(t, v));
            t += 0.02;
            return b;
        };
        for (int cycle = 0; cycle < 6; ++cycle) {
            const auto relax = Intensity(level(rng));
            const int relax_n = relax_len(rng);
            for (int i = 0; i < relax_n; ++i) feed(relax);
            const double plateau_end = tracker.smoothed()[0];
            const auto dip = Intensity(std::max(0, int(relax) - depth(rng)));
            const int dip_n = dip_len(rng); // < 3 s, shorter than the 4 s window
            for (int i = 0; i < dip_n; ++i) {
                const auto b = feed(dip);
                ASSERT_GE(b[0], plateau_end - 1e-9) << "trial " << trial << " cycle " << cycle;
            }
        }
    }
}
