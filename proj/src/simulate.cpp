#include "lite/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <stdexcept>
#include <string>

#include "lite/errors.hpp"

namespace lite::sim {

double refractive_index(double c_vacuum, double c_medium) {
    if (!(c_vacuum > 0.0) || !(c_medium > 0.0))
        throw std::invalid_argument("speeds of light must be positive");
    if (c_medium > c_vacuum) throw std::invalid_argument("light cannot travel faster than in vacuum");
    return c_vacuum / c_medium;
}

double critical_angle(double n_medium, double n_cladding) {
    if (!(n_cladding > 0.0)) throw std::invalid_argument("cladding index must be positive");
    const double ratio = n_cladding / n_medium;
    if (!(ratio < 1.0))
        throw std::invalid_argument("no total internal reflection: cladding index must be below medium index");
    return std::asin(ratio) * 180.0 / std::numbers::pi;
}

void FiberOptics::validate() const {
    if (!(n_medium > n_cladding && n_cladding > 0.0))
        throw std::invalid_argument("fiber needs n_medium > n_cladding > 0");
}

Intensity transmitted_intensity(double deflection_mm, double attenuation_per_mm, double i_relax) {
    if (!(deflection_mm >= 0.0)) throw std::invalid_argument("deflection must be non-negative");
    if (!(attenuation_per_mm >= 0.0)) throw std::invalid_argument("attenuation must be non-negative");
    if (!(i_relax >= 0.0 && i_relax <= kMaxIntensity))
        throw std::invalid_argument("relax intensity outside [0, 1023]");
    const double v = std::round(i_relax * std::exp(-attenuation_per_mm * deflection_mm));
    return static_cast<Intensity>(std::clamp(v, 0.0, double(kMaxIntensity)));
}

double attenuation_for(double i_relax, double i_target, double deflection_mm) {
    if (!(i_relax > 0.0 && i_target > 0.0 && i_target <= i_relax && deflection_mm > 0.0))
        throw std::invalid_argument("attenuation needs 0 < target <= relax and positive deflection");
    return -std::log(i_target / i_relax) / deflection_mm;
}

void GestureProfile::validate() const {
    if (gesture != GestureLabel::Extend && gesture != GestureLabel::Fist && gesture != GestureLabel::One)
        throw std::invalid_argument("profiles exist only for extend, fist and one");
    bool any = false;
    for (double d : delta) {
        if (!std::isfinite(d)) throw std::invalid_argument("profile delta must be finite");
        any = any || d != 0.0;
    }
    if (!any) throw std::invalid_argument(std::string(to_string(gesture)) + " profile has no nonzero delta");
}

std::vector<GestureProfile> profiles_from_table(const SignatureTable& table) {
    std::vector<GestureProfile> out;
    for (auto g : table.gestures()) {
        GestureProfile p{g, {}};
        for (int s = 1; s <= int(kChannels); ++s) p.delta[s - 1] = table.find(g, s).value_or(0.0);
        p.validate();
        out.push_back(p);
    }
    return out;
}

SignatureTable table_from_profiles(const std::vector<GestureProfile>& profiles) {
    SignatureTable table;
    for (const auto& p : profiles)
        for (int s = 1; s <= int(kChannels); ++s) table.set(p.gesture, s, p.delta[s - 1]);
    return table;
}

std::vector<GestureProfile> default_profiles() {
    return {
        {GestureLabel::Extend, {-12.0, -140.0, -180.0, -223.0, -18.0}},
        {GestureLabel::Fist, {-20.0, -260.0, -135.0, -150.0, -25.0}},
        {GestureLabel::One, {-8.0, -130.0, -270.0, -170.0, -60.0}},
    };
}

void SimConfig::validate() const {
    for (double d : {sample_interval, gesture_hold, relax_hold, transition_time})
        if (!(d > 0.0) || !std::isfinite(d)) throw std::invalid_argument("simulation durations must be positive");
    if (!(noise_sigma >= 0.0)) throw std::invalid_argument("noise sigma must be non-negative");
    if (!(drift >= 0.0)) throw std::invalid_argument("drift sigma must be non-negative");
    for (double b : relax_levels)
        if (!(b > 0.0 && b < kMaxIntensity)) throw std::invalid_argument("relax levels must lie in (0, 1023)");
}

std::vector<GestureLabel> read_script(std::istream& source) {
    std::vector<GestureLabel> script;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(source, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        try {
            script.push_back(parse_label(line));
        } catch (const ParseError& e) {
            throw e.at_line(line_no);
        }
    }
    return script;
}

namespace {

std::size_t samples_for(double seconds, double interval) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(seconds / interval)));
}

} // namespace

LabeledTrace synth_trace(const std::vector<GestureLabel>& script,
                         const std::vector<GestureProfile>& profiles, const SimConfig& cfg,
                         std::mt19937_64& rng) {
    cfg.validate();
    std::vector<const GestureProfile*> steps;
    for (auto g : script) {
        auto it = std::find_if(profiles.begin(), profiles.end(), [g](const auto& p) { return p.gesture == g; });
        if (it == profiles.end()) throw Error("no profile for scripted gesture " + std::string(to_string(g)));
        it->validate();
        for (std::size_t c = 0; c < kChannels; ++c) {
            const double v = cfg.relax_levels[c] + it->delta[c];
            if (v < 0.0 || v > kMaxIntensity)
                throw Error(std::string(to_string(g)) + " plateau on sensor " + std::to_string(c + 1) +
                            " leaves [0, 1023]");
        }
        steps.push_back(&*it);
    }

    const std::size_t relax_n = samples_for(cfg.relax_hold, cfg.sample_interval);
    const std::size_t ramp_n = samples_for(cfg.transition_time, cfg.sample_interval);
    const std::size_t hold_n = samples_for(cfg.gesture_hold, cfg.sample_interval);

    std::normal_distribution<double> unit(0.0, 1.0);
    auto level = cfg.relax_levels;

    LabeledTrace trace;
    trace.sample_interval = cfg.sample_interval;
    auto emit = [&](const std::array<double, kChannels>& offset, GestureLabel label) {
        SensorFrame f;
        f.t_rel = double(trace.size()) * cfg.sample_interval;
        f.t_unix = cfg.t_unix_start + f.t_rel;
        for (std::size_t c = 0; c < kChannels; ++c) {
            if (cfg.drift > 0.0) level[c] += cfg.drift * unit(rng);
            double v = level[c] + offset[c];
            if (cfg.noise_sigma > 0.0) v += cfg.noise_sigma * unit(rng);
            f.channels[c] = static_cast<Intensity>(std::clamp(std::round(v), 0.0, double(kMaxIntensity)));
        }
        trace.push_back(f, label);
    };
    auto scaled = [](const GestureProfile& p, double fraction) {
        std::array<double, kChannels> out{};
        for (std::size_t c = 0; c < kChannels; ++c) out[c] = fraction * p.delta[c];
        return out;
    };

    const std::array<double, kChannels> zero{};
    for (const auto* p : steps) {
        for (std::size_t i = 0; i < relax_n; ++i) emit(zero, GestureLabel::Relax);
        for (std::size_t i = 1; i <= ramp_n; ++i)
            emit(scaled(*p, double(i) / double(ramp_n + 1)), GestureLabel::Transition);
        for (std::size_t i = 0; i < hold_n; ++i) emit(p->delta, p->gesture);
        for (std::size_t i = 1; i <= ramp_n; ++i)
            emit(scaled(*p, 1.0 - double(i) / double(ramp_n + 1)), GestureLabel::Transition);
    }
    for (std::size_t i = 0; i < relax_n; ++i) emit(zero, GestureLabel::Relax);
    return trace;
}

LabeledTrace synth_trace(const std::vector<GestureLabel>& script,
                         const std::vector<GestureProfile>& profiles, const SimConfig& cfg) {
    std::mt19937_64 rng(cfg.seed);
    return synth_trace(script, profiles, cfg, rng);
}

} // namespace lite::sim
