#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <vector>

#include "lite/signature.hpp"
#include "lite/types.hpp"

namespace lite::sim {

inline constexpr double kAtmosphereIndex = 1.000350;

/// n = c_vacuum / c_medium. Throws std::invalid_argument for non-positive speeds or
/// c_medium > c_vacuum.
double refractive_index(double c_vacuum, double c_medium);

/// Total-internal-reflection threshold arcsin(n_cladding / n_medium), in degrees.
/// Throws std::invalid_argument unless n_medium > n_cladding > 0.
double critical_angle(double n_medium, double n_cladding = kAtmosphereIndex);

struct FiberOptics {
    double n_medium = 1.444;
    double n_cladding = kAtmosphereIndex;

    void validate() const;
    double critical_angle_deg() const { return critical_angle(n_medium, n_cladding); }
};

/// Exponential bend loss: round(i_relax * exp(-k * deflection)) clipped to [0, 1023].
/// Throws std::invalid_argument for negative deflection or attenuation, or i_relax outside [0, 1023].
Intensity transmitted_intensity(double deflection_mm, double attenuation_per_mm, double i_relax);

/// Attenuation that turns `i_relax` into `i_target` at `deflection_mm` of bend.
double attenuation_for(double i_relax, double i_target, double deflection_mm = 1.0);

struct GestureProfile {
    GestureLabel gesture = GestureLabel::Extend;
    std::array<double, kChannels> delta{}; ///< steady-state offset from the relax level

    void validate() const;
};

/// Profiles and signature tables share the `gesture,sensor,delta` schema; sensors
/// missing from the table get a zero delta.
std::vector<GestureProfile> profiles_from_table(const SignatureTable& table);
SignatureTable table_from_profiles(const std::vector<GestureProfile>& profiles);

/// Simulator calibration used by the bundled data files: sensors 2-4 carry the
/// gesture, with the sensor-4/EXTEND dip fixed at -223. The other values are
/// chosen for the simulation, not measured.
std::vector<GestureProfile> default_profiles();

struct SimConfig {
    double sample_interval = kDefaultSampleInterval;
    double gesture_hold = 5.0;
    double relax_hold = 2.0;
    double transition_time = 0.2;
    double noise_sigma = 2.0;
    double drift = 0.05; ///< random-walk step sigma per sample
    std::array<double, kChannels> relax_levels{420.0, 760.0, 690.0, 800.0, 930.0};
    double t_unix_start = 1577836800.0;
    std::uint64_t seed = 1;

    void validate() const;
};

/// One gesture name per line; blank lines and `#` comments ignored.
std::vector<GestureLabel> read_script(std::istream& source);

/// Layout per scripted gesture: relax_hold RELAX, ramp TRANSITION, gesture_hold plateau,
/// ramp TRANSITION; a final relax_hold closes the trace. Relax levels follow a Gaussian
/// random walk, readings get Gaussian noise, then round and clip to [0, 1023].
LabeledTrace synth_trace(const std::vector<GestureLabel>& script,
                         const std::vector<GestureProfile>& profiles, const SimConfig& cfg,
                         std::mt19937_64& rng);

/// Same, drawing from a generator seeded with cfg.seed.
LabeledTrace synth_trace(const std::vector<GestureLabel>& script,
                         const std::vector<GestureProfile>& profiles, const SimConfig& cfg);

} // namespace lite::sim
