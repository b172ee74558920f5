#pragma once

#include <array>
#include <utility>
#include <vector>

#include "fano/profiles.hpp"

namespace fano::fit {

enum class ProfileKind { population, photocurrent };

/// Sampled lineshape; omega_L strictly increasing, values >= 0, at least 7
/// points (5 fit parameters + 2).
struct ProfileSamples {
  std::vector<std::pair<double, double>> points;  // (omega_L, value)
  ProfileKind kind = ProfileKind::population;
};

/// Parameter order used by covariance_diag: (C, D, q_eff, gamma_eff, omega_eff).
struct FitResult {
  profiles::EffectiveFano params;
  double rms_residual = 0.0;               // RMS(residual) / RMS(values)
  std::array<double, 5> covariance_diag{};  // variance estimates
  int iterations = 0;
};

void validate_samples(const ProfileSamples& samples);

/// Starting point from profile geometry: center from the peak, width from
/// the half-maximum crossings, asymmetry from the zero/minimum position,
/// amplitude from the tail level. Featureless samples raise numerical_error.
profiles::EffectiveFano initial_guess(const ProfileSamples& samples);

/// Damped least squares on (C, D, q_eff, gamma_eff, omega_eff) with analytic
/// derivatives; gamma_eff > 0 via log parameterization, D clamped >= 0.
/// Internally refits with the asymmetry parameter switched to 1/q_eff when
/// the guess indicates |q_eff| > 20 (bounded conditioning near the
/// Lorentzian limit), and tries both signs of q_eff when the samples do not
/// bracket an interior minimum.
FitResult fit_profile(const ProfileSamples& samples, const profiles::EffectiveFano& guess);

/// initial_guess + fit_profile in one call.
FitResult fit_profile_auto(const ProfileSamples& samples);

}  // namespace fano::fit
