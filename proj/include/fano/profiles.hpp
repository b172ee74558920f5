#pragma once

#include <optional>

#include "fano/model.hpp"

namespace fano::profiles {

/// Parameters of the generalized lineshape
///   n_c(omega_L) = C * [ f(eps_eff; q_eff) + D / (eps_eff^2 + 1) ],
/// with eps_eff = (omega_L - omega_eff) / gamma_eff.
struct EffectiveFano {
  double C = 0.0;          // amplitude, >= 0
  double D = 0.0;          // Lorentzian weight, >= 0
  double q_eff = 0.0;
  double gamma_eff = 1.0;  // width, > 0, units of gamma
  double omega_eff = 0.0;  // center, units of gamma
};

/// Classic asymmetric profile (q + eps)^2 / (eps^2 + 1).
template <typename Scalar>
Scalar fano(Scalar eps, Scalar q) {
  const Scalar a = q + eps;
  return a * a / (eps * eps + Scalar(1));
}

double generalized_profile(const EffectiveFano& ef, double omega_L);

/// Closed-form effective parameters of the continuum population profile.
/// Valid only for Gamma_e = 0 and gamma_eg = 0; other values throw
/// std::invalid_argument directing the caller to the oracle + fit path.
EffectiveFano effective_params_population(const model::ModelParams& params);

/// Closed-form effective parameters of the photocurrent profile
/// (Gamma_c -> 0 scattering limit); Gamma_e and gamma_eg arbitrary.
EffectiveFano effective_params_photocurrent(const model::ModelParams& params);

/// Steady-state photocurrent in units of |e|*gamma.
double photocurrent(const model::ModelParams& params, double omega_L);

/// Rabi frequency at which the profile has an exact transparency zero at
/// detuning eps: Omega = sqrt(1 + eps/q); nullopt when the radicand is
/// negative. q = 0 is rejected.
std::optional<double> eit_rabi(double eps, double q);

/// Rabi frequency at which the field-induced line shift vanishes:
/// Omega = sqrt((2 - Gamma_c)/2) for Gamma_c < 2, nullopt for Gamma_c >= 2
/// (the shift is then positive at every field strength).
std::optional<double> stark_null(double Gamma_c);

}  // namespace fano::profiles
