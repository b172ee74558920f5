#include "fano/profiles.hpp"

#include <cmath>
#include <stdexcept>

namespace fano::profiles {

double generalized_profile(const EffectiveFano& ef, double omega_L) {
  if (!(ef.gamma_eff > 0.0)) {
    throw std::invalid_argument("generalized_profile: gamma_eff must be > 0");
  }
  const double eps_eff = (omega_L - ef.omega_eff) / ef.gamma_eff;
  return ef.C * (fano(eps_eff, ef.q_eff) + ef.D / (eps_eff * eps_eff + 1.0));
}

EffectiveFano effective_params_population(const model::ModelParams& params) {
  model::require_valid(params);
  if (params.Gamma_e != 0.0 || params.gamma_eg != 0.0) {
    throw std::invalid_argument(
        "effective_params_population: closed form requires Gamma_e = 0 and gamma_eg = 0; "
        "use the discretized solver plus profile fit for the general case");
  }

  const double q = params.q;
  const double W2 = params.Omega * params.Omega;  // Omega^2
  const double Gc = params.Gamma_c;
  const double denom = 2.0 * W2 + Gc;

  EffectiveFano ef;
  ef.gamma_eff =
      Gc * std::sqrt(1.0 + (q * q + 1.0) * W2 * (W2 * ((2.0 * W2 + 4.0) / Gc + 1.0) + 2.0 / Gc + 2.0)) /
      denom;
  ef.omega_eff = params.omega_e + q * W2 * (1.0 - 2.0 / denom);
  ef.q_eff = q * (Gc / denom) / ef.gamma_eff;
  ef.C = 2.0 * W2 / denom;
  ef.D = 0.0;
  return ef;
}

EffectiveFano effective_params_photocurrent(const model::ModelParams& params) {
  // The scattering limit is analytic in Gamma_c -> 0, so a vanishing
  // Gamma_c is acceptable here even though population observables reject it.
  for (const auto& v : model::validate(params)) {
    if (v.field != "Gamma_c") {
      throw std::invalid_argument("effective_params_photocurrent: " + v.message());
    }
  }

  const double q = params.q;
  const double W2 = params.Omega * params.Omega;
  const double Ge = params.Gamma_e;
  const double geg = params.gamma_eg;
  const double u = 1.0 + Ge;
  const double w = Ge + geg + 1.0;

  EffectiveFano ef;
  ef.gamma_eff = std::sqrt(W2 * W2 * Ge * (q * q + Ge + 1.0) +
                           W2 * u * (q * q + 2.0 * Ge + 1.0) * w + u * u * w * w) /
                 u;
  const double g2 = ef.gamma_eff * ef.gamma_eff;
  ef.D = (W2 * W2 * Ge * (q * q + Ge + 1.0) + W2 * u * (q * q + 2.0 * Ge + 1.0) * (Ge + geg)) /
             (g2 * u * u) +
         (Ge * Ge * Ge + Ge * Ge +
          geg * (2.0 * Ge * Ge + Ge * geg + q * q + 2.0 * Ge + geg + 1.0)) /
             (g2 * u);
  ef.omega_eff = params.omega_e + q * W2 / u;
  ef.q_eff = 1.0 / ef.gamma_eff;
  ef.C = 2.0 * W2;
  return ef;
}

double photocurrent(const model::ModelParams& params, double omega_L) {
  return generalized_profile(effective_params_photocurrent(params), omega_L);
}

std::optional<double> eit_rabi(double eps, double q) {
  if (q == 0.0) {
    throw std::invalid_argument("eit_rabi: q must be nonzero");
  }
  const double radicand = 1.0 + eps / q;
  if (radicand < 0.0) return std::nullopt;
  return std::sqrt(radicand);
}

std::optional<double> stark_null(double Gamma_c) {
  if (!(Gamma_c > 0.0)) {
    throw std::invalid_argument("stark_null: Gamma_c must be > 0");
  }
  if (Gamma_c >= 2.0) return std::nullopt;
  return std::sqrt((2.0 - Gamma_c) / 2.0);
}

}  // namespace fano::profiles
