#include "fano/model.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace fano::model {

namespace {

void reject(const std::string& field, const std::string& why) {
  throw std::invalid_argument("dimensionless_from_physical: " + field + " " + why);
}

void check_physical(const PhysicalParams& p) {
  const auto finite = [](double x) { return std::isfinite(x); };
  if (!finite(p.mu_e) || !finite(p.mu_c) || !finite(p.V) || !finite(p.n) || !finite(p.F) ||
      !finite(p.E_0) || !finite(p.E_e) || !finite(p.Gamma_e_phys) || !finite(p.Gamma_c_phys) ||
      !finite(p.gamma_eg_phys) || !finite(p.gamma_kg_phys) || !finite(p.gamma_ke_phys) ||
      !finite(p.hbar)) {
    reject("params", "contain non-finite values");
  }
  if (!(p.n > 0.0)) reject("n", "must be > 0 (zero density of states)");
  if (p.V == 0.0) reject("V", "must be nonzero");
  if (p.mu_c == 0.0)
    reject("mu_c", "must be nonzero (take the mu_c -> 0 limit as q -> inf with q*Omega fixed)");
  if (p.F < 0.0) reject("F", "must be >= 0");
  if (!(p.hbar > 0.0)) reject("hbar", "must be > 0");
  if (p.Gamma_e_phys < 0.0) reject("Gamma_e_phys", "must be >= 0");
  if (p.Gamma_c_phys < 0.0) reject("Gamma_c_phys", "must be >= 0");
  if (p.gamma_eg_phys < 0.0) reject("gamma_eg_phys", "must be >= 0");
  if (p.gamma_kg_phys < 0.0) reject("gamma_kg_phys", "must be >= 0");
  if (p.gamma_ke_phys < 0.0) reject("gamma_ke_phys", "must be >= 0");
}

}  // namespace

ModelParams dimensionless_from_physical(const PhysicalParams& p) {
  check_physical(p);
  const double pi = std::numbers::pi;
  const double gamma = p.n * pi * p.V * p.V / p.hbar;  // 1/time

  ModelParams m;
  m.q = p.mu_e / (p.n * pi * p.V * p.mu_c);
  m.Omega = p.mu_c * p.F / (2.0 * p.V);
  m.Gamma_c = p.Gamma_c_phys / gamma;
  m.Gamma_e = p.Gamma_e_phys / gamma;
  m.gamma_eg = p.gamma_eg_phys / gamma;
  m.gamma_kg = p.gamma_kg_phys / gamma;
  m.gamma_ke = p.gamma_ke_phys / gamma;
  m.omega_e = (p.E_e - p.E_0) / (p.hbar * gamma);
  return m;
}

Detuning epsilon_of(const ModelParams& params, double omega_L) {
  return Detuning{omega_L - params.omega_e};
}

std::vector<Violation> validate(const ModelParams& params) {
  std::vector<Violation> out;
  const auto flag = [&out](const std::string& field, double value, const std::string& rule) {
    out.push_back(Violation{field, value, rule});
  };

  if (!std::isfinite(params.q)) flag("q", params.q, "must be finite");
  if (!std::isfinite(params.omega_e)) flag("omega_e", params.omega_e, "must be finite");
  if (!(params.Omega >= 0.0)) flag("Omega", params.Omega, "must be >= 0");
  if (!(params.Gamma_c > 0.0)) flag("Gamma_c", params.Gamma_c, "must be > 0");
  if (!(params.Gamma_e >= 0.0)) flag("Gamma_e", params.Gamma_e, "must be >= 0");
  if (!(params.gamma_eg >= 0.0)) flag("gamma_eg", params.gamma_eg, "must be >= 0");
  if (!(params.gamma_kg >= 0.0)) flag("gamma_kg", params.gamma_kg, "must be >= 0");
  if (!(params.gamma_ke >= 0.0)) flag("gamma_ke", params.gamma_ke, "must be >= 0");
  return out;
}

void require_valid(const ModelParams& params) {
  const auto violations = validate(params);
  if (violations.empty()) return;
  std::ostringstream os;
  os << "invalid model parameters:";
  for (const auto& v : violations) os << " [" << v.message() << "]";
  throw std::invalid_argument(os.str());
}

}  // namespace fano::model
