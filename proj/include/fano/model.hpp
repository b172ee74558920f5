#pragma once

#include <string>
#include <vector>

namespace fano::model {

/// Laboratory-frame inputs. Energies are measured from E_0; rates are 1/time.
struct PhysicalParams {
  double mu_e = 0.0;      // ground-discrete transition dipole
  double mu_c = 0.0;      // ground-continuum transition dipole per sqrt(energy)
  double V = 0.0;         // discrete-continuum coupling, energy per sqrt(energy)
  double n = 0.0;         // continuum density of states, 1/energy
  double F = 0.0;         // field amplitude
  double E_0 = 0.0;       // ground energy
  double E_e = 0.0;       // discrete excited energy
  double Gamma_e_phys = 0.0;
  double Gamma_c_phys = 0.0;
  double gamma_eg_phys = 0.0;
  double gamma_kg_phys = 0.0;
  double gamma_ke_phys = 0.0;
  double hbar = 1.0;
};

/// Dimensionless model parameters; all rates and energies in units of the
/// continuum-induced linewidth gamma = n*pi*V^2/hbar.
struct ModelParams {
  double q = 0.0;         // asymmetry
  double Omega = 0.0;     // Rabi frequency
  double Gamma_c = 1.0;   // continuum -> ground relaxation
  double Gamma_e = 0.0;   // discrete -> ground relaxation
  double gamma_eg = 0.0;  // discrete-ground pure dephasing
  double omega_e = 0.0;   // discrete-state energy
  double gamma_kg = 0.0;  // continuum-ground dephasing (brute-force solver only)
  double gamma_ke = 0.0;  // continuum-discrete dephasing (brute-force solver only)
};

struct Detuning {
  double epsilon = 0.0;  // (omega_L - omega_e), dimensionless
};

struct Violation {
  std::string field;
  double value = 0.0;
  std::string rule;

  std::string message() const { return field + " " + rule; }
};

/// gamma = n*pi*V^2/hbar, q = mu_e/(n*pi*V*mu_c), Omega = mu_c*F/(2V);
/// rates divide by gamma, omega_e = (E_e - E_0)/(hbar*gamma).
/// Throws std::invalid_argument naming the offending field when the
/// conversion is ill-defined (n <= 0, V == 0, mu_c == 0, ...).
ModelParams dimensionless_from_physical(const PhysicalParams& p);

Detuning epsilon_of(const ModelParams& params, double omega_L);

/// Empty iff all ModelParams invariants hold; never throws.
std::vector<Violation> validate(const ModelParams& params);

/// Convenience: throws std::invalid_argument listing every violation.
void require_valid(const ModelParams& params);

}  // namespace fano::model
