#pragma once

#include "fano/linalg.hpp"
#include "fano/model.hpp"
#include "fano/types.hpp"

namespace fano::effective {

/// Discrete-sector density matrix, ordered (rho_gg, rho_ge, rho_eg, rho_ee)
/// when vectorized.
struct DiscreteBlock {
  double rho_gg = 1.0;
  double rho_ee = 0.0;
  Complex rho_ge{0.0, 0.0};
  Complex rho_eg{0.0, 0.0};
};

/// Globally normalized steady state: rho_gg + rho_ee + n_c = 1.
struct SteadyState {
  DiscreteBlock block;
  double n_c = 0.0;
};

/// Certificate that the dissipative part of the effective generator has a
/// completely positive (Lindblad) representation: the 3x3 coefficient
/// matrix in the traceless-Hermitian operator basis must be PSD.
struct LindbladCheck {
  double c1 = 0.0;  // Omega^2 + gamma_eg
  double c2 = 0.0;  // Omega
  double c3 = 0.0;  // 1 + Gamma_e
  ComplexMatrix c_matrix;   // 3x3 Hermitian
  RealVector eigenvalues;   // ascending
  bool is_psd = false;
};

/// Generator of rotating-frame evolution for v = (rho_gg, rho_ge, rho_eg,
/// rho_ee): effective Hamiltonian with complex coupling (q - i)*Omega and
/// detuning -eps on |e><e|, population decay at rate 2 + Gamma_e, extra
/// coherence dephasing Omega^2 + gamma_eg, and the non-Lindblad feed
/// 2*Omega*(rho_eg + rho_ge) into rho_gg. Rows gg and ee sum to zero
/// exactly (discrete trace conservation).
ComplexMatrix build_effective_liouvillian(const model::ModelParams& params,
                                          const model::Detuning& eps);

/// One-dimensional kernel of the 4x4 generator, normalized to unit
/// discrete trace. Throws numerical_error if the kernel is degenerate.
DiscreteBlock discrete_steady_state(const ComplexMatrix& l_eff);

/// Unnormalized continuum population n_c = Phi / Gamma_c, where
/// Phi = 2*rho_ee + 2*Omega^2*rho_gg + 4*Omega*Re(rho_eg) is the feeding
/// rate of the continuum (golden-rule fluxes of the two excitation
/// pathways plus their interference). Requires a unit-discrete-trace block.
double continuum_readout(const model::ModelParams& params, const DiscreteBlock& block);

/// Rescales everything by 1/(1 + n_c_unnormalized) so that the total trace
/// including the continuum equals one.
SteadyState normalize(const model::ModelParams& params, const DiscreteBlock& block,
                      double n_c_unnormalized);

/// Convenience: full chain generator -> kernel -> readout -> normalize.
SteadyState solve(const model::ModelParams& params, double omega_L);

LindbladCheck lindblad_check(const model::ModelParams& params);

}  // namespace fano::effective
