#pragma once

#include <vector>

#include "fano/effective.hpp"
#include "fano/model.hpp"
#include "fano/types.hpp"

namespace fano::oracle {

/// Uniform N-state surrogate for the continuum over
/// [omega_e - W + offset, omega_e + W + offset]. Couplings enforce
/// n*pi*V^2 = gamma = 1 exactly: V_i = sqrt(delta/pi) with delta the
/// grid spacing, and the per-state field coupling is Omega*sqrt(delta/pi).
struct DiscretizedModel {
  RealVector energies;        // N energies, units of gamma
  RealVector v_coupling;      // V_i, discrete-continuum
  RealVector field_coupling;  // Omega_i, ground-continuum drive
  int N = 0;
  double W = 0.0;
  double delta = 0.0;
};

/// Exact steady state of the discretized model, unit total trace.
struct FullSteadyState {
  effective::DiscreteBlock block;  // g,e sector of the unit-trace state
  double n_c = 0.0;                // total continuum population
  RealVector k_populations;        // rho_{k_i k_i}
  ComplexMatrix rho;               // full matrix when materialized, else 0x0
};

struct ConvergeResult {
  double n_c = 0.0;
  int N_used = 0;
  double W_used = 0.0;
  bool converged = false;
  // One row per refinement: {N, W, n_c}.
  std::vector<std::tuple<int, double, double>> trace;
};

/// Grid resolution floor: at least 5 states per unit linewidth and W >= 10.
bool meets_resolution_floor(int N, double W);

/// Builds the uniform grid. Preconditions N >= 2, W > 0; when enforce_floor
/// is set (the default for production use) the resolution floor is required
/// as well. grid_offset shifts all energies (grid-placement robustness
/// checks).
DiscretizedModel discretize(const model::ModelParams& params, int N, double W,
                            bool enforce_floor = true, double grid_offset = 0.0);

/// Full rotating-frame Lindblad generator over the (N+2)^2 density-matrix
/// components, assembled generically from the Hamiltonian, the jump
/// operators k_i -> g (Gamma_c) and e -> g (Gamma_e), and the pure
/// dephasings gamma_eg, gamma_kg, gamma_ke. Row-major component order:
/// element (i, j) of rho lives at index i*(N+2) + j, with basis
/// {g, e, k_1..k_N}.
SparseComplexMatrix build_full_liouvillian(const DiscretizedModel& dm,
                                           const model::ModelParams& params, double omega_L);

/// Kernel of the full generator, unit total trace. Dense solve; intended
/// for moderate N (dimension (N+2)^2). Throws numerical_error on a
/// degenerate kernel.
FullSteadyState steady_state(const SparseComplexMatrix& superop);

/// Same steady state through exact elimination of the continuum-continuum
/// block (whose equations are diagonal in itself), leaving a dense system
/// over the 4 + 4N discrete and single-continuum components. Identical to
/// steady_state() up to roundoff, usable up to N of a few thousand.
FullSteadyState solve_steady(const DiscretizedModel& dm, const model::ModelParams& params,
                             double omega_L, bool materialize_full = false);

/// Doubles N (and W, when population has reached the grid edge) until the
/// continuum population is stable to rel_tol. Starts from (N, W) = (200, 20).
/// Throws numerical_error with the refinement trace on non-convergence.
ConvergeResult converge(const model::ModelParams& params, double omega_L, double rel_tol);

/// No-throw variant: result carries converged = false on failure.
ConvergeResult converge_try(const model::ModelParams& params, double omega_L, double rel_tol);

}  // namespace fano::oracle
