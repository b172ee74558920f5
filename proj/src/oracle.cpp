#include "fano/oracle.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseLU>

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "fano/linalg.hpp"

namespace fano::oracle {

namespace {

constexpr int kConvergeStartN = 200;
constexpr double kConvergeStartW = 20.0;
constexpr int kConvergeMaxDoublings = 6;
constexpr int kConvergeMaxN = 3200;
constexpr double kEdgeFraction = 1e-6;

effective::DiscreteBlock extract_block(const Complex& gg, const Complex& ge, const Complex& eg,
                                       const Complex& ee) {
  effective::DiscreteBlock block;
  block.rho_gg = gg.real();
  block.rho_ee = ee.real();
  block.rho_ge = ge;
  block.rho_eg = eg;
  return block;
}

}  // namespace

bool meets_resolution_floor(int N, double W) {
  return W >= 10.0 && static_cast<double>(N) / (2.0 * W) >= 5.0;
}

DiscretizedModel discretize(const model::ModelParams& params, int N, double W,
                            bool enforce_floor, double grid_offset) {
  model::require_valid(params);
  if (N < 2) throw std::invalid_argument("discretize: N must be >= 2");
  if (!(W > 0.0)) throw std::invalid_argument("discretize: W must be > 0");
  if (enforce_floor && !meets_resolution_floor(N, W)) {
    std::ostringstream os;
    os << "discretize: resolution floor violated (need W >= 10 and N/(2W) >= 5, got N=" << N
       << ", W=" << W << ")";
    throw std::invalid_argument(os.str());
  }

  DiscretizedModel dm;
  dm.N = N;
  dm.W = W;
  dm.delta = 2.0 * W / static_cast<double>(N - 1);
  dm.energies = RealVector::LinSpaced(N, params.omega_e - W, params.omega_e + W);
  dm.energies.array() += grid_offset;
  const double per_state = std::sqrt(dm.delta / std::numbers::pi);
  dm.v_coupling = RealVector::Constant(N, per_state);
  dm.field_coupling = RealVector::Constant(N, params.Omega * per_state);
  return dm;
}

SparseComplexMatrix build_full_liouvillian(const DiscretizedModel& dm,
                                           const model::ModelParams& params, double omega_L) {
  model::require_valid(params);
  const int N = dm.N;
  const int n_states = N + 2;
  const Eigen::Index dim = static_cast<Eigen::Index>(n_states) * n_states;
  const auto at = [n_states](int i, int j) {
    return static_cast<Eigen::Index>(i) * n_states + j;
  };
  constexpr int kG = 0;
  constexpr int kE = 1;

  // Rotating-frame Hamiltonian: diagonal detunings, real couplings.
  std::vector<Eigen::Triplet<Complex>> h_trip;
  h_trip.reserve(4 * N + 4);
  h_trip.emplace_back(kE, kE, Complex(params.omega_e - omega_L, 0.0));
  h_trip.emplace_back(kG, kE, Complex(params.q * params.Omega, 0.0));
  h_trip.emplace_back(kE, kG, Complex(params.q * params.Omega, 0.0));
  for (int j = 0; j < N; ++j) {
    const int kj = 2 + j;
    h_trip.emplace_back(kj, kj, Complex(dm.energies(j) - omega_L, 0.0));
    h_trip.emplace_back(kG, kj, Complex(dm.field_coupling(j), 0.0));
    h_trip.emplace_back(kj, kG, Complex(dm.field_coupling(j), 0.0));
    h_trip.emplace_back(kE, kj, Complex(dm.v_coupling(j), 0.0));
    h_trip.emplace_back(kj, kE, Complex(dm.v_coupling(j), 0.0));
  }
  SparseComplexMatrix h(n_states, n_states);
  h.setFromTriplets(h_trip.begin(), h_trip.end());

  std::vector<Eigen::Triplet<Complex>> trip;
  trip.reserve(static_cast<std::size_t>(dim) * 8);

  // Commutator: d rho_ij/dt += -i (H_im rho_mj - rho_im H_mj).
  for (int outer = 0; outer < h.outerSize(); ++outer) {
    for (SparseComplexMatrix::InnerIterator it(h, outer); it; ++it) {
      const int i = static_cast<int>(it.row());
      const int m = static_cast<int>(it.col());
      const Complex v = it.value();
      for (int j = 0; j < n_states; ++j) {
        trip.emplace_back(at(i, j), at(m, j), -kI * v);  // H rho
        trip.emplace_back(at(j, m), at(j, i), kI * v);   // rho H
      }
    }
  }

  // Jump dissipator D[|g><a|] at rate r: feeds rho_gg from rho_aa and damps
  // every coherence involving a at r/2.
  const auto add_jump_to_ground = [&](int a, double r) {
    if (r == 0.0) return;
    trip.emplace_back(at(kG, kG), at(a, a), Complex(r, 0.0));
    for (int j = 0; j < n_states; ++j) {
      trip.emplace_back(at(a, j), at(a, j), Complex(-0.5 * r, 0.0));
      trip.emplace_back(at(j, a), at(j, a), Complex(-0.5 * r, 0.0));
    }
  };
  add_jump_to_ground(kE, params.Gamma_e);
  for (int j = 0; j < N; ++j) add_jump_to_ground(2 + j, params.Gamma_c);

  // Pure dephasing on the (a, b) and (b, a) coherences.
  const auto add_dephasing = [&](int a, int b, double r) {
    if (r == 0.0) return;
    trip.emplace_back(at(a, b), at(a, b), Complex(-r, 0.0));
    trip.emplace_back(at(b, a), at(b, a), Complex(-r, 0.0));
  };
  add_dephasing(kE, kG, params.gamma_eg);
  for (int j = 0; j < N; ++j) {
    add_dephasing(2 + j, kG, params.gamma_kg);
    add_dephasing(2 + j, kE, params.gamma_ke);
  }

  SparseComplexMatrix l(dim, dim);
  l.setFromTriplets(trip.begin(), trip.end());
  return l;
}

FullSteadyState steady_state(const SparseComplexMatrix& superop) {
  const Eigen::Index dim = superop.rows();
  const int n_states = static_cast<int>(std::lround(std::sqrt(static_cast<double>(dim))));
  if (static_cast<Eigen::Index>(n_states) * n_states != dim || n_states < 3) {
    throw std::invalid_argument("steady_state: dimension is not a valid (N+2)^2");
  }
  const int N = n_states - 2;

  std::vector<Eigen::Index> trace_indices;
  trace_indices.reserve(n_states);
  for (int i = 0; i < n_states; ++i) {
    trace_indices.push_back(static_cast<Eigen::Index>(i) * n_states + i);
  }

  ComplexVector x;
  if (dim <= 4200) {
    x = linalg::solve_with_trace_constraint(ComplexMatrix(superop), trace_indices, 1.0);
  } else {
    SparseComplexMatrix a = superop;
    // Replace the rho_gg row with the trace constraint.
    a.prune([&](const Eigen::Index& row, const Eigen::Index&, const Complex&) {
      return row != trace_indices.front();
    });
    std::vector<Eigen::Triplet<Complex>> extra;
    extra.reserve(n_states);
    for (Eigen::Index idx : trace_indices) {
      extra.emplace_back(trace_indices.front(), idx, Complex(1.0, 0.0));
    }
    SparseComplexMatrix constraint(dim, dim);
    constraint.setFromTriplets(extra.begin(), extra.end());
    a += constraint;
    a.makeCompressed();

    Eigen::SparseLU<SparseComplexMatrix> lu(a);
    if (lu.info() != Eigen::Success) {
      throw numerical_error("steady_state: sparse factorization failed (degenerate kernel?)");
    }
    ComplexVector rhs = ComplexVector::Zero(dim);
    rhs(trace_indices.front()) = Complex(1.0, 0.0);
    x = lu.solve(rhs);
    if (!x.allFinite()) {
      throw numerical_error("steady_state: sparse solve produced non-finite state");
    }
  }

  FullSteadyState out;
  out.rho = Eigen::Map<const ComplexMatrix>(x.data(), n_states, n_states).transpose();
  out.block = extract_block(out.rho(0, 0), out.rho(0, 1), out.rho(1, 0), out.rho(1, 1));
  out.k_populations = RealVector(N);
  for (int j = 0; j < N; ++j) out.k_populations(j) = out.rho(2 + j, 2 + j).real();
  out.n_c = out.k_populations.sum();
  return out;
}

FullSteadyState solve_steady(const DiscretizedModel& dm, const model::ModelParams& params,
                             double omega_L, bool materialize_full) {
  model::require_valid(params);
  const int N = dm.N;
  const Eigen::Index dim = 4 + 4 * static_cast<Eigen::Index>(N);
  const double g_e = params.q * params.Omega;
  const double g = params.Omega * std::sqrt(dm.delta / std::numbers::pi);
  const double V = std::sqrt(dm.delta / std::numbers::pi);
  const double Gc = params.Gamma_c;
  const double half_ke = 0.5 * (params.Gamma_e + Gc) + params.gamma_ke;
  const double half_kg = 0.5 * Gc + params.gamma_kg;
  const double deph_ge = 0.5 * params.Gamma_e + params.gamma_eg;
  const double delta_e = params.omega_e - omega_L;

  // Component layout: [gg, ge, eg, ee, u(0..N), v, s, t] with
  // u_j = rho_{g k_j}, v_j = rho_{k_j g}, s_j = rho_{e k_j}, t_j = rho_{k_j e}.
  constexpr Eigen::Index kGG = 0, kGE = 1, kEG = 2, kEE = 3;
  const Eigen::Index oU = 4, oV = 4 + N, oS = 4 + 2 * N, oT = 4 + 3 * N;

  // Resolvent of the eliminated continuum-continuum block:
  // Dinv(j, m) = 1 / (i(e_m - e_j) + Gamma_c).
  ComplexMatrix dinv(N, N);
  for (int j = 0; j < N; ++j) {
    for (int m = 0; m < N; ++m) {
      dinv(j, m) = 1.0 / Complex(Gc, dm.energies(m) - dm.energies(j));
    }
  }
  const ComplexVector k_sum = dinv.rowwise().sum();

  ComplexMatrix a = ComplexMatrix::Zero(dim, dim);

  // Trace over the full state, with the continuum populations expressed
  // through the eliminated block: rho_gg + rho_ee + sum_j w_jj = 1.
  a(kGG, kGG) = 1.0;
  a(kGG, kEE) = 1.0;
  for (int j = 0; j < N; ++j) {
    a(kGG, oS + j) = -kI * V / Gc;
    a(kGG, oU + j) = -kI * g / Gc;
    a(kGG, oT + j) = kI * V / Gc;
    a(kGG, oV + j) = kI * g / Gc;
  }

  a(kGE, kGE) = Complex(-deph_ge, delta_e);
  a(kGE, kGG) = kI * g_e;
  a(kGE, kEE) = -kI * g_e;
  a(kEG, kEG) = Complex(-deph_ge, -delta_e);
  a(kEG, kGG) = -kI * g_e;
  a(kEG, kEE) = kI * g_e;

  a(kEE, kGE) = -kI * g_e;
  a(kEE, kEG) = kI * g_e;
  a(kEE, kEE) = Complex(-params.Gamma_e, 0.0);

  for (int j = 0; j < N; ++j) {
    a(kGE, oT + j) = -kI * g;
    a(kGE, oU + j) = kI * V;
    a(kEG, oS + j) = kI * g;
    a(kEG, oV + j) = -kI * V;
    a(kEE, oT + j) = -kI * V;
    a(kEE, oS + j) = kI * V;
  }

  for (int j = 0; j < N; ++j) {
    const double dj = dm.energies(j) - omega_L;
    const Complex kj = k_sum(j);

    a(oU + j, kGG) = kI * g;
    a(oU + j, kGE) = kI * V;
    a(oU + j, oS + j) += -kI * g_e - g * V * kj;
    a(oU + j, oU + j) += Complex(-half_kg, dj) - g * g * kj;

    a(oV + j, kGG) = -kI * g;
    a(oV + j, kEG) = -kI * V;
    a(oV + j, oT + j) += kI * g_e - g * V * std::conj(kj);
    a(oV + j, oV + j) += Complex(-half_kg, -dj) - g * g * std::conj(kj);

    a(oS + j, kEG) = kI * g;
    a(oS + j, kEE) = kI * V;
    a(oS + j, oU + j) += -kI * g_e - g * V * kj;
    a(oS + j, oS + j) += Complex(-half_ke, dm.energies(j) - params.omega_e) - V * V * kj;

    a(oT + j, kGE) = -kI * g;
    a(oT + j, kEE) = -kI * V;
    a(oT + j, oV + j) += kI * g_e - g * V * std::conj(kj);
    a(oT + j, oT + j) += Complex(-half_ke, params.omega_e - dm.energies(j)) - V * V * std::conj(kj);
  }

  // Dense couplings produced by the elimination.
  a.block(oU, oT, N, N) += g * V * dinv;
  a.block(oU, oV, N, N) += g * g * dinv;
  a.block(oS, oT, N, N) += V * V * dinv;
  a.block(oS, oV, N, N) += g * V * dinv;
  a.block(oV, oS, N, N) += g * V * dinv.conjugate();
  a.block(oV, oU, N, N) += g * g * dinv.conjugate();
  a.block(oT, oS, N, N) += V * V * dinv.conjugate();
  a.block(oT, oU, N, N) += g * V * dinv.conjugate();

  ComplexVector rhs = ComplexVector::Zero(dim);
  rhs(kGG) = 1.0;

  Eigen::PartialPivLU<Eigen::Ref<ComplexMatrix>> lu(a);
  const ComplexVector x = lu.solve(rhs);
  if (!x.allFinite()) {
    throw numerical_error("solve_steady: non-finite steady state (degenerate kernel?)");
  }

  FullSteadyState out;
  out.block = extract_block(x(kGG), x(kGE), x(kEG), x(kEE));
  out.k_populations = RealVector(N);
  for (int j = 0; j < N; ++j) {
    // Slaved diagonal: w_jj = -i (V s_j + g u_j - V t_j - g v_j) / Gamma_c.
    const Complex w =
        -kI * (V * x(oS + j) + g * x(oU + j) - V * x(oT + j) - g * x(oV + j)) / Gc;
    out.k_populations(j) = w.real();
  }
  out.n_c = out.k_populations.sum();

  const double trace_residual = std::abs(out.block.rho_gg + out.block.rho_ee + out.n_c - 1.0);
  if (trace_residual > 1e-8) {
    std::ostringstream os;
    os << "solve_steady: trace residual " << trace_residual << " (ill-conditioned solve)";
    throw numerical_error(os.str());
  }

  if (materialize_full) {
    const int n_states = N + 2;
    out.rho = ComplexMatrix(n_states, n_states);
    out.rho(0, 0) = x(kGG);
    out.rho(0, 1) = x(kGE);
    out.rho(1, 0) = x(kEG);
    out.rho(1, 1) = x(kEE);
    for (int j = 0; j < N; ++j) {
      out.rho(0, 2 + j) = x(oU + j);
      out.rho(2 + j, 0) = x(oV + j);
      out.rho(1, 2 + j) = x(oS + j);
      out.rho(2 + j, 1) = x(oT + j);
    }
    for (int i = 0; i < N; ++i) {
      for (int j = 0; j < N; ++j) {
        out.rho(2 + i, 2 + j) =
            -kI * (V * x(oS + j) + g * x(oU + j) - V * x(oT + i) - g * x(oV + i)) /
            Complex(Gc, dm.energies(i) - dm.energies(j));
      }
    }
  }
  return out;
}

ConvergeResult converge_try(const model::ModelParams& params, double omega_L, double rel_tol) {
  if (!(rel_tol > 1e-8 && rel_tol < 0.1)) {
    throw std::invalid_argument("converge: rel_tol must lie in (1e-8, 0.1)");
  }
  model::require_valid(params);

  ConvergeResult result;
  int N = kConvergeStartN;
  double W = kConvergeStartW;

  DiscretizedModel dm = discretize(params, N, W);
  FullSteadyState st = solve_steady(dm, params, omega_L);
  result.trace.emplace_back(N, W, st.n_c);

  for (int step = 0; step < kConvergeMaxDoublings; ++step) {
    const double edge = std::max(std::abs(st.k_populations(0)),
                                 std::abs(st.k_populations(st.k_populations.size() - 1)));
    const bool widen = edge > kEdgeFraction * std::abs(st.n_c);
    const int next_N = 2 * N;
    const double next_W = widen ? 2.0 * W : W;
    if (next_N > kConvergeMaxN) break;

    dm = discretize(params, next_N, next_W);
    const FullSteadyState refined = solve_steady(dm, params, omega_L);
    result.trace.emplace_back(next_N, next_W, refined.n_c);

    const double change = std::abs(refined.n_c - st.n_c);
    N = next_N;
    W = next_W;
    st = refined;
    if (change <= rel_tol * (std::abs(refined.n_c) + 1e-15)) {
      result.converged = true;
      break;
    }
  }

  result.n_c = st.n_c;
  result.N_used = N;
  result.W_used = W;
  return result;
}

ConvergeResult converge(const model::ModelParams& params, double omega_L, double rel_tol) {
  ConvergeResult r = converge_try(params, omega_L, rel_tol);
  if (!r.converged) {
    std::ostringstream os;
    os << "converge: continuum population not stable to " << rel_tol << " after refinements [";
    for (const auto& [n, w, nc] : r.trace) {
      os << " (N=" << n << ", W=" << w << ", n_c=" << nc << ")";
    }
    os << " ]";
    throw numerical_error(os.str());
  }
  return r;
}

}  // namespace fano::oracle
