#include "fano/effective.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace fano::effective {

namespace {
constexpr Eigen::Index kGG = 0;
constexpr Eigen::Index kGE = 1;
constexpr Eigen::Index kEG = 2;
constexpr Eigen::Index kEE = 3;
}  // namespace

ComplexMatrix build_effective_liouvillian(const model::ModelParams& params,
                                          const model::Detuning& eps) {
  model::require_valid(params);

  const double q = params.q;
  const double W = params.Omega;
  const double decay = 2.0 + params.Gamma_e;                      // e -> g population rate
  const double deph = 0.5 * decay + params.gamma_eg + W * W;      // total ge decoherence

  ComplexMatrix l = ComplexMatrix::Zero(4, 4);

  // d rho_gg/dt = -i q W (rho_eg - rho_ge) + W (rho_eg + rho_ge) + decay * rho_ee
  l(kGG, kGE) = Complex(W, q * W);
  l(kGG, kEG) = Complex(W, -q * W);
  l(kGG, kEE) = Complex(decay, 0.0);

  // d rho_ee/dt is the exact negation (discrete trace conservation).
  l.row(kEE) = -l.row(kGG);

  // d rho_ge/dt = -i eps rho_ge + i(q+i) W rho_gg - i(q-i) W rho_ee - deph * rho_ge
  l(kGE, kGG) = Complex(-W, q * W);
  l(kGE, kEE) = Complex(-W, -q * W);
  l(kGE, kGE) = Complex(-deph, -eps.epsilon);

  // d rho_eg/dt: conjugate row.
  l(kEG, kGG) = std::conj(l(kGE, kGG));
  l(kEG, kEE) = std::conj(l(kGE, kEE));
  l(kEG, kEG) = std::conj(l(kGE, kGE));

  return l;
}

DiscreteBlock discrete_steady_state(const ComplexMatrix& l_eff) {
  if (l_eff.rows() != 4 || l_eff.cols() != 4) {
    throw std::invalid_argument("discrete_steady_state: expected a 4x4 generator");
  }
  const linalg::NullspaceResult ns = linalg::nullspace(l_eff, 1e-10);
  if (ns.basis.size() != 1) {
    std::ostringstream os;
    os << "discrete_steady_state: degenerate steady state (kernel dimension "
       << ns.basis.size() << ")";
    throw numerical_error(os.str());
  }

  ComplexVector v = ns.basis.front();
  const Complex trace = v(kGG) + v(kEE);
  if (std::abs(trace) < 1e-12) {
    throw numerical_error("discrete_steady_state: kernel vector has vanishing discrete trace");
  }
  v /= trace;

  const double imag_leak = std::max(std::abs(v(kGG).imag()), std::abs(v(kEE).imag()));
  const double herm_leak = std::abs(v(kEG) - std::conj(v(kGE)));
  if (imag_leak > 1e-9 || herm_leak > 1e-9) {
    std::ostringstream os;
    os << "discrete_steady_state: kernel is not a Hermitian state (imag " << imag_leak
       << ", conj mismatch " << herm_leak << ")";
    throw numerical_error(os.str());
  }

  DiscreteBlock block;
  block.rho_gg = v(kGG).real();
  block.rho_ee = v(kEE).real();
  block.rho_ge = v(kGE);
  block.rho_eg = v(kEG);
  return block;
}

double continuum_readout(const model::ModelParams& params, const DiscreteBlock& block) {
  model::require_valid(params);
  const double W = params.Omega;
  const double feed = 2.0 * block.rho_ee + 2.0 * W * W * block.rho_gg +
                      4.0 * W * block.rho_eg.real();
  const double scale =
      2.0 * std::abs(block.rho_ee) + 2.0 * W * W * std::abs(block.rho_gg) +
      4.0 * W * std::abs(block.rho_eg.real());
  if (feed < -1e-12 * scale - 1e-300) {
    std::ostringstream os;
    os << "continuum_readout: negative feeding rate " << feed
       << " (wrong interference sign convention)";
    throw numerical_error(os.str());
  }
  return std::max(feed, 0.0) / params.Gamma_c;
}

SteadyState normalize(const model::ModelParams& params, const DiscreteBlock& block,
                      double n_c_unnormalized) {
  (void)params;
  if (!(n_c_unnormalized >= 0.0) || !std::isfinite(n_c_unnormalized)) {
    throw std::invalid_argument("normalize: n_c_unnormalized must be finite and >= 0");
  }
  const double s = 1.0 / (1.0 + n_c_unnormalized);
  SteadyState out;
  out.block.rho_gg = block.rho_gg * s;
  out.block.rho_ee = block.rho_ee * s;
  out.block.rho_ge = block.rho_ge * s;
  out.block.rho_eg = block.rho_eg * s;
  out.n_c = n_c_unnormalized * s;
  return out;
}

SteadyState solve(const model::ModelParams& params, double omega_L) {
  const ComplexMatrix l = build_effective_liouvillian(params, model::epsilon_of(params, omega_L));
  const DiscreteBlock block = discrete_steady_state(l);
  const double n_c_un = continuum_readout(params, block);
  return normalize(params, block, n_c_un);
}

LindbladCheck lindblad_check(const model::ModelParams& params) {
  model::require_valid(params);

  LindbladCheck out;
  out.c1 = params.Omega * params.Omega + params.gamma_eg;
  out.c2 = params.Omega;
  out.c3 = 1.0 + params.Gamma_e;

  ComplexMatrix c(3, 3);
  c << Complex(out.c3, 0), Complex(0, out.c3), Complex(out.c2, 0),
       Complex(0, -out.c3), Complex(out.c3, 0), Complex(0, -out.c2),
       Complex(out.c2, 0), Complex(0, out.c2), Complex(out.c1, 0);
  out.c_matrix = c;
  out.eigenvalues = linalg::hermitian_eigenvalues(c);
  out.is_psd = out.eigenvalues.minCoeff() >= -1e-12;
  return out;
}

}  // namespace fano::effective
