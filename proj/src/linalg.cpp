#include "fano/linalg.hpp"

#include <Eigen/Dense>

#include <sstream>

namespace fano::linalg {

namespace {

void require_finite(const ComplexMatrix& m, const char* who) {
  if (!m.allFinite()) {
    std::ostringstream os;
    os << who << ": matrix has non-finite entries";
    throw std::invalid_argument(os.str());
  }
}

}  // namespace

NullspaceResult nullspace(const ComplexMatrix& m, double tol) {
  require_finite(m, "nullspace");
  if (!(tol > 0.0 && tol < 1.0)) {
    throw std::invalid_argument("nullspace: tol must lie in (0, 1)");
  }

  Eigen::JacobiSVD<ComplexMatrix> svd(m, Eigen::ComputeFullV);
  const RealVector& sv = svd.singularValues();

  NullspaceResult out;
  // JacobiSVD pads with zero singular values only up to min(rows, cols);
  // columns of V beyond that are exact nullspace directions.
  const Eigen::Index cols = m.cols();
  const Eigen::Index nsv = sv.size();
  out.singular_values = RealVector::Zero(cols);
  out.singular_values.head(nsv) = sv;

  const double cutoff = nsv > 0 ? tol * sv(0) : 0.0;
  for (Eigen::Index j = 0; j < cols; ++j) {
    const double s = j < nsv ? sv(j) : 0.0;
    if (s <= cutoff) {
      out.basis.push_back(svd.matrixV().col(j));
    }
  }
  return out;
}

ComplexVector solve_with_trace_constraint(const ComplexMatrix& l,
                                          const std::vector<Eigen::Index>& trace_indices,
                                          double trace_value) {
  require_finite(l, "solve_with_trace_constraint");
  if (l.rows() != l.cols()) {
    throw std::invalid_argument("solve_with_trace_constraint: matrix must be square");
  }
  const Eigen::Index d = l.rows();
  if (trace_indices.empty()) {
    throw std::invalid_argument("solve_with_trace_constraint: no trace indices");
  }
  for (Eigen::Index idx : trace_indices) {
    if (idx < 0 || idx >= d) {
      throw std::invalid_argument("solve_with_trace_constraint: trace index out of range");
    }
  }

  ComplexMatrix a = l;
  const Eigen::Index replaced = trace_indices.front();
  a.row(replaced).setZero();
  for (Eigen::Index idx : trace_indices) {
    a(replaced, idx) = Complex(1.0, 0.0);
  }
  ComplexVector rhs = ComplexVector::Zero(d);
  rhs(replaced) = Complex(trace_value, 0.0);

  Eigen::PartialPivLU<ComplexMatrix> lu(a);
  ComplexVector x = lu.solve(rhs);

  // Verify the solution actually solves L x = 0 on the untouched rows;
  // a large residual means the augmented system was (near-)singular.
  const double l_norm = l.cwiseAbs().maxCoeff();
  const double x_norm = x.cwiseAbs().maxCoeff();
  ComplexVector residual = l * x;
  residual(replaced) = Complex(0.0, 0.0);
  const double res = residual.cwiseAbs().maxCoeff();
  if (!x.allFinite() || res > 1e-8 * l_norm * x_norm) {
    std::ostringstream os;
    os << "solve_with_trace_constraint: degenerate steady state (residual " << res << ")";
    if (d <= 512) {
      const NullspaceResult ns = nullspace(l, 1e-10);
      os << ", kernel dimension " << ns.basis.size();
    }
    throw numerical_error(os.str());
  }
  return x;
}

RealVector hermitian_eigenvalues(const ComplexMatrix& m) {
  require_finite(m, "hermitian_eigenvalues");
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("hermitian_eigenvalues: matrix must be square");
  }
  const double scale = m.cwiseAbs().maxCoeff();
  const double asym = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (scale > 0.0 && asym > 1e-12 * scale) {
    std::ostringstream os;
    os << "hermitian_eigenvalues: input not Hermitian (max asymmetry " << asym
       << ", relative " << asym / scale << ")";
    throw std::invalid_argument(os.str());
  }

  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues();  // ascending
}

}  // namespace fano::linalg
