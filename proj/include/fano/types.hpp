#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <complex>
#include <stdexcept>
#include <string>

namespace fano {

using Complex = std::complex<double>;

using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using SparseComplexMatrix = Eigen::SparseMatrix<Complex>;

inline constexpr Complex kI{0.0, 1.0};

/// Raised when a computation cannot produce a trustworthy result
/// (degenerate steady-state kernel, non-convergent refinement, ...).
class numerical_error : public std::runtime_error {
 public:
  explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

/// Raised on invalid user-facing configuration (files, CLI values).
class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fano
