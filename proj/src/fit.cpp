#include "fano/fit.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "fano/types.hpp"

namespace fano::fit {

namespace {

using Vec5 = Eigen::Matrix<double, 5, 1>;
using Mat5 = Eigen::Matrix<double, 5, 5>;

constexpr int kMaxIterations = 500;
constexpr int kMaxStalledDampings = 45;
constexpr double kStepTol = 1e-10;
constexpr double kCostTol = 1e-12;

// Internal parameterizations of the generalized profile.
//   standard: theta = (C, D, q, ln gamma, omega0)
//   inverse_q: theta = (A, u, B, ln gamma, omega0) with
//              A = C q^2, u = 1/q, B = C D  (for |q| > 20)
enum class Branch { standard, inverse_q };

double model_value(Branch branch, const Vec5& th, double omega, Vec5* jac) {
  const double gamma = std::exp(th(3));
  const double eps = (omega - th(4)) / gamma;
  const double g = 1.0 / (eps * eps + 1.0);  // Lorentzian factor

  if (branch == Branch::standard) {
    const double C = th(0), D = th(1), q = th(2);
    const double a = q + eps;
    const double f = a * a * g;
    const double value = C * (f + D * g);
    if (jac) {
      const double df_deps = 2.0 * a * (1.0 - q * eps) * g * g;
      const double dg_deps = -2.0 * eps * g * g;
      const double dm_deps = C * (df_deps + D * dg_deps);
      (*jac)(0) = f + D * g;
      (*jac)(1) = C * g;
      (*jac)(2) = C * 2.0 * a * g;
      (*jac)(3) = dm_deps * (-eps);          // d/d ln gamma
      (*jac)(4) = dm_deps * (-1.0 / gamma);  // d/d omega0
    }
    return value;
  }

  const double A = th(0), u = th(1), B = th(2);
  const double b = 1.0 + u * eps;
  const double value = (A * b * b + B) * g;
  if (jac) {
    const double dm_deps = 2.0 * A * u * b * g + (A * b * b + B) * (-2.0 * eps * g * g);
    (*jac)(0) = b * b * g;
    (*jac)(1) = 2.0 * A * eps * b * g;
    (*jac)(2) = g;
    (*jac)(3) = dm_deps * (-eps);
    (*jac)(4) = dm_deps * (-1.0 / gamma);
  }
  return value;
}

Vec5 to_internal(Branch branch, const profiles::EffectiveFano& ef) {
  Vec5 th;
  if (branch == Branch::standard) {
    th << ef.C, ef.D, ef.q_eff, std::log(ef.gamma_eff), ef.omega_eff;
  } else {
    th << ef.C * ef.q_eff * ef.q_eff, 1.0 / ef.q_eff, ef.C * ef.D, std::log(ef.gamma_eff),
        ef.omega_eff;
  }
  return th;
}

profiles::EffectiveFano to_external(Branch branch, const Vec5& th) {
  profiles::EffectiveFano ef;
  if (branch == Branch::standard) {
    ef.C = th(0);
    ef.D = th(1);
    ef.q_eff = th(2);
  } else {
    const double A = th(0), u = th(1), B = th(2);
    ef.q_eff = 1.0 / u;
    ef.C = A * u * u;
    ef.D = ef.C > 0.0 ? B / ef.C : 0.0;
  }
  ef.gamma_eff = std::exp(th(3));
  ef.omega_eff = th(4);
  return ef;
}

void clamp_bounds(Branch branch, Vec5& th) {
  th(0) = std::max(th(0), 0.0);  // C or A
  if (branch == Branch::standard) {
    th(1) = std::max(th(1), 0.0);  // D
  } else {
    th(2) = std::max(th(2), 0.0);  // B = C*D
  }
}

struct LmOutcome {
  Vec5 theta;
  double cost = 0.0;  // sum of squared residuals
  int iterations = 0;
  Mat5 jtj;
};

LmOutcome run_lm(Branch branch, const ProfileSamples& samples, Vec5 theta) {
  const int n = static_cast<int>(samples.points.size());
  Eigen::VectorXd residual(n);
  Eigen::MatrixXd jac(n, 5);

  const auto evaluate = [&](const Vec5& th, Eigen::VectorXd& r, Eigen::MatrixXd* j) {
    Vec5 grad;
    double cost = 0.0;
    for (int i = 0; i < n; ++i) {
      const auto& [omega, y] = samples.points[i];
      const double m = model_value(branch, th, omega, j ? &grad : nullptr);
      r(i) = m - y;
      cost += r(i) * r(i);
      if (j) j->row(i) = grad.transpose();
    }
    return cost;
  };

  clamp_bounds(branch, theta);
  double cost = evaluate(theta, residual, &jac);
  double lambda = 1e-3;
  double growth = 2.0;
  int stalled = 0;

  Eigen::MatrixXd augmented(n + 5, 5);
  Eigen::VectorXd rhs(n + 5);

  LmOutcome out;
  for (out.iterations = 1; out.iterations <= kMaxIterations; ++out.iterations) {
    const Mat5 jtj = jac.transpose() * jac;
    const Vec5 jtr = jac.transpose() * residual;

    const Vec5 scale = jtj.diagonal().cwiseMax(1e-12);

    // Damped least-squares step via QR of the augmented system; forming
    // the normal equations squares the conditioning and stalls the
    // iteration near the noise floor.
    augmented.topRows(n) = jac;
    augmented.bottomRows(5) = (lambda * scale).cwiseSqrt().asDiagonal();
    rhs.head(n) = -residual;
    rhs.tail(5).setZero();
    const Vec5 step = augmented.colPivHouseholderQr().solve(rhs);
    Vec5 candidate = theta + step;
    clamp_bounds(branch, candidate);
    const Vec5 applied = candidate - theta;

    Eigen::VectorXd trial_residual(n);
    const double trial_cost = evaluate(candidate, trial_residual, nullptr);

    const double rel_step = applied.norm() / (theta.norm() + 1e-300);
    const double predicted_drop =
        -(2.0 * applied.dot(jtr) + applied.dot(jtj * applied));
    if (std::isfinite(trial_cost) && trial_cost <= cost) {
      const double rel_drop = (cost - trial_cost) / std::max(cost, 1e-300);
      // Gain-ratio damping control: shrink lambda only while the quadratic
      // model predicts the decrease well.
      const double gain = predicted_drop > 0.0 ? (cost - trial_cost) / predicted_drop : 0.0;
      const double shrink = 1.0 - std::pow(2.0 * gain - 1.0, 3);
      lambda = std::max(lambda * std::max(1.0 / 3.0, shrink), 1e-14);
      growth = 2.0;
      theta = candidate;
      cost = evaluate(theta, residual, &jac);
      stalled = 0;
      if (rel_step < kStepTol || rel_drop < kCostTol) break;
    } else {
      // Once the damped proposal itself is below the step tolerance no
      // admissible move remains.
      if (rel_step < kStepTol) break;
      lambda *= growth;
      growth *= 2.0;
      ++stalled;
      if (stalled > kMaxStalledDampings) {
        if (jtr.cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, cost)) break;
        const Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac, Eigen::ComputeThinV);
        const auto& sv = svd.singularValues();
        if (sv(0) <= 0.0 || sv(4) / sv(0) < 1e-12) {
          std::ostringstream os;
          os << "fit_profile: rank-deficient Jacobian; degenerate direction ("
             << svd.matrixV().col(4).transpose() << ") in (C, D, q_eff, ln gamma_eff, omega_eff)";
          throw numerical_error(os.str());
        }
        break;  // genuine stall at a flat spot
      }
    }
    if (out.iterations == kMaxIterations) {
      throw numerical_error("fit_profile: no convergence within 500 iterations");
    }
  }

  out.theta = theta;
  out.cost = cost;
  out.jtj = jac.transpose() * jac;
  return out;
}

bool has_interior_minimum(const ProfileSamples& samples) {
  const auto less_value = [](const auto& a, const auto& b) { return a.second < b.second; };
  const auto it = std::min_element(samples.points.begin(), samples.points.end(), less_value);
  return it != samples.points.begin() && it != std::prev(samples.points.end());
}

std::array<double, 5> external_covariance(Branch branch, const Vec5& th, const Mat5& jtj,
                                          double cost, int n) {
  const double dof = std::max(n - 5, 1);
  const double sigma2 = cost / dof;
  const Mat5 cov_internal = sigma2 * jtj.ldlt().solve(Mat5::Identity());

  // Chain rule to (C, D, q_eff, gamma_eff, omega_eff).
  Mat5 t = Mat5::Zero();
  const double gamma = std::exp(th(3));
  if (branch == Branch::standard) {
    t(0, 0) = 1.0;
    t(1, 1) = 1.0;
    t(2, 2) = 1.0;
  } else {
    const double A = th(0), u = th(1), B = th(2);
    t(0, 0) = u * u;                    // dC/dA
    t(0, 1) = 2.0 * A * u;              // dC/du
    const double C = A * u * u;
    if (C > 0.0) {
      t(1, 0) = -B / (A * A * u * u);   // dD/dA
      t(1, 1) = -2.0 * B / (A * u * u * u);
      t(1, 2) = 1.0 / (A * u * u);      // dD/dB
    }
    t(2, 1) = -1.0 / (u * u);           // dq/du
  }
  t(3, 3) = gamma;  // d gamma / d ln gamma
  t(4, 4) = 1.0;

  const Mat5 cov = t * cov_internal * t.transpose();
  std::array<double, 5> diag{};
  for (int i = 0; i < 5; ++i) diag[i] = cov(i, i);
  return diag;
}

}  // namespace

void validate_samples(const ProfileSamples& samples) {
  if (samples.points.size() < 7) {
    throw std::invalid_argument("profile samples: need at least 7 points");
  }
  double prev = -std::numeric_limits<double>::infinity();
  for (const auto& [omega, value] : samples.points) {
    if (!std::isfinite(omega) || !std::isfinite(value)) {
      throw std::invalid_argument("profile samples: non-finite entry");
    }
    if (!(omega > prev)) {
      throw std::invalid_argument("profile samples: omega_L must be strictly increasing");
    }
    if (value < 0.0) {
      throw std::invalid_argument("profile samples: values must be >= 0");
    }
    prev = omega;
  }
}

profiles::EffectiveFano initial_guess(const ProfileSamples& samples) {
  validate_samples(samples);
  const auto& pts = samples.points;
  const int n = static_cast<int>(pts.size());

  int i_max = 0, i_min = 0;
  for (int i = 1; i < n; ++i) {
    if (pts[i].second > pts[i_max].second) i_max = i;
    if (pts[i].second < pts[i_min].second) i_min = i;
  }
  const double y_max = pts[i_max].second;
  const double y_min = pts[i_min].second;
  if (!(y_max > 0.0) || y_max - y_min <= 1e-12 * y_max) {
    throw numerical_error("initial_guess: featureless samples (flat profile)");
  }
  if ((i_max == 0 || i_max == n - 1) && (i_min == 0 || i_min == n - 1)) {
    throw numerical_error("initial_guess: featureless samples (monotone profile)");
  }

  profiles::EffectiveFano guess;

  // A window-type profile (interior dip, maxima in the tails) has its
  // transplanted zero at the dip and q_eff near zero; anchor on the dip.
  const bool window_type = (i_max == 0 || i_max == n - 1) && i_min != 0 && i_min != n - 1;
  const int i_feature = window_type ? i_min : i_max;
  const double half = 0.5 * (y_max + y_min);
  const auto crossed = [&](double y) { return window_type ? y >= half : y <= half; };

  guess.omega_eff = pts[i_feature].first;

  // Geometric mean of the two half-crossing distances; one side suffices
  // when the other never crosses.
  double left = 0.0, right = 0.0;
  for (int i = i_feature; i >= 0; --i) {
    if (crossed(pts[i].second)) {
      left = guess.omega_eff - pts[i].first;
      break;
    }
  }
  for (int i = i_feature; i < n; ++i) {
    if (crossed(pts[i].second)) {
      right = pts[i].first - guess.omega_eff;
      break;
    }
  }
  if (left > 0.0 && right > 0.0) {
    guess.gamma_eff = std::sqrt(left * right);
  } else if (left > 0.0 || right > 0.0) {
    guess.gamma_eff = std::max(left, right);
  } else {
    guess.gamma_eff = (pts.back().first - pts.front().first) / 6.0;
  }

  // Transplanted zero: omega_zero = omega_eff - q_eff * gamma_eff.
  guess.q_eff = (guess.omega_eff - pts[i_min].first) / guess.gamma_eff;

  const double tail = 0.5 * (pts.front().second + pts.back().second);
  guess.D = 0.0;
  guess.C = tail / (1.0 + guess.D);
  if (!(guess.C > 0.0)) guess.C = y_max / (1.0 + guess.q_eff * guess.q_eff);
  return guess;
}

FitResult fit_profile(const ProfileSamples& samples, const profiles::EffectiveFano& guess) {
  validate_samples(samples);
  if (!(guess.gamma_eff > 0.0) || !std::isfinite(guess.q_eff) || !std::isfinite(guess.C) ||
      !std::isfinite(guess.D) || !std::isfinite(guess.omega_eff)) {
    throw std::invalid_argument("fit_profile: guess must be finite with gamma_eff > 0");
  }

  const Branch branch =
      std::abs(guess.q_eff) > 20.0 ? Branch::inverse_q : Branch::standard;

  std::vector<profiles::EffectiveFano> starts;
  starts.push_back(guess);
  if (!has_interior_minimum(samples) && guess.q_eff != 0.0) {
    profiles::EffectiveFano flipped = guess;
    flipped.q_eff = -flipped.q_eff;
    starts.push_back(flipped);
  }

  LmOutcome best;
  best.cost = std::numeric_limits<double>::infinity();
  int total_iterations = 0;
  for (const auto& start : starts) {
    LmOutcome trial = run_lm(branch, samples, to_internal(branch, start));
    total_iterations += trial.iterations;
    if (trial.cost < best.cost) best = trial;
  }

  const int n = static_cast<int>(samples.points.size());
  double y2 = 0.0;
  for (const auto& [omega, y] : samples.points) y2 += y * y;

  FitResult out;
  out.params = to_external(branch, best.theta);
  out.rms_residual = y2 > 0.0 ? std::sqrt(best.cost / y2) : std::sqrt(best.cost / n);
  out.covariance_diag = external_covariance(branch, best.theta, best.jtj, best.cost, n);
  out.iterations = total_iterations;
  return out;
}

FitResult fit_profile_auto(const ProfileSamples& samples) {
  return fit_profile(samples, initial_guess(samples));
}

}  // namespace fano::fit
