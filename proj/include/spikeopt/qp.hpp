#pragma once

#include <optional>
#include <string>
#include <vector>

#include "spikeopt/problems.hpp"

namespace spikeopt {

/// alpha_t = alpha0 / (1 + t/t0), beta_t = min(beta_max, beta0 (1 + t/t0)).
struct QpSchedule {
  double alpha0 = 0.1;
  double beta0 = 0.01;
  double t0 = 20.0;
  std::optional<double> beta_max;
  Tick max_iters = 1000000;
  double tol = 1e-12;  // stop when ||x_{t+1} - x_t|| < tol

  void validate() const;
  [[nodiscard]] double alpha(Tick t) const noexcept { return alpha0 / (1.0 + static_cast<double>(t) / t0); }
  [[nodiscard]] double beta(Tick t) const noexcept;
};

/// alpha0 = 1/lambda_max(Q) (1/||p|| when Q = 0), beta_max = 1/lambda_max(A A^T), beta0 = beta_max / 10.
QpSchedule default_schedule(const QpInstance& inst);

template <typename Derived>
double max_violation(const QpInstance& inst, const Eigen::MatrixBase<Derived>& x) {
  if (inst.constraints() == 0) return 0.0;
  return constraint_violation(inst, x).maxCoeff();
}

/// x - alpha (Q x + p).
template <typename Derived>
Eigen::VectorXd gradient_step(const Eigen::MatrixBase<Derived>& x, const QpInstance& inst, double alpha) {
  if (!(alpha > 0.0)) throw InvalidArgument("gradient_step: alpha must be > 0");
  return x - alpha * qp_gradient(inst, x);
}

/// x - beta A^T max(0, Ax - k).
template <typename Derived>
Eigen::VectorXd constraint_correction(const Eigen::MatrixBase<Derived>& x, const QpInstance& inst, double beta) {
  if (!(beta >= 0.0)) throw InvalidArgument("constraint_correction: beta must be >= 0");
  return x - beta * (inst.a.transpose() * constraint_violation(inst, x));
}

struct QpNetState {
  Eigen::VectorXd x;           // gradient-layer neurons
  Eigen::VectorXd violations;  // correction-layer outputs, max(0, Ax - k)
  double cost_monitor = 0.0;   // f(x), observation only
};

struct QpTracePoint {
  Tick iter = 0;
  double objective = 0.0;
  double max_violation = 0.0;
};

struct QpResult {
  Eigen::VectorXd x;
  double objective = 0.0;
  double max_violation = 0.0;
  Tick iterations = 0;
  bool converged = false;
  QpNetState state;
  std::vector<QpTracePoint> trace;
};

/// Alternates gradient_step and constraint_correction from x0 (zero when
/// empty). Records a trace point every `record_every` iterations (0: none).
QpResult solve_qp(const QpInstance& inst, const QpSchedule& schedule, const Eigen::VectorXd& x0 = {},
                  Tick record_every = 0);

std::string convergence_csv(const QpResult& result);

// --- reference ---------------------------------------------------------------

/// Euclidean projection onto {x : Ax <= k} by enumerating the active sets of
/// the dual; exact up to linear-solve rounding. Needs a nonempty polytope and
/// at most 16 constraints.
Eigen::VectorXd project_polytope(const Eigen::VectorXd& z, const Eigen::MatrixXd& a, const Eigen::VectorXd& k);

struct QpReference {
  Eigen::VectorXd x;
  double objective = 0.0;
  Tick iterations = 0;
};

/// Accelerated projected gradient with restarts, run until the step falls
/// below `tol`.
QpReference reference_qp_solve(const QpInstance& inst, double tol = 1e-12, Tick max_iters = 2000000);

}  // namespace spikeopt
