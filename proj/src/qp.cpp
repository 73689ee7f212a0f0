#include "spikeopt/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "spikeopt/problem_io.hpp"

namespace spikeopt {

void QpSchedule::validate() const {
  if (!(alpha0 > 0.0)) throw InvalidArgument("QpSchedule: alpha0 must be > 0");
  if (!(beta0 >= 0.0)) throw InvalidArgument("QpSchedule: beta0 must be >= 0");
  if (!(t0 > 0.0)) throw InvalidArgument("QpSchedule: t0 must be > 0");
  if (beta_max && !(*beta_max >= 0.0)) throw InvalidArgument("QpSchedule: beta_max must be >= 0");
  if (max_iters < 1) throw InvalidArgument("QpSchedule: max_iters must be >= 1");
  if (!(tol >= 0.0)) throw InvalidArgument("QpSchedule: tol must be >= 0");
}

double QpSchedule::beta(Tick t) const noexcept {
  const double b = beta0 * (1.0 + static_cast<double>(t) / t0);
  return beta_max ? std::min(b, *beta_max) : b;
}

namespace {

double largest_eigenvalue(const Eigen::MatrixXd& sym) {
  if (sym.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

}  // namespace

QpSchedule default_schedule(const QpInstance& inst) {
  inst.validate();
  QpSchedule s;
  const double lq = largest_eigenvalue(inst.q);
  const double pn = inst.p.norm();
  s.alpha0 = lq > 1e-12 ? 1.0 / lq : 1.0 / std::max(1.0, pn);
  const double la = largest_eigenvalue(inst.a * inst.a.transpose());
  s.beta_max = la > 1e-12 ? 1.0 / la : 1.0;
  s.beta0 = *s.beta_max / 10.0;
  return s;
}

QpResult solve_qp(const QpInstance& inst, const QpSchedule& schedule, const Eigen::VectorXd& x0, Tick record_every) {
  inst.validate();
  schedule.validate();
  Eigen::VectorXd x = x0.size() == 0 ? Eigen::VectorXd::Zero(inst.dims()) : x0;
  if (x.size() != inst.dims()) throw InvalidArgument("solve_qp: x0 dimension mismatch");
  QpResult r;
  Tick t = 0;
  for (; t < schedule.max_iters; ++t) {
    if (record_every > 0 && t % record_every == 0) r.trace.push_back({t, qp_objective(inst, x), max_violation(inst, x)});
    Eigen::VectorXd next = constraint_correction(gradient_step(x, inst, schedule.alpha(t)), inst, schedule.beta(t));
    const double step = (next - x).norm();
    x = std::move(next);
    if (step < schedule.tol) {
      ++t;
      r.converged = true;
      break;
    }
  }
  r.iterations = t;
  r.x = x;
  r.objective = qp_objective(inst, x);
  r.max_violation = max_violation(inst, x);
  r.state.x = x;
  r.state.violations = constraint_violation(inst, x);
  r.state.cost_monitor = r.objective;
  if (record_every > 0) r.trace.push_back({t, r.objective, r.max_violation});
  return r;
}

std::string convergence_csv(const QpResult& result) {
  std::ostringstream os;
  os << "iter,f,max_violation\n";
  for (const auto& p : result.trace) {
    os << p.iter << ',' << io::format_double(p.objective) << ',' << io::format_double(p.max_violation) << '\n';
  }
  return os.str();
}

// --- reference ---------------------------------------------------------------

Eigen::VectorXd project_polytope(const Eigen::VectorXd& z, const Eigen::MatrixXd& a, const Eigen::VectorXd& k) {
  const auto m = static_cast<int>(k.size());
  if (a.rows() != m || (m > 0 && a.cols() != z.size())) throw InvalidArgument("project_polytope: dimension mismatch");
  if (m > 16) throw SizeCapError("project_polytope: at most 16 constraints");
  const double eps = 1e-10 * std::max(1.0, z.cwiseAbs().maxCoeff());
  if (m == 0 || ((a * z - k).array() <= 0.0).all()) return z;
  Eigen::VectorXd best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
    std::vector<int> rows;
    for (int i = 0; i < m; ++i) {
      if (mask & (1u << i)) rows.push_back(i);
    }
    const auto s = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd as(s, z.size());
    Eigen::VectorXd ks(s);
    for (Eigen::Index i = 0; i < s; ++i) {
      as.row(i) = a.row(rows[static_cast<std::size_t>(i)]);
      ks[i] = k[rows[static_cast<std::size_t>(i)]];
    }
    const Eigen::MatrixXd g = as * as.transpose();
    const Eigen::VectorXd mu = g.completeOrthogonalDecomposition().solve(as * z - ks);
    if ((mu.array() < -eps).any()) continue;
    const Eigen::VectorXd x = z - as.transpose() * mu;
    if (((a * x - k).array() > eps).any()) continue;
    if (((as * x - ks).cwiseAbs().array() > eps).any()) continue;
    const double dist = (x - z).squaredNorm();
    if (dist < best_dist) {
      best_dist = dist;
      best = x;
    }
  }
  if (best.size() == 0) throw InvalidArgument("project_polytope: no KKT point found (empty polytope?)");
  return best;
}

QpReference reference_qp_solve(const QpInstance& inst, double tol, Tick max_iters) {
  inst.validate();
  const double lq = largest_eigenvalue(inst.q);
  const double step = lq > 1e-12 ? 1.0 / lq : 1.0;
  Eigen::VectorXd x = project_polytope(Eigen::VectorXd::Zero(inst.dims()), inst.a, inst.k);
  Eigen::VectorXd y = x;
  double momentum = 1.0;
  double fx = qp_objective(inst, x);
  QpReference r;
  Tick it = 0;
  for (; it < max_iters; ++it) {
    const Eigen::VectorXd next = project_polytope(y - step * qp_gradient(inst, y), inst.a, inst.k);
    const double fn = qp_objective(inst, next);
    if (fn > fx && momentum > 1.0) {
      // restart the momentum from the last iterate
      momentum = 1.0;
      y = x;
      continue;
    }
    const double m_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
    y = next + ((momentum - 1.0) / m_next) * (next - x);
    momentum = m_next;
    const double moved = (next - x).norm();
    x = next;
    fx = fn;
    if (moved < tol) break;
  }
  r.x = x;
  r.objective = fx;
  r.iterations = it;
  return r;
}

}  // namespace spikeopt
