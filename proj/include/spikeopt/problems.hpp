#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "spikeopt/common.hpp"
#include "spikeopt/rng.hpp"

namespace spikeopt {

enum class Sense { Minimize, Maximize };

/// Quadratic unconstrained binary problem in canonical form: minimize
/// x^T Q x with Q upper triangular. `sense` records the sense the instance
/// was authored in; maximization inputs are stored negated.
struct QuboInstance {
  Eigen::MatrixXd q;
  Sense sense = Sense::Minimize;

  [[nodiscard]] Eigen::Index n() const noexcept { return q.rows(); }
  void validate() const;
};

/// Folds an arbitrary square matrix (q_ij + q_ji onto the upper triangle) and
/// negates it when `sense` is Maximize.
QuboInstance make_qubo(const Eigen::MatrixXd& q, Sense sense = Sense::Minimize);

/// E(s) = sum_{i<j} J_ij s_i s_j + sum_i h_i s_i, spins in {-1,+1}.
struct IsingInstance {
  Eigen::MatrixXd j;  // symmetric, zero diagonal
  Eigen::VectorXd h;
  double offset = 0.0;

  [[nodiscard]] Eigen::Index n() const noexcept { return h.size(); }
  void validate() const;
};

struct CnfFormula {
  int n_vars = 0;
  std::vector<std::vector<int>> clauses;  // DIMACS literals: +v / -v, v in [1, n_vars]

  void validate() const;
  [[nodiscard]] bool is_3cnf() const;
};

struct CspConstraint {
  std::size_t a = 0;
  std::size_t b = 0;
  std::vector<std::pair<int, int>> forbidden;  // (value of a, value of b)
};

struct CspInstance {
  std::vector<std::vector<int>> domains;  // one finite value set per variable
  std::vector<CspConstraint> constraints;

  [[nodiscard]] std::size_t n() const noexcept { return domains.size(); }
  void validate() const;
};

struct TspInstance {
  Eigen::MatrixXd dist;

  [[nodiscard]] Eigen::Index n() const noexcept { return dist.rows(); }
  void validate() const;
};

/// minimize 1/2 x^T Q x + p^T x subject to A x <= k.
struct QpInstance {
  Eigen::MatrixXd q;
  Eigen::VectorXd p;
  Eigen::MatrixXd a;
  Eigen::VectorXd k;

  [[nodiscard]] Eigen::Index dims() const noexcept { return p.size(); }
  [[nodiscard]] Eigen::Index constraints() const noexcept { return k.size(); }
  void validate() const;  // includes the PSD check
};

inline constexpr double kPsdTolerance = 1e-9;
[[nodiscard]] bool is_psd(const Eigen::MatrixXd& q, double tolerance = kPsdTolerance);

// --- evaluators -----------------------------------------------------------

template <typename Derived>
double qubo_objective(const QuboInstance& inst, const Eigen::MatrixBase<Derived>& x) {
  if (x.size() != inst.n()) throw InvalidArgument("qubo_objective: length mismatch");
  const Eigen::VectorXd xd = x.template cast<double>();
  return xd.dot(inst.q.template triangularView<Eigen::Upper>() * xd);
}

IsingInstance qubo_to_ising(const QuboInstance& inst);

struct IsingToQubo {
  QuboInstance qubo;
  double constant = 0.0;  // E(s) + offset == qubo_objective(x) + constant
};
IsingToQubo ising_to_qubo(const IsingInstance& ising);

template <typename Derived>
double ising_energy(const IsingInstance& inst, const Eigen::MatrixBase<Derived>& s) {
  if (s.size() != inst.n()) throw InvalidArgument("ising_energy: length mismatch");
  const Eigen::VectorXd sd = s.template cast<double>();
  return 0.5 * sd.dot(inst.j * sd) + inst.h.dot(sd);
}

// Spin image of a binary vector: s = 2x - 1.
Eigen::VectorXd spins_from_bits(const BitVector& x);

struct CnfEval {
  std::size_t satisfied = 0;
  bool satisfying = false;
};
CnfEval cnf_eval(const CnfFormula& f, const BitVector& assignment);

std::size_t csp_violations(const CspInstance& inst, const std::vector<int>& assignment);

/// Dense lookup tables over domain *indices* for fast violation counting.
class CspIndex {
 public:
  explicit CspIndex(const CspInstance& inst);

  [[nodiscard]] std::size_t value_index(std::size_t var, int value) const;
  [[nodiscard]] bool forbidden(std::size_t constraint, std::size_t ia, std::size_t ib) const {
    return tables_[constraint][ia * widths_[constraint] + ib] != 0;
  }
  // Counts violated forbidden pairs; `indices` holds one domain index per variable.
  [[nodiscard]] std::size_t violations(const std::vector<std::size_t>& indices) const;
  [[nodiscard]] const CspInstance& instance() const noexcept { return *inst_; }

 private:
  const CspInstance* inst_;
  std::vector<std::vector<std::uint8_t>> tables_;
  std::vector<std::size_t> widths_;
};

double tour_length(const TspInstance& inst, const std::vector<int>& tour);
[[nodiscard]] bool is_permutation_of_range(const std::vector<int>& tour, std::size_t n);

template <typename Derived>
double qp_objective(const QpInstance& inst, const Eigen::MatrixBase<Derived>& x) {
  if (x.size() != inst.dims()) throw InvalidArgument("qp_objective: dimension mismatch");
  return 0.5 * x.dot(inst.q * x) + inst.p.dot(x);
}

template <typename Derived>
Eigen::VectorXd qp_gradient(const QpInstance& inst, const Eigen::MatrixBase<Derived>& x) {
  if (x.size() != inst.dims()) throw InvalidArgument("qp_gradient: dimension mismatch");
  return inst.q * x + inst.p;
}

template <typename Derived>
Eigen::VectorXd constraint_violation(const QpInstance& inst, const Eigen::MatrixBase<Derived>& x) {
  if (x.size() != inst.dims()) throw InvalidArgument("constraint_violation: dimension mismatch");
  return (inst.a * x - inst.k).cwiseMax(0.0);
}

// --- exhaustive oracles ---------------------------------------------------

inline constexpr int kQuboBruteForceCap = 24;
inline constexpr int kCnfBruteForceCap = 24;
inline constexpr int kCspBruteForceCap = 24;
inline constexpr std::uint64_t kCspAssignmentCap = std::uint64_t{1} << 24;
inline constexpr int kTspBruteForceCap = 10;

struct QuboOptimum {
  BitVector x;
  double objective = 0.0;
};
struct CnfOptimum {
  BitVector assignment;
  std::size_t satisfied = 0;
  bool satisfiable = false;
};
struct CspOptimum {
  std::vector<int> assignment;
  std::size_t violations = 0;
};
struct TspOptimum {
  std::vector<int> tour;  // starts at city 0
  double length = 0.0;
};

// Ties go to the lexicographically smallest solution.
QuboOptimum brute_force(const QuboInstance& inst);
CnfOptimum brute_force(const CnfFormula& f);
CspOptimum brute_force(const CspInstance& inst);
TspOptimum brute_force(const TspInstance& inst);

/// Complete depth-first search for a zero-violation CSP assignment; not
/// capped, used to certify instances too large for brute_force.
std::optional<std::vector<int>> solve_csp_exact(const CspInstance& inst);

// --- generators -------------------------------------------------------------

QuboInstance random_qubo(int n, int lo, int hi, Rng& rng, double density = 1.0);
// Couplings +-1 with equal probability, no fields.
IsingInstance random_spin_glass(int n, Rng& rng, double density = 1.0);
CnfFormula random_3cnf(int n_vars, int n_clauses, Rng& rng);
TspInstance random_tsp(int n, Rng& rng);  // Euclidean, points in the unit square
QpInstance random_qp(int dims, int n_constraints, Rng& rng, bool linear = false);
CspInstance coloring_csp(int n, const std::vector<std::pair<int, int>>& edges, int colors);
std::vector<std::pair<int, int>> random_graph_edges(int n, double p, Rng& rng);

}  // namespace spikeopt
