#include "spikeopt/problems.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include <Eigen/Cholesky>

namespace spikeopt {

namespace {

void require_square(const Eigen::MatrixXd& m, const char* who) {
  if (m.rows() != m.cols()) throw InvalidArgument(std::string(who) + ": matrix must be square");
  if (!m.allFinite()) throw InvalidArgument(std::string(who) + ": entries must be finite");
}

}  // namespace

void QuboInstance::validate() const {
  require_square(q, "QuboInstance");
  if (q.rows() < 1) throw InvalidArgument("QuboInstance: n must be >= 1");
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      if (q(i, j) != 0.0) throw InvalidArgument("QuboInstance: strictly lower triangle must be zero");
    }
  }
}

QuboInstance make_qubo(const Eigen::MatrixXd& q, Sense sense) {
  require_square(q, "make_qubo");
  QuboInstance inst;
  inst.sense = sense;
  inst.q = Eigen::MatrixXd::Zero(q.rows(), q.cols());
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    inst.q(i, i) = q(i, i);
    for (Eigen::Index j = i + 1; j < q.cols(); ++j) inst.q(i, j) = q(i, j) + q(j, i);
  }
  if (sense == Sense::Maximize) inst.q = -inst.q;
  inst.validate();
  return inst;
}

void IsingInstance::validate() const {
  require_square(j, "IsingInstance");
  if (j.rows() != h.size()) throw InvalidArgument("IsingInstance: J and h dimensions differ");
  if (j.rows() == 0) return;
  if (j != j.transpose()) throw InvalidArgument("IsingInstance: J must be symmetric");
  if (!j.diagonal().isZero(0.0)) throw InvalidArgument("IsingInstance: J must have a zero diagonal");
}

void CnfFormula::validate() const {
  if (n_vars < 0) throw InvalidArgument("CnfFormula: negative variable count");
  for (const auto& c : clauses) {
    if (c.empty()) throw InvalidArgument("CnfFormula: empty clause");
    for (int lit : c) {
      if (lit == 0 || std::abs(lit) > n_vars) throw InvalidArgument("CnfFormula: literal out of range");
    }
  }
}

bool CnfFormula::is_3cnf() const {
  return std::all_of(clauses.begin(), clauses.end(), [](const auto& c) { return c.size() <= 3; });
}

void CspInstance::validate() const {
  for (const auto& d : domains) {
    if (d.empty()) throw InvalidArgument("CspInstance: empty domain");
    std::set<int> unique(d.begin(), d.end());
    if (unique.size() != d.size()) throw InvalidArgument("CspInstance: duplicate domain value");
  }
  for (const auto& c : constraints) {
    if (c.a >= n() || c.b >= n()) throw InvalidArgument("CspInstance: constraint on unknown variable");
    if (c.a == c.b) throw InvalidArgument("CspInstance: constraint must link two distinct variables");
    for (auto [va, vb] : c.forbidden) {
      const auto& da = domains[c.a];
      const auto& db = domains[c.b];
      if (std::find(da.begin(), da.end(), va) == da.end() || std::find(db.begin(), db.end(), vb) == db.end()) {
        throw InvalidArgument("CspInstance: forbidden pair outside the domains");
      }
    }
  }
}

void TspInstance::validate() const {
  require_square(dist, "TspInstance");
  if (dist.rows() < 1) throw InvalidArgument("TspInstance: no cities");
  if ((dist.array() < 0.0).any()) throw InvalidArgument("TspInstance: negative distance");
  if (dist.diagonal().cwiseAbs().maxCoeff() != 0.0) throw InvalidArgument("TspInstance: nonzero diagonal");
}

bool is_psd(const Eigen::MatrixXd& q, double tolerance) {
  if (q.rows() == 0) return true;
  const Eigen::MatrixXd shifted = q + tolerance * Eigen::MatrixXd::Identity(q.rows(), q.cols());
  Eigen::LLT<Eigen::MatrixXd> llt(shifted);
  return llt.info() == Eigen::Success;
}

void QpInstance::validate() const {
  require_square(q, "QpInstance");
  if (q.rows() != p.size()) throw InvalidArgument("QpInstance: Q and p dimensions differ");
  if (a.rows() != k.size()) throw InvalidArgument("QpInstance: A and k dimensions differ");
  if (a.rows() > 0 && a.cols() != p.size()) throw InvalidArgument("QpInstance: A column count differs from L");
  if (!p.allFinite() || !a.allFinite() || !k.allFinite()) throw InvalidArgument("QpInstance: entries must be finite");
  if ((q - q.transpose()).cwiseAbs().maxCoeff() > kPsdTolerance * std::max(1.0, q.cwiseAbs().maxCoeff())) {
    throw InvalidArgument("QpInstance: Q must be symmetric");
  }
  if (!is_psd(q)) throw InvalidArgument("QpInstance: Q is not positive semidefinite");
}

IsingInstance qubo_to_ising(const QuboInstance& inst) {
  inst.validate();
  const Eigen::Index n = inst.n();
  IsingInstance out;
  out.j = Eigen::MatrixXd::Zero(n, n);
  out.h = Eigen::VectorXd::Zero(n);
  // x = (s + 1) / 2
  for (Eigen::Index i = 0; i < n; ++i) {
    out.h[i] += inst.q(i, i) / 2.0;
    out.offset += inst.q(i, i) / 2.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double c = inst.q(i, j) / 4.0;
      out.j(i, j) += c;
      out.j(j, i) += c;
      out.h[i] += c;
      out.h[j] += c;
      out.offset += c;
    }
  }
  return out;
}

IsingToQubo ising_to_qubo(const IsingInstance& ising) {
  ising.validate();
  const Eigen::Index n = ising.n();
  IsingToQubo out;
  out.qubo.q = Eigen::MatrixXd::Zero(n, n);
  out.constant = ising.offset;
  // s = 2x - 1
  for (Eigen::Index i = 0; i < n; ++i) {
    out.qubo.q(i, i) += 2.0 * ising.h[i];
    out.constant -= ising.h[i];
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double c = ising.j(i, j);
      out.qubo.q(i, j) += 4.0 * c;
      out.qubo.q(i, i) -= 2.0 * c;
      out.qubo.q(j, j) -= 2.0 * c;
      out.constant += c;
    }
  }
  return out;
}

Eigen::VectorXd spins_from_bits(const BitVector& x) {
  return 2.0 * x.cast<double>().array() - 1.0;
}

CnfEval cnf_eval(const CnfFormula& f, const BitVector& assignment) {
  if (assignment.size() != f.n_vars) throw InvalidArgument("cnf_eval: length mismatch");
  CnfEval out;
  for (const auto& c : f.clauses) {
    for (int lit : c) {
      const bool value = assignment[std::abs(lit) - 1] != 0;
      if ((lit > 0) == value) {
        ++out.satisfied;
        break;
      }
    }
  }
  out.satisfying = out.satisfied == f.clauses.size();
  return out;
}

std::size_t csp_violations(const CspInstance& inst, const std::vector<int>& assignment) {
  if (assignment.size() != inst.n()) throw InvalidArgument("csp_violations: length mismatch");
  std::size_t count = 0;
  for (const auto& c : inst.constraints) {
    for (auto [va, vb] : c.forbidden) {
      if (assignment[c.a] == va && assignment[c.b] == vb) ++count;
    }
  }
  return count;
}

CspIndex::CspIndex(const CspInstance& inst) : inst_(&inst) {
  inst.validate();
  for (const auto& c : inst.constraints) {
    const std::size_t wa = inst.domains[c.a].size();
    const std::size_t wb = inst.domains[c.b].size();
    std::vector<std::uint8_t> table(wa * wb, 0);
    for (auto [va, vb] : c.forbidden) table[value_index(c.a, va) * wb + value_index(c.b, vb)] = 1;
    tables_.push_back(std::move(table));
    widths_.push_back(wb);
  }
}

std::size_t CspIndex::value_index(std::size_t var, int value) const {
  const auto& d = inst_->domains.at(var);
  const auto it = std::find(d.begin(), d.end(), value);
  if (it == d.end()) throw InvalidArgument("CspIndex: value not in domain");
  return static_cast<std::size_t>(it - d.begin());
}

std::size_t CspIndex::violations(const std::vector<std::size_t>& indices) const {
  std::size_t count = 0;
  const auto& cs = inst_->constraints;
  for (std::size_t c = 0; c < cs.size(); ++c) count += forbidden(c, indices[cs[c].a], indices[cs[c].b]) ? 1 : 0;
  return count;
}

bool is_permutation_of_range(const std::vector<int>& tour, std::size_t n) {
  if (tour.size() != n) return false;
  std::vector<std::uint8_t> seen(n, 0);
  for (int c : tour) {
    if (c < 0 || static_cast<std::size_t>(c) >= n || seen[static_cast<std::size_t>(c)]) return false;
    seen[static_cast<std::size_t>(c)] = 1;
  }
  return true;
}

double tour_length(const TspInstance& inst, const std::vector<int>& tour) {
  if (!is_permutation_of_range(tour, static_cast<std::size_t>(inst.n()))) {
    throw InvalidArgument("tour_length: tour is not a permutation of the cities");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < tour.size(); ++i) total += inst.dist(tour[i], tour[(i + 1) % tour.size()]);
  return total;
}

// --- exhaustive oracles ---------------------------------------------------

QuboOptimum brute_force(const QuboInstance& inst) {
  inst.validate();
  const int n = static_cast<int>(inst.n());
  if (n > kQuboBruteForceCap) {
    throw SizeCapError("brute_force: QUBO with n=" + std::to_string(n) + " exceeds the cap of " +
                       std::to_string(kQuboBruteForceCap) + " variables");
  }
  // Symmetric couplings; field[v] is the objective change for turning v on.
  Eigen::MatrixXd coupling = inst.q.triangularView<Eigen::StrictlyUpper>();
  coupling += coupling.transpose().eval();
  Eigen::VectorXd field = inst.q.diagonal();
  std::vector<std::uint8_t> x(static_cast<std::size_t>(n), 0);
  // Variable i lives at bit (n-1-i) so integer order equals lexicographic order.
  std::uint64_t mask = 0;
  double value = 0.0;
  double best = 0.0;
  std::uint64_t best_mask = 0;
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t k = 1; k < total; ++k) {
    const int bit = std::countr_zero(k);
    const int v = n - 1 - bit;
    const bool on = x[static_cast<std::size_t>(v)] == 0;
    value += on ? field[v] : -field[v];
    x[static_cast<std::size_t>(v)] = on ? 1 : 0;
    mask ^= std::uint64_t{1} << bit;
    const double sign = on ? 1.0 : -1.0;
    for (int u = 0; u < n; ++u) {
      if (u != v) field[u] += sign * coupling(u, v);
    }
    if (value < best || (value == best && mask < best_mask)) {
      best = value;
      best_mask = mask;
    }
  }
  QuboOptimum out;
  out.x = BitVector::Zero(n);
  for (int i = 0; i < n; ++i) out.x[i] = (best_mask >> (n - 1 - i)) & 1U;
  out.objective = qubo_objective(inst, out.x);
  return out;
}

CnfOptimum brute_force(const CnfFormula& f) {
  f.validate();
  const int n = f.n_vars;
  if (n > kCnfBruteForceCap) {
    throw SizeCapError("brute_force: CNF with " + std::to_string(n) + " variables exceeds the cap of " +
                       std::to_string(kCnfBruteForceCap));
  }
  std::vector<std::vector<std::pair<std::size_t, bool>>> occurs(static_cast<std::size_t>(n));
  for (std::size_t c = 0; c < f.clauses.size(); ++c) {
    for (int lit : f.clauses[c]) occurs[static_cast<std::size_t>(std::abs(lit) - 1)].push_back({c, lit > 0});
  }
  std::vector<int> true_count(f.clauses.size(), 0);
  std::size_t satisfied = 0;
  for (std::size_t c = 0; c < f.clauses.size(); ++c) {
    for (int lit : f.clauses[c]) true_count[c] += lit < 0 ? 1 : 0;
    if (true_count[c] > 0) ++satisfied;
  }
  std::vector<std::uint8_t> x(static_cast<std::size_t>(n), 0);
  std::uint64_t mask = 0;
  std::size_t best = satisfied;
  std::uint64_t best_mask = 0;
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t k = 1; k < total && best < f.clauses.size(); ++k) {
    const int bit = std::countr_zero(k);
    const auto v = static_cast<std::size_t>(n - 1 - bit);
    x[v] ^= 1U;
    mask ^= std::uint64_t{1} << bit;
    const bool value = x[v] != 0;
    for (auto [c, positive] : occurs[v]) {
      const int before = true_count[c];
      true_count[c] += (positive == value) ? 1 : -1;
      if (before == 0 && true_count[c] > 0) ++satisfied;
      if (before > 0 && true_count[c] == 0) --satisfied;
    }
    if (satisfied > best || (satisfied == best && mask < best_mask)) {
      best = satisfied;
      best_mask = mask;
    }
  }
  CnfOptimum out;
  out.assignment = BitVector::Zero(n);
  for (int i = 0; i < n; ++i) out.assignment[i] = (best_mask >> (n - 1 - i)) & 1U;
  out.satisfied = cnf_eval(f, out.assignment).satisfied;
  out.satisfiable = out.satisfied == f.clauses.size();
  return out;
}

CspOptimum brute_force(const CspInstance& inst) {
  const CspIndex index(inst);
  const std::size_t n = inst.n();
  if (n > static_cast<std::size_t>(kCspBruteForceCap)) {
    throw SizeCapError("brute_force: CSP with " + std::to_string(n) + " variables exceeds the cap of " +
                       std::to_string(kCspBruteForceCap));
  }
  std::uint64_t space = 1;
  for (const auto& d : inst.domains) {
    space *= d.size();
    if (space > kCspAssignmentCap) {
      throw SizeCapError("brute_force: CSP assignment space exceeds the cap of 2^24 assignments");
    }
  }
  std::vector<std::size_t> idx(n, 0);
  std::vector<std::size_t> best_idx = idx;
  std::size_t best = index.violations(idx);
  while (best > 0) {
    // Odometer with variable 0 most significant: lexicographic enumeration.
    std::size_t pos = n;
    while (pos > 0) {
      --pos;
      if (++idx[pos] < inst.domains[pos].size()) break;
      idx[pos] = 0;
      if (pos == 0) {
        pos = n + 1;
        break;
      }
    }
    if (pos == n + 1 || n == 0) break;
    const std::size_t v = index.violations(idx);
    if (v < best) {
      best = v;
      best_idx = idx;
    }
  }
  CspOptimum out;
  out.violations = best;
  for (std::size_t i = 0; i < n; ++i) out.assignment.push_back(inst.domains[i][best_idx[i]]);
  return out;
}

TspOptimum brute_force(const TspInstance& inst) {
  inst.validate();
  const int n = static_cast<int>(inst.n());
  if (n > kTspBruteForceCap) {
    throw SizeCapError("brute_force: TSP with " + std::to_string(n) + " cities exceeds the cap of " +
                       std::to_string(kTspBruteForceCap));
  }
  std::vector<int> tour(static_cast<std::size_t>(n));
  std::iota(tour.begin(), tour.end(), 0);
  TspOptimum out{tour, tour_length(inst, tour)};
  while (std::next_permutation(tour.begin() + 1, tour.end())) {
    const double len = tour_length(inst, tour);
    if (len < out.length) out = {tour, len};
  }
  return out;
}

std::optional<std::vector<int>> solve_csp_exact(const CspInstance& inst) {
  const CspIndex index(inst);
  const std::size_t n = inst.n();
  // Constraints indexed by their later variable so each check sees both ends assigned.
  std::vector<std::vector<std::size_t>> closing(n);
  for (std::size_t c = 0; c < inst.constraints.size(); ++c) {
    const auto& con = inst.constraints[c];
    closing[std::max(con.a, con.b)].push_back(c);
  }
  std::vector<std::size_t> idx(n, 0);
  std::size_t depth = 0;
  bool advancing = true;
  while (true) {
    if (depth == n) break;
    if (!advancing) {
      if (++idx[depth] >= inst.domains[depth].size()) {
        idx[depth] = 0;
        if (depth == 0) return std::nullopt;
        --depth;
        continue;
      }
    }
    bool ok = true;
    for (std::size_t c : closing[depth]) {
      const auto& con = inst.constraints[c];
      if (index.forbidden(c, idx[con.a], idx[con.b])) {
        ok = false;
        break;
      }
    }
    if (ok) {
      ++depth;
      if (depth < n) idx[depth] = 0;
      advancing = true;
    } else {
      advancing = false;
    }
  }
  std::vector<int> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(inst.domains[i][idx[i]]);
  return out;
}

// --- generators -------------------------------------------------------------

QuboInstance random_qubo(int n, int lo, int hi, Rng& rng, double density) {
  if (n < 1) throw InvalidArgument("random_qubo: n must be >= 1");
  QuboInstance inst;
  inst.q = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      if (density >= 1.0 || rng.bernoulli(density)) inst.q(i, j) = static_cast<double>(rng.uniform_int(lo, hi));
    }
  }
  return inst;
}

IsingInstance random_spin_glass(int n, Rng& rng, double density) {
  if (n < 1) throw InvalidArgument("random_spin_glass: n must be >= 1");
  IsingInstance inst;
  inst.j = Eigen::MatrixXd::Zero(n, n);
  inst.h = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    for (int k = i + 1; k < n; ++k) {
      if (density < 1.0 && !rng.bernoulli(density)) continue;
      inst.j(i, k) = inst.j(k, i) = rng.bernoulli(0.5) ? 1.0 : -1.0;
    }
  }
  return inst;
}

CnfFormula random_3cnf(int n_vars, int n_clauses, Rng& rng) {
  if (n_vars < 3) throw InvalidArgument("random_3cnf: need at least 3 variables");
  CnfFormula f;
  f.n_vars = n_vars;
  for (int c = 0; c < n_clauses; ++c) {
    std::vector<int> clause;
    while (clause.size() < 3) {
      const int v = static_cast<int>(rng.uniform_int(1, n_vars));
      if (std::none_of(clause.begin(), clause.end(), [v](int l) { return std::abs(l) == v; })) {
        clause.push_back(rng.bernoulli(0.5) ? v : -v);
      }
    }
    f.clauses.push_back(std::move(clause));
  }
  return f;
}

TspInstance random_tsp(int n, Rng& rng) {
  if (n < 1) throw InvalidArgument("random_tsp: n must be >= 1");
  Eigen::MatrixXd pts(n, 2);
  for (int i = 0; i < n; ++i) {
    pts(i, 0) = rng.uniform();
    pts(i, 1) = rng.uniform();
  }
  TspInstance inst;
  inst.dist = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) inst.dist(i, j) = i == j ? 0.0 : (pts.row(i) - pts.row(j)).norm();
  }
  return inst;
}

QpInstance random_qp(int dims, int n_constraints, Rng& rng, bool linear) {
  if (dims < 1 || n_constraints < 0) throw InvalidArgument("random_qp: bad dimensions");
  auto uniform_matrix = [&rng](int r, int c) {
    Eigen::MatrixXd m(r, c);
    for (int i = 0; i < r; ++i) {
      for (int j = 0; j < c; ++j) m(i, j) = rng.uniform(-1.0, 1.0);
    }
    return m;
  };
  QpInstance inst;
  inst.a = uniform_matrix(n_constraints, dims);
  inst.k = Eigen::VectorXd(n_constraints);
  for (int m = 0; m < n_constraints; ++m) inst.k[m] = rng.uniform(0.1, 1.0);
  if (linear) {
    // p = -A^T lambda with lambda > 0 keeps the LP bounded below by -lambda^T k.
    Eigen::VectorXd lambda(n_constraints);
    for (int m = 0; m < n_constraints; ++m) lambda[m] = rng.uniform(0.5, 1.5);
    inst.q = Eigen::MatrixXd::Zero(dims, dims);
    inst.p = -inst.a.transpose() * lambda;
  } else {
    const Eigen::MatrixXd b = uniform_matrix(dims, dims);
    inst.q = b.transpose() * b / static_cast<double>(dims) + 0.1 * Eigen::MatrixXd::Identity(dims, dims);
    inst.q = 0.5 * (inst.q + inst.q.transpose()).eval();
    inst.p = 3.0 * uniform_matrix(dims, 1);
  }
  return inst;
}

CspInstance coloring_csp(int n, const std::vector<std::pair<int, int>>& edges, int colors) {
  if (n < 0 || colors < 1) throw InvalidArgument("coloring_csp: bad sizes");
  CspInstance inst;
  std::vector<int> palette(static_cast<std::size_t>(colors));
  std::iota(palette.begin(), palette.end(), 0);
  inst.domains.assign(static_cast<std::size_t>(n), palette);
  for (auto [u, v] : edges) {
    CspConstraint c;
    c.a = static_cast<std::size_t>(u);
    c.b = static_cast<std::size_t>(v);
    for (int k = 0; k < colors; ++k) c.forbidden.push_back({k, k});
    inst.constraints.push_back(std::move(c));
  }
  inst.validate();
  return inst;
}

std::vector<std::pair<int, int>> random_graph_edges(int n, double p, Rng& rng) {
  std::vector<std::pair<int, int>> edges;
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      if (rng.bernoulli(p)) edges.emplace_back(u, v);
    }
  }
  return edges;
}

}  // namespace spikeopt
