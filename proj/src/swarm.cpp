#include "spikeopt/swarm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

namespace spikeopt {

void SwarmConfig::validate() const {
  if (m < 1) throw InvalidArgument("SwarmConfig: m must be >= 1");
  if (share_period < 1) throw InvalidArgument("SwarmConfig: share_period must be >= 1");
  if (precharge_ticks && *precharge_ticks < 1) throw InvalidArgument("SwarmConfig: precharge_ticks must be >= 1");
  base.validate();
}

SwarmResult collaborative_solve(const QuboInstance& inst, const SwarmConfig& config, std::uint64_t seed) {
  config.validate();
  inst.validate();
  std::vector<std::unique_ptr<QuboAnnealer>> members;
  members.reserve(static_cast<std::size_t>(config.m));
  AnnealConfig member_config = config.base;
  member_config.target.reset();  // the swarm decides when to stop
  for (int i = 0; i < config.m; ++i) {
    members.push_back(std::make_unique<QuboAnnealer>(inst, member_config, derived_seed(seed, static_cast<std::uint64_t>(i))));
  }
  const int charge = config.precharge_ticks.value_or(config.base.tau);

  SwarmResult out;
  BitVector global = BitVector::Zero(inst.n());
  double global_obj = std::numeric_limits<double>::infinity();
  int global_member = 0;
  Tick found = 0;
  std::vector<double> trajectory;

  Tick t = 0;
  for (; t < config.base.ticks; ++t) {
    for (int i = 0; i < config.m; ++i) {
      auto& member = *members[static_cast<std::size_t>(i)];
      member.step();
      if (member.best_objective() < global_obj) {
        global_obj = member.best_objective();
        global = member.best_solution();
        global_member = i;
        found = t;
      }
    }
    if (config.base.target && !out.ticks_to_target && global_obj <= *config.base.target) out.ticks_to_target = t;

    if ((t + 1) % kCheckpointTicks == 0) {
      trajectory.push_back(global_obj);
      for (int i = 0; i < config.m; ++i) {
        out.trajectories.push_back({t, i, members[static_cast<std::size_t>(i)]->best_objective()});
      }
    }
    if (config.m > 1 && (t + 1) % config.share_period == 0) {
      SyncRecord rec;
      rec.tick = t;
      rec.global_best = global_obj;
      for (const auto& member : members) rec.member_bests.push_back(member->best_objective());
      if (config.share) {
        // Members sitting above the median current objective restart from
        // the global best; the rest keep exploring.
        std::vector<double> current;
        for (const auto& member : members) current.push_back(member->objective());
        std::vector<double> sorted = current;
        std::nth_element(sorted.begin(), sorted.begin() + config.m / 2, sorted.end());
        const double median = sorted[static_cast<std::size_t>(config.m / 2)];
        for (int i = 0; i < config.m; ++i) {
          if (i == global_member) continue;
          if (!config.broadcast_to_all && current[static_cast<std::size_t>(i)] <= median) continue;
          members[static_cast<std::size_t>(i)]->precharge(global, charge);
          rec.receivers.push_back(i);
        }
        rec.broadcast = !rec.receivers.empty();
      }
      out.syncs.push_back(std::move(rec));
    }
    if (out.ticks_to_target) {
      ++t;
      break;
    }
  }

  AnnealResult& best = out.best;
  best.best_solution = global;
  best.best_objective = qubo_objective(inst, global);
  best.tick_found = found;
  best.ticks_run = t;
  for (const auto& member : members) {
    best.spikes_total += member->network().spike_count();
    best.synaptic_events += member->network().synaptic_events();
  }
  best.objective_trajectory = std::move(trajectory);
  if (t % kCheckpointTicks != 0) best.objective_trajectory.push_back(global_obj);
  out.best_member = global_member;
  return out;
}

// --- OSNN ---------------------------------------------------------------------

void OsnnConfig::validate() const {
  if (!(delta > 0.0 && delta <= 1.0)) throw InvalidArgument("OsnnConfig: delta must lie in (0,1]");
  if (!std::isfinite(theta)) throw InvalidArgument("OsnnConfig: theta must be finite");
  if (n_particles < 1) throw InvalidArgument("OsnnConfig: n_particles must be >= 1");
  if (dims < 1) throw InvalidArgument("OsnnConfig: dims must be >= 1");
  if (iterations < 0) throw InvalidArgument("OsnnConfig: iterations must be >= 0");
}

Eigen::MatrixXd OsnnState::positions() const {
  Eigen::MatrixXd mid = pb;
  mid.rowwise() += gb;
  return y + 0.5 * mid;
}

namespace {

void update_bests(OsnnState& s, const Objective& f) {
  const Eigen::MatrixXd x = s.positions();
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const Eigen::VectorXd xi = x.row(i).transpose();
    const double value = f(xi);
    if (value < s.pb_objective[i]) {
      s.pb_objective[i] = value;
      s.pb.row(i) = x.row(i);
    }
  }
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    if (s.pb_objective[i] < s.gb_objective) {
      s.gb_objective = s.pb_objective[i];
      s.gb = s.pb.row(i);
    }
  }
}

}  // namespace

OsnnState osnn_init(const Objective& f, const Bounds& bounds, const OsnnConfig& config, std::uint64_t seed) {
  config.validate();
  const int n = config.n_particles;
  const int d = config.dims;
  if (bounds.lo.size() != d || bounds.hi.size() != d) throw InvalidArgument("osnn_init: bounds dimension mismatch");
  if ((bounds.hi.array() < bounds.lo.array()).any()) throw InvalidArgument("osnn_init: lo > hi");
  Rng rng(seed);
  OsnnState s;
  s.pb.resize(n, d);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < d; ++k) s.pb(i, k) = rng.uniform(bounds.lo[k], bounds.hi[k]);
  }
  s.pb_objective.resize(n);
  for (int i = 0; i < n; ++i) s.pb_objective[i] = f(s.pb.row(i).transpose());
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < n; ++i) {
    if (s.pb_objective[i] < s.pb_objective[best]) best = i;
  }
  s.gb = s.pb.row(best);
  s.gb_objective = s.pb_objective[best];
  // x0 = pb, so y0 = (pb - gb) / 2.
  s.y = 0.5 * (s.pb.rowwise() - s.gb);
  s.v.resize(n, d);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < d; ++k) {
      const double r = std::abs(s.pb(i, k) - s.gb[k]);
      s.v(i, k) = rng.uniform(-r, r);
    }
  }
  s.pending = decltype(s.pending)::Zero(n, d);
  return s;
}

void osnn_step(OsnnState& s, const OsnnConfig& config, const Objective& f, std::vector<OsnnLogEntry>* log) {
  const Eigen::Index n = s.y.rows();
  const Eigen::Index d = s.y.cols();
  const double c = std::cos(config.theta);
  const double sn = std::sin(config.theta);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < d; ++k) {
      double& y = s.y(i, k);
      double& v = s.v(i, k);
      const double y0 = y;
      const double v0 = v;
      const double q = 0.5 * (s.pb(i, k) - s.gb[k]);
      const double radius = std::abs(s.pb(i, k) - s.gb[k]);
      const bool spiked = std::abs(y) >= radius;
      const bool received = s.pending(i, k) != 0;
      s.pending(i, k) = 0;
      if (spiked || received) {
        v = v - (y - q);
        y = q;
        if (spiked) {
          s.pending((i + 1) % n, k) = 1;
          ++s.spikes;
        }
      } else {
        y = config.delta * (c * y0 - sn * v0);
        v = config.delta * (sn * y0 + c * v0);
      }
      if (log) log->push_back({s.sweep, static_cast<int>(i), static_cast<int>(k), y0, v0, y, v, radius, spiked, received && !spiked});
    }
  }
  update_bests(s, f);
  ++s.sweep;
}

OsnnResult osnn_solve(const Objective& f, const Bounds& bounds, const OsnnConfig& config, std::uint64_t seed) {
  OsnnState s = osnn_init(f, bounds, config, seed);
  OsnnResult r;
  for (Tick it = 0; it < config.iterations; ++it) {
    if (config.target && s.gb_objective < *config.target) break;
    osnn_step(s, config, f, config.log ? &r.log : nullptr);
    r.gb_trajectory.push_back(s.gb_objective);
  }
  r.x = s.gb.transpose();
  r.objective = s.gb_objective;
  r.sweeps = s.sweep;
  r.spikes = s.spikes;
  return r;
}

// --- ACO ----------------------------------------------------------------------

void AcoConfig::validate() const {
  if (n_agents < 1) throw InvalidArgument("AcoConfig: n_agents must be >= 1");
  if (!(rho > 0.0 && rho < 1.0)) throw InvalidArgument("AcoConfig: rho must lie in (0,1)");
  if (!(deposit >= 0.0)) throw InvalidArgument("AcoConfig: deposit must be >= 0");
  if (iterations < 1) throw InvalidArgument("AcoConfig: iterations must be >= 1");
  if (!(pheromone_weight >= 0.0) || !(distance_weight >= 0.0)) {
    throw InvalidArgument("AcoConfig: weights must be >= 0");
  }
  if (!(tau0 > 0.0)) throw InvalidArgument("AcoConfig: tau0 must be > 0");
}

double pheromone_update(Eigen::MatrixXd& tau, const std::vector<std::vector<int>>& tours,
                        const std::vector<double>& lengths, double rho, double deposit) {
  if (tours.size() != lengths.size()) throw InvalidArgument("pheromone_update: tours/lengths mismatch");
  tau *= (1.0 - rho);
  double added = 0.0;
  for (std::size_t t = 0; t < tours.size(); ++t) {
    const auto& tour = tours[t];
    if (!(lengths[t] > 0.0)) throw InvalidArgument("pheromone_update: tour length must be > 0");
    const double delta = deposit / lengths[t];
    for (std::size_t k = 0; k < tour.size(); ++k) {
      const int a = tour[k];
      const int b = tour[(k + 1) % tour.size()];
      tau(a, b) += delta;
      tau(b, a) += delta;
      added += 2.0 * delta;
    }
  }
  return added;
}

namespace {

constexpr double kSilentBias = -10.0;  // city input with no holder active
constexpr double kTopDrive = -2.0;     // input of the most attractive next city
constexpr double kFloor = -4.0;        // weakest attraction relative to the top

Network build_agent(const Eigen::MatrixXd& drive, int refractory, std::uint64_t seed) {
  const int n = static_cast<int>(drive.rows());
  Network net(seed);
  NeuronParams city;
  city.kind = NeuronKind::Stochastic;
  city.threshold = 0.0;
  city.reset = -1.0;
  city.bias = kSilentBias;
  city.refractory = refractory;
  for (int c = 0; c < n; ++c) net.add_neuron(city);
  NeuronParams holder;
  holder.kind = NeuronKind::LifProportional;
  holder.decay = 1.0;
  holder.threshold = 1.0;
  holder.reset = 0.0;
  for (int c = 0; c < n; ++c) net.add_neuron(holder);
  for (int i = 0; i < n; ++i) {
    const auto h = static_cast<NeuronId>(n + i);
    net.add_synapse({static_cast<NeuronId>(i), h, 2.0, 1});
    net.add_synapse({h, h, 2.0, 1});
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      net.add_synapse({static_cast<NeuronId>(j), h, -4.0, 1});
      net.add_synapse({h, static_cast<NeuronId>(j), drive(i, j) - kSilentBias, 1});
    }
  }
  WtaGroup g;
  for (int c = 0; c < n; ++c) g.members.push_back(static_cast<NeuronId>(c));
  g.k = 1;
  g.window = 2;  // holders need a tick to switch over
  net.add_wta_group(std::move(g));
  return net;
}

// drive(i, j): input city j receives while the agent sits at city i.
Eigen::MatrixXd agent_drive(const TspInstance& inst, const Eigen::MatrixXd& tau, const AcoConfig& cfg) {
  const Eigen::Index n = inst.n();
  Eigen::MatrixXd g = Eigen::MatrixXd::Constant(n, n, kSilentBias);
  constexpr double eps = 1e-12;
  for (Eigen::Index i = 0; i < n; ++i) {
    double tmax = 0.0;
    double dmin = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      tmax = std::max(tmax, tau(i, j));
      dmin = std::min(dmin, inst.dist(i, j));
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      double s = cfg.distance_weight * std::log((dmin + eps) / (inst.dist(i, j) + eps));
      if (cfg.pheromone_weight > 0.0) {
        s += tau(i, j) > 0.0 ? cfg.pheromone_weight * std::log(tau(i, j) / tmax) : kFloor;
      }
      g(i, j) = kTopDrive + std::max(s, kFloor);
    }
  }
  return g;
}

}  // namespace

AcoResult aco_tsp_solve(const TspInstance& inst, const AcoConfig& config, std::uint64_t seed) {
  config.validate();
  inst.validate();
  const int n = static_cast<int>(inst.n());
  if (n < 3) throw InvalidArgument("aco_tsp_solve: need at least 3 cities");
  const Tick cap = 2000 * static_cast<Tick>(n);
  AcoResult r;
  r.pheromone = Eigen::MatrixXd::Constant(n, n, config.tau0);
  r.pheromone.diagonal().setZero();
  r.length = std::numeric_limits<double>::infinity();
  std::uint64_t trip = 0;
  for (int it = 0; it < config.iterations; ++it) {
    const Eigen::MatrixXd drive = agent_drive(inst, r.pheromone, config);
    std::vector<int> iter_best;
    double iter_len = std::numeric_limits<double>::infinity();
    for (int a = 0; a < config.n_agents; ++a, ++trip) {
      Network net = build_agent(drive, static_cast<int>(cap), derived_seed(seed, trip + 1));
      std::vector<int> tour;
      net.clamp_on(static_cast<NeuronId>(trip % static_cast<std::uint64_t>(n)), 1);
      while (static_cast<int>(tour.size()) < n && net.tick() < cap) {
        for (NeuronId id : net.step()) {
          if (id < static_cast<NeuronId>(n)) tour.push_back(static_cast<int>(id));
        }
      }
      r.spikes += net.spike_count();
      r.synaptic_events += net.synaptic_events();
      ++r.agent_tours;
      if (!is_permutation_of_range(tour, static_cast<std::size_t>(n))) {
        ++r.invalid_tours;
        continue;
      }
      const double len = tour_length(inst, tour);
      if (len < iter_len) {
        iter_len = len;
        iter_best = tour;
      }
    }
    if (!iter_best.empty()) {
      if (iter_len > 0.0) pheromone_update(r.pheromone, {iter_best}, {iter_len}, config.rho, config.deposit);
      if (iter_len < r.length) {
        r.length = iter_len;
        r.tour = iter_best;
        r.iteration_found = it;
      }
    }
    r.best_trajectory.push_back(r.length);
  }
  return r;
}

}  // namespace spikeopt
