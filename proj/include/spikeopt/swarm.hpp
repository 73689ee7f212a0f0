#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "spikeopt/anneal.hpp"
#include "spikeopt/problems.hpp"

namespace spikeopt {

// --- collaborating annealers --------------------------------------------------

struct SwarmConfig {
  int m = 8;
  Tick share_period = 20;
  AnnealConfig base;
  bool share = true;                   // false: m independent members
  bool broadcast_to_all = false;       // false: only members above the median current objective
  std::optional<int> precharge_ticks;  // broadcast length; default base.tau

  void validate() const;
};

struct MemberCheckpoint {
  Tick tick = 0;
  int member = 0;
  double best_objective = 0.0;
};

struct SyncRecord {
  Tick tick = 0;
  double global_best = 0.0;
  std::vector<double> member_bests;
  std::vector<int> receivers;
  bool broadcast = false;
};

struct SwarmResult {
  AnnealResult best;        // global best; tick_found is the first tick it was reached
  int best_member = 0;
  std::optional<Tick> ticks_to_target;
  std::vector<MemberCheckpoint> trajectories;
  std::vector<SyncRecord> syncs;
};

/// m annealers with seeds derived from `seed` (member 0 uses `seed`
/// itself). Every share_period ticks the global best is broadcast, as
/// forced spikes on its 1-bits and silence on its 0-bits, to every member
/// whose current objective is above the swarm median (or to all members
/// but the finder with broadcast_to_all).
SwarmResult collaborative_solve(const QuboInstance& inst, const SwarmConfig& config, std::uint64_t seed);

// --- oscillator PSO -------------------------------------------------------------

using Objective = std::function<double(const Eigen::VectorXd&)>;

struct Bounds {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
};

struct OsnnConfig {
  double theta = 3.3;   // rotation angle per sweep
  double delta = 0.85;  // damping
  int n_particles = 10;
  int dims = 1;
  Tick iterations = 100000;
  std::optional<double> target;  // stop once gb objective < target
  bool log = false;

  void validate() const;
};

/// Per particle (row) and dimension (column): oscillator (y, v), personal
/// best position, plus the shared global best. Decoded position is
/// x = y + (pb + gb) / 2.
struct OsnnState {
  Eigen::MatrixXd y;
  Eigen::MatrixXd v;
  Eigen::MatrixXd pb;
  Eigen::VectorXd pb_objective;
  Eigen::RowVectorXd gb;
  double gb_objective = 0.0;
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> pending;  // received spikes
  Tick sweep = 0;
  std::uint64_t spikes = 0;

  [[nodiscard]] Eigen::MatrixXd positions() const;
};

struct OsnnLogEntry {
  Tick sweep = 0;
  int particle = 0;
  int dim = 0;
  double y_before = 0.0;
  double v_before = 0.0;
  double y_after = 0.0;
  double v_after = 0.0;
  double radius = 0.0;  // |pb - gb| at the time of the update
  bool spiked = false;
  bool received = false;
};

OsnnState osnn_init(const Objective& f, const Bounds& bounds, const OsnnConfig& config, std::uint64_t seed);
/// One sweep over all oscillators in particle-index order, then pb/gb update.
void osnn_step(OsnnState& state, const OsnnConfig& config, const Objective& f,
               std::vector<OsnnLogEntry>* log = nullptr);

struct OsnnResult {
  Eigen::VectorXd x;
  double objective = 0.0;
  Tick sweeps = 0;
  std::uint64_t spikes = 0;
  std::vector<double> gb_trajectory;  // after every sweep
  std::vector<OsnnLogEntry> log;
};

OsnnResult osnn_solve(const Objective& f, const Bounds& bounds, const OsnnConfig& config, std::uint64_t seed);

// --- spiking ant colony -----------------------------------------------------

struct AcoConfig {
  int n_agents = 8;
  double rho = 0.1;
  double deposit = 1.0;
  int iterations = 200;
  double pheromone_weight = 1.0;  // exponent on tau
  double distance_weight = 2.0;   // exponent on 1/d
  double tau0 = 1.0;

  void validate() const;
};

/// tau <- (1 - rho) tau + deposit / length on every edge of each given
/// tour (both directions). Returns the total mass added.
double pheromone_update(Eigen::MatrixXd& tau, const std::vector<std::vector<int>>& tours,
                        const std::vector<double>& lengths, double rho, double deposit);

struct AcoResult {
  std::vector<int> tour;
  double length = 0.0;
  int iteration_found = 0;
  std::vector<double> best_trajectory;  // best so far after each iteration
  std::uint64_t spikes = 0;
  std::uint64_t synaptic_events = 0;
  std::uint64_t agent_tours = 0;
  std::uint64_t invalid_tours = 0;
  Eigen::MatrixXd pheromone;
};

/// Every agent is a network of n stochastic city neurons (hard WTA, long
/// refractory so each fires once per trip) and n holder neurons tracking
/// the current city; holder i drives city j with a weight built from the
/// pheromone and the distance. The firing order is the tour.
AcoResult aco_tsp_solve(const TspInstance& inst, const AcoConfig& config, std::uint64_t seed);

}  // namespace spikeopt
