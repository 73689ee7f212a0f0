#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "spikeopt/problems.hpp"
#include "spikeopt/snn.hpp"

namespace spikeopt {

struct RefractoryRange {
  int min = 0;
  int max = 0;
};

struct AnnealConfig {
  NoiseSchedule noise{0.05, 0.99995};
  Tick ticks = 50000;
  int tau = 2;         // readout hold
  double decay = 1.0;  // leak factor; 1 makes the potential memoryless
  double threshold = 1.0;
  RefractoryRange refractory_range{1, 3};
  std::optional<int> flip_cap;     // max 0->1 readout flips per tick
  std::optional<double> target;    // stop as soon as best <= target

  void validate() const;
};

inline constexpr Tick kCheckpointTicks = 100;

struct AnnealResult {
  BitVector best_solution;
  double best_objective = 0.0;
  Tick tick_found = 0;
  Tick ticks_run = 0;
  std::uint64_t spikes_total = 0;
  std::uint64_t synaptic_events = 0;
  std::vector<double> objective_trajectory;  // best so far at each checkpoint
};

/// One LIF neuron per variable; synapse i->j carries -Q_ij (both directions
/// for i < j), bias is -Q_jj, every synapse has delay 1 and holds for tau.
Network build_qubo_network(const QuboInstance& inst, const AnnealConfig& config, std::uint64_t seed = 0);

// Tabu length drawn after a readout flip; 0 disables.
int stochastic_refractory(const RefractoryRange& range, Rng& rng);

/// Seed of derived run `index` (restart r, swarm member i). Index 0 maps
/// to the seed itself, so a single run reproduces plain anneal.
std::uint64_t derived_seed(std::uint64_t seed, std::uint64_t index);

/// Tick-by-tick annealer over a QUBO network. Not movable: the network's
/// gate refers back to this object.
class QuboAnnealer {
 public:
  QuboAnnealer(const QuboInstance& inst, const AnnealConfig& config, std::uint64_t seed);
  QuboAnnealer(const QuboAnnealer&) = delete;
  QuboAnnealer& operator=(const QuboAnnealer&) = delete;

  void step();
  // 1-bits spike on each of the next `ticks` ticks, 0-bits are silenced.
  void precharge(const BitVector& x, int ticks = 1);
  [[nodiscard]] bool done() const;

  [[nodiscard]] Tick tick() const noexcept { return network_.tick(); }
  [[nodiscard]] const BitVector& state() const noexcept { return state_; }
  [[nodiscard]] double objective() const noexcept { return objective_; }
  [[nodiscard]] const BitVector& best_solution() const noexcept { return best_; }
  [[nodiscard]] double best_objective() const noexcept { return best_objective_; }
  [[nodiscard]] Tick tick_found() const noexcept { return tick_found_; }
  [[nodiscard]] const Network& network() const noexcept { return network_; }
  // Flip ticks per variable, for tabu checks.
  [[nodiscard]] const std::vector<std::vector<Tick>>& flip_log() const noexcept { return flips_; }
  void keep_flip_log(bool on) { log_flips_ = on; }

  [[nodiscard]] AnnealResult result() const;

 private:
  void apply_flip(Eigen::Index v, bool on);

  const QuboInstance& inst_;
  AnnealConfig config_;
  Network network_;
  HoldReadout readout_;
  Rng tabu_rng_;
  Eigen::MatrixXd coupling_;  // symmetric, zero diagonal
  Eigen::VectorXd field_;     // objective change for switching each bit on
  BitVector state_;
  double objective_ = 0.0;
  BitVector best_;
  double best_objective_ = 0.0;
  Tick tick_found_ = 0;
  bool started_ = false;
  std::vector<double> trajectory_;
  int turned_on_ = 0;
  Tick gate_tick_ = -1;
  bool log_flips_ = false;
  std::vector<std::vector<Tick>> flips_;
  std::vector<NeuronId> forced_;
};

AnnealResult anneal(const QuboInstance& inst, const AnnealConfig& config, std::uint64_t seed);

/// Restarts anneal; run r+1 starts from run r's best, injected as forced
/// spikes on the first tick. The noise schedule restarts with each run.
AnnealResult iterated_anneal(const QuboInstance& inst, const AnnealConfig& config, int restarts, std::uint64_t seed);

struct SatParams {
  double clause_weight = 2.0;  // clause -> variable drive per literal
  double var_bias = -5.0;
  double self_weight = 10.0; // keeps a variable in its current state
};

/// Stochastic variable neurons plus one unsatisfied-clause detector per
/// clause. The objective is the number of unsatisfied clauses.
Network build_sat_network(const CnfFormula& f, const SatParams& params, int tau = 1, std::uint64_t seed = 0);
AnnealConfig default_sat_config();
AnnealResult solve_sat(const CnfFormula& f, const AnnealConfig& config, std::uint64_t seed,
                       const SatParams& params = {});

}  // namespace spikeopt
