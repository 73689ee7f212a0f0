#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "spikeopt/anneal.hpp"
#include "spikeopt/problems.hpp"
#include "spikeopt/snn.hpp"

namespace spikeopt {

/// E(x) = sum_{i != j} w_ij x_i x_j - sum_i b_i x_i.
template <typename DerivedX, typename DerivedW, typename DerivedB>
double energy(const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedW>& w,
              const Eigen::MatrixBase<DerivedB>& b) {
  if (w.rows() != w.cols() || w.rows() != x.size() || b.size() != x.size()) {
    throw InvalidArgument("energy: dimension mismatch");
  }
  const Eigen::VectorXd xd = x.template cast<double>();
  return xd.dot(w * xd) - b.dot(xd);
}

/// QUBO whose objective equals energy(x, w, b) on every binary x.
QuboInstance energy_to_qubo(const Eigen::MatrixXd& w, const Eigen::VectorXd& b);

struct WtaSubnetwork {
  std::vector<NeuronId> members;
  double inhibition_weight = -1.0;
  int k = 1;

  void validate() const;
};

/// Network of stochastic neurons sampling p(x) ~ exp(-E(x)/T) through
/// tau-hold readouts. Neuron k fires with probability
/// logistic(u_k - ln tau) when not refractory, u_k = b_k/T - 2/T sum_j w_kj x_j,
/// and stays on for tau ticks.
struct EnergyNet {
  Network network;
  Eigen::MatrixXd w;  // symmetric, zero diagonal
  Eigen::VectorXd b;
  double temperature = 1.0;
  int hold = 1;

  [[nodiscard]] Eigen::Index size() const noexcept { return b.size(); }
};

EnergyNet build_energy_net(const Eigen::MatrixXd& w, const Eigen::VectorXd& b, double temperature, int hold,
                           std::uint64_t seed = 0);

inline constexpr int kBoltzmannCap = 20;

// Exact probability of `x`; enumerates the normalizer (n <= 20).
double boltzmann_prob(const BitVector& x, const EnergyNet& net);
// Probabilities of all 2^n states, index bit i (LSB first) = x_i.
std::vector<double> boltzmann_distribution(const EnergyNet& net);

/// Histogram of tau-hold readouts over `samples` ticks after `burn_in`
/// ticks, normalized; same state indexing as boltzmann_distribution.
std::vector<double> sample_distribution(EnergyNet& net, Tick samples, Tick burn_in = 1000);

double total_variation(const std::vector<double>& p, const std::vector<double>& q);

// --- CSP --------------------------------------------------------------------

struct CspParams {
  double penalty = 4.0;          // inhibition between forbidden value pairs
  double wta_inhibition = 4.0;   // inhibition among values of one variable
  double bias = 2.0;             // excitatory drive that keeps one value active
  double temperature = 1.0;
  int hold = 2;
};

struct CspNet {
  EnergyNet energy;
  std::vector<WtaSubnetwork> subnetworks;  // one per variable, members in domain order
  double constraint_penalty = 0.0;
  CspInstance instance;
};

CspNet build_csp_network(const CspInstance& inst, const CspParams& params = {}, std::uint64_t seed = 0);

struct CspResult {
  bool success = false;
  std::vector<int> assignment;  // satisfying, or fewest violations seen
  std::size_t violations = 0;
  Tick tick_found = 0;
  Tick ticks_run = 0;
  std::uint64_t spikes_total = 0;
  std::uint64_t synaptic_events = 0;
  std::size_t max_active_per_group = 0;  // over every readout
};

/// Runs a copy of the net, reseeded with `seed`, for config.ticks ticks.
/// config.noise injects forced spikes; the hold comes from the net. Each
/// variable decodes to the value whose neuron fired most recently.
CspResult solve_csp(const CspNet& net, const AnnealConfig& config, std::uint64_t seed);
AnnealConfig default_wta_config();

// --- TSP --------------------------------------------------------------------

struct TspParams {
  double excitation_scale = 1.0;
  std::optional<double> city_penalty;  // default n * excitation_scale + 1
  double temperature = 1.0;
  int hold = 2;
};

struct TspNet {
  EnergyNet energy;
  std::vector<WtaSubnetwork> subnetworks;  // step k: neurons k*n .. k*n + n - 1
  double excitation_scale = 0.0;
  double city_penalty = 0.0;
  TspInstance instance;

  [[nodiscard]] int cities() const noexcept { return static_cast<int>(instance.n()); }
  [[nodiscard]] NeuronId neuron(int step, int city) const noexcept {
    return static_cast<NeuronId>(step * cities() + city);
  }
};

TspNet build_tsp_network(const TspInstance& inst, const TspParams& params = {}, std::uint64_t seed = 0);

// Synaptic weight matrix (pre x post, before temperature scaling) and bias.
struct SynapticForm {
  Eigen::MatrixXd s;
  Eigen::VectorXd bias;
};
SynapticForm tsp_synaptic_form(const TspInstance& inst, double excitation_scale, double city_penalty);

/// City at step k is the member of subnetwork k with the latest spike <= t
/// (ties to the lowest city). Empty when a step never fired or a city repeats.
std::optional<std::vector<int>> decode_tour(const SpikeTrace& trace, const TspNet& net, Tick t);

struct TspResult {
  bool feasible = false;
  std::vector<int> tour;
  double length = 0.0;
  Tick tick_found = 0;
  Tick ticks_run = 0;
  std::uint64_t spikes_total = 0;
  std::uint64_t synaptic_events = 0;
  std::uint64_t feasible_decodes = 0;
  std::uint64_t decodes = 0;
  std::size_t max_active_per_group = 0;
};

TspResult solve_tsp(const TspNet& net, const AnnealConfig& config, std::uint64_t seed);

}  // namespace spikeopt
