#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "spikeopt/snn.hpp"

namespace spikeopt {

struct SynapticOps {
  std::uint64_t spikes = 0;
  std::uint64_t deliveries = 0;  // sum of out-degrees over spikes
  friend bool operator==(const SynapticOps&, const SynapticOps&) = default;
};

/// Recounts from the raw spike records. Throws InvalidArgument when the
/// trace does not match the network size or names an unknown neuron.
SynapticOps count_synaptic_ops(const SpikeTrace& trace, const Network& network);

/// Coefficients in SI units; zero except p_static unless calibrated.
struct EnergyModel {
  double p_static = 1e-3;        // W, idle system
  double e_source_spike = 0.0;   // J per injected spike
  double p_neuron_idle = 0.0;    // W per neuron
  double e_spike_emit = 0.0;     // J per spike
  double e_spike_transmit = 0.0; // J per synapse traversal
  double e_synaptic_event = 0.0; // J per delivered input
  double p_plasticity = 0.0;     // W while plasticity runs
  double tick_duration = 1e-3;   // s

  void validate() const;
};

nlohmann::ordered_json to_json(const EnergyModel& m);
EnergyModel energy_model_from_json(const nlohmann::json& doc);

/// Everything the estimate depends on.
struct EventCounts {
  Tick ticks = 0;
  std::uint64_t neurons = 0;
  std::uint64_t spikes = 0;
  std::uint64_t deliveries = 0;
  std::uint64_t source_spikes = 0;
  Tick plasticity_ticks = 0;
};

EventCounts count_events(const SpikeTrace& trace, const Network& network);

struct EnergyBreakdown {
  double static_j = 0.0;
  double idle_j = 0.0;
  double emit_j = 0.0;
  double transmit_j = 0.0;
  double synaptic_j = 0.0;
  double source_j = 0.0;
  double plasticity_j = 0.0;
  double total_j = 0.0;  // the components summed in the order listed
};

EnergyBreakdown estimate_energy(const EventCounts& counts, const EnergyModel& model);
EnergyBreakdown estimate_energy(const SpikeTrace& trace, const Network& network, const EnergyModel& model);

nlohmann::ordered_json to_json(const EventCounts& c);
nlohmann::ordered_json to_json(const EnergyBreakdown& b);

struct RunTimePath {
  int hops = 0;
  std::int64_t delay = 0;
  bool exact = true;  // false on cyclic networks: longest path over a DFS-acyclic subgraph, a lower bound

  [[nodiscard]] std::int64_t metric() const noexcept { return hops + delay; }
};

struct ComplexityReport {
  std::uint64_t neurons = 0;
  std::uint64_t synapses = 0;
  std::string setup_class = "O(N+S)";
  std::uint64_t setup_count = 0;  // neurons + synapses
  std::optional<RunTimePath> run_time;  // absent without inputs and outputs, or with no connecting path
};

/// Longest input-to-output path by hops + summed delays.
ComplexityReport complexity(const Network& network, const std::vector<NeuronId>& inputs = {},
                            const std::vector<NeuronId>& outputs = {});

nlohmann::ordered_json to_json(const ComplexityReport& r);

}  // namespace spikeopt
