#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <unordered_set>
#include <vector>

#include "spikeopt/common.hpp"
#include "spikeopt/rng.hpp"

namespace spikeopt {

enum class NeuronKind {
  IntegrateFire,    // C dV = I, no leak
  LifSubtractive,   // V += I - leak
  LifProportional,  // V = V (1 - decay) + I
  Stochastic,       // V = I, fires with probability logistic(V - threshold)
};

struct NeuronParams {
  NeuronKind kind = NeuronKind::LifSubtractive;
  double threshold = 1.0;
  double leak = 0.0;   // subtracted every tick (LifSubtractive)
  double decay = 0.0;  // fraction of V lost every tick (LifProportional)
  double reset = 0.0;
  int refractory = 0;
  double capacitance = 1.0;  // IntegrateFire input scale
  double bias = 0.0;         // constant input added every tick
  // With hold > 1 the neuron's output stays on for `hold` ticks after its
  // latest spike and every target sees the weight for exactly those ticks
  // (shifted by the delay). Re-firing while on extends the window without
  // stacking. 1 is a plain impulse.
  int hold = 1;

  void validate() const;
};

struct NeuronState {
  double potential = 0.0;
  int refractory_remaining = 0;
  std::optional<Tick> last_spike;
};

struct Synapse {
  NeuronId pre = 0;
  NeuronId post = 0;
  double weight = 0.0;
  int delay = 1;
};

/// Decaying spontaneous-firing source: neuron i noise-fires at tick t with
/// probability mu * beta^t.
struct NoiseSchedule {
  double mu = 0.0;
  double beta = 1.0;

  void validate() const;
  [[nodiscard]] double probability(Tick t) const;
};

struct IntegrateResult {
  NeuronState state;
  bool spiked = false;
};

/// Advances one neuron by one tick. `draw` is a uniform [0,1) sample and is
/// only consulted by stochastic neurons.
IntegrateResult integrate(const NeuronState& state, const NeuronParams& params, double weighted_input,
                          std::optional<double> draw = std::nullopt);

[[nodiscard]] double logistic(double x) noexcept;

/// Firing probability of a non-refractory stochastic neuron at potential v.
[[nodiscard]] double fire_probability(const NeuronParams& params, double v) noexcept;

/// Neurons that noise-fire at `tick`. One draw per neuron, keyed by
/// (tick, neuron index).
std::vector<NeuronId> sample_noise(const NoiseSchedule& schedule, Tick tick, const CounterRng& rng,
                                   std::size_t neuron_count);

/// At most `k` members may be active at once; a member stays active for
/// `window` ticks after its spike. Simultaneous candidates are admitted in
/// ascending neuron index.
struct WtaGroup {
  std::vector<NeuronId> members;
  int k = 1;
  int window = 1;
};

struct SpikeRecord {
  Tick tick = 0;
  NeuronId neuron = 0;
  friend bool operator==(const SpikeRecord&, const SpikeRecord&) = default;
};

struct SpikeTrace {
  std::size_t neuron_count = 0;
  Tick start_tick = 0;
  Tick ticks = 0;  // covers [start_tick, start_tick + ticks)
  std::vector<SpikeRecord> records;
  std::vector<std::uint32_t> per_tick_counts;
  std::uint64_t synaptic_events = 0;
  std::uint64_t forced_spikes = 0;  // externally injected (noise, stimulation)

  [[nodiscard]] std::size_t total_spikes() const noexcept { return records.size(); }
  [[nodiscard]] Tick end_tick() const noexcept { return start_tick + ticks; }
  friend bool operator==(const SpikeTrace&, const SpikeTrace&) = default;
};

class Network {
 public:
  using Gate = std::function<bool(NeuronId, Tick)>;

  Network() = default;
  explicit Network(std::uint64_t seed) : seed_(seed) {}

  NeuronId add_neuron(const NeuronParams& params, const NeuronState& state = {});
  // Rejects unknown endpoints, delay < 1 and duplicate (pre, post) pairs.
  void add_synapse(const Synapse& synapse);
  void add_wta_group(WtaGroup group);

  [[nodiscard]] std::size_t size() const noexcept { return params_.size(); }
  [[nodiscard]] std::size_t synapse_count() const noexcept { return synapse_count_; }
  [[nodiscard]] const NeuronParams& params(NeuronId id) const { return params_.at(id); }
  [[nodiscard]] const NeuronState& state(NeuronId id) const { return states_.at(id); }
  [[nodiscard]] const std::vector<NeuronParams>& all_params() const noexcept { return params_; }
  [[nodiscard]] const std::vector<NeuronState>& all_states() const noexcept { return states_; }
  [[nodiscard]] std::span<const Synapse> outgoing(NeuronId id) const { return out_.at(id); }
  [[nodiscard]] std::vector<Synapse> synapses() const;
  [[nodiscard]] const std::vector<WtaGroup>& wta_groups() const noexcept { return groups_; }
  [[nodiscard]] bool has_synapse(NeuronId pre, NeuronId post) const;
  [[nodiscard]] std::size_t out_degree(NeuronId id) const { return out_.at(id).size(); }

  [[nodiscard]] Tick tick() const noexcept { return tick_; }
  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
  void set_seed(std::uint64_t seed) noexcept { seed_ = seed; }
  [[nodiscard]] CounterRng noise_rng() const noexcept { return CounterRng(seed_, kNoiseStream); }

  void set_params(NeuronId id, const NeuronParams& params);
  void set_potential(NeuronId id, double v) { states_.at(id).potential = v; }
  void set_bias(NeuronId id, double bias) { params_.at(id).bias = bias; }
  // Neuron cannot spike during the next `ticks` ticks.
  void suppress(NeuronId id, int ticks);
  // Neuron spikes on each of the next `ticks` ticks regardless of input.
  void clamp_on(NeuronId id, int ticks);
  // Extra admission test applied to every would-be spike before WTA gating.
  void set_gate(Gate gate) { gate_ = std::move(gate); }

  /// One synchronous tick: deliver inputs due now, integrate every neuron,
  /// admit spikes through gates, schedule outgoing deliveries. `forced`
  /// neurons spike unless refractory. Returns spiking ids in ascending order.
  const std::vector<NeuronId>& step(std::span<const NeuronId> forced = {});

  // Cumulative counters since construction.
  [[nodiscard]] std::uint64_t synaptic_events() const noexcept { return synaptic_events_; }
  [[nodiscard]] std::uint64_t spike_count() const noexcept { return spike_count_; }
  // No deliveries in flight and no held output still switched on.
  [[nodiscard]] bool quiescent() const noexcept { return in_flight_ == 0 && outputs_on_ == 0; }

  // Maps every weight onto a signed `bits`-wide integer grid (shared scale).
  void quantize_weights(int bits = 8);

  static constexpr std::uint64_t kNoiseStream = 1;
  static constexpr std::uint64_t kStochasticStream = 2;

 private:
  void ensure_horizon(int horizon);
  void schedule_edge(NeuronId id, int direction);
  [[nodiscard]] std::size_t slot(Tick t) const noexcept {
    return static_cast<std::size_t>(t % static_cast<Tick>(impulse_.size()));
  }

  std::uint64_t seed_ = 0;
  Tick tick_ = 0;
  std::vector<NeuronParams> params_;
  std::vector<NeuronState> states_;
  std::vector<std::vector<Synapse>> out_;
  std::unordered_set<std::uint64_t> pairs_;
  std::size_t synapse_count_ = 0;
  std::vector<WtaGroup> groups_;
  std::vector<int> group_of_;  // -1 when ungrouped

  // Ring buffers indexed by tick % horizon; each slot holds one value per neuron.
  std::vector<std::vector<double>> impulse_;
  std::vector<std::vector<double>> current_delta_;
  std::vector<std::vector<int>> hold_delta_;
  std::vector<double> current_;
  std::vector<int> active_holds_;
  std::uint64_t in_flight_ = 0;
  std::vector<std::uint64_t> flight_per_slot_;
  std::vector<std::vector<NeuronId>> expiry_;
  std::vector<std::uint8_t> output_on_;
  std::uint64_t outputs_on_ = 0;

  std::vector<int> clamp_;
  std::vector<std::uint8_t> forced_mask_;
  std::vector<std::uint8_t> candidate_;
  std::vector<NeuronId> spikes_;
  Gate gate_;
  std::uint64_t synaptic_events_ = 0;
  std::uint64_t spike_count_ = 0;
};

/// Runs `ticks` ticks, injecting noise fires before integration each tick.
SpikeTrace run(Network& network, Tick ticks, const std::optional<NoiseSchedule>& noise = std::nullopt);

/// Component i is 1 iff neuron i spiked within (t - tau, t].
BitVector readout_state(const SpikeTrace& trace, Tick t, Tick tau);

/// Incremental equivalent of readout_state for solvers that never
/// materialize a full trace.
class HoldReadout {
 public:
  HoldReadout(std::size_t neuron_count, Tick tau);
  void observe(std::span<const NeuronId> spikes, Tick tick);
  [[nodiscard]] bool bit(NeuronId id, Tick t) const {
    const Tick last = last_[id];
    return last != kNever && last > t - tau_ && last <= t;
  }
  [[nodiscard]] BitVector state(Tick t) const;
  [[nodiscard]] Tick tau() const noexcept { return tau_; }
  [[nodiscard]] std::optional<Tick> last_spike(NeuronId id) const {
    return last_[id] == kNever ? std::nullopt : std::optional<Tick>(last_[id]);
  }

 private:
  static constexpr Tick kNever = INT64_MIN;
  std::vector<Tick> last_;
  Tick tau_;
};

}  // namespace spikeopt
