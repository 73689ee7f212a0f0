#include "spikeopt/snn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace spikeopt {

namespace {

struct Advance {
  NeuronState state;
  bool wants_spike = false;
};

// Integration without the reset, so a gate can veto the spike and leave the
// membrane where the dynamics put it.
Advance advance(const NeuronState& state, const NeuronParams& p, double input, std::optional<double> draw) {
  Advance a{state, false};
  if (a.state.refractory_remaining > 0) {
    --a.state.refractory_remaining;
    return a;
  }
  double& v = a.state.potential;
  switch (p.kind) {
    case NeuronKind::IntegrateFire:
      v += input / p.capacitance;
      a.wants_spike = v >= p.threshold;
      break;
    case NeuronKind::LifSubtractive:
      v = v + input - p.leak;
      a.wants_spike = v >= p.threshold;
      break;
    case NeuronKind::LifProportional:
      v = v * (1.0 - p.decay) + input;
      a.wants_spike = v >= p.threshold;
      break;
    case NeuronKind::Stochastic:
      if (!draw) throw InvalidArgument("integrate: stochastic neuron needs a uniform draw");
      v = input;
      a.wants_spike = *draw < fire_probability(p, v);
      break;
  }
  return a;
}

void fire(NeuronState& s, const NeuronParams& p) {
  s.potential = p.reset;
  s.refractory_remaining = p.refractory;
}

std::uint64_t pair_key(NeuronId pre, NeuronId post) {
  return (static_cast<std::uint64_t>(pre) << 32) | post;
}

}  // namespace

void NeuronParams::validate() const {
  if (!(threshold > reset)) throw InvalidArgument("NeuronParams: threshold must exceed reset");
  if (refractory < 0) throw InvalidArgument("NeuronParams: refractory must be >= 0");
  if (!(decay >= 0.0 && decay <= 1.0)) throw InvalidArgument("NeuronParams: decay must lie in [0,1]");
  if (!(leak >= 0.0)) throw InvalidArgument("NeuronParams: leak must be >= 0");
  if (!(capacitance > 0.0)) throw InvalidArgument("NeuronParams: capacitance must be > 0");
  if (hold < 1) throw InvalidArgument("NeuronParams: hold must be >= 1");
}

void NoiseSchedule::validate() const {
  if (!(mu >= 0.0 && mu <= 1.0)) throw InvalidArgument("NoiseSchedule: mu must lie in [0,1]");
  if (!(beta > 0.0 && beta <= 1.0)) throw InvalidArgument("NoiseSchedule: beta must lie in (0,1]");
}

double NoiseSchedule::probability(Tick t) const {
  if (mu == 0.0) return 0.0;
  return mu * std::pow(beta, static_cast<double>(t));
}

double logistic(double x) noexcept {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double fire_probability(const NeuronParams& params, double v) noexcept {
  return logistic(v - params.threshold);
}

IntegrateResult integrate(const NeuronState& state, const NeuronParams& params, double weighted_input,
                          std::optional<double> draw) {
  Advance a = advance(state, params, weighted_input, draw);
  if (a.wants_spike) fire(a.state, params);
  return {a.state, a.wants_spike};
}

std::vector<NeuronId> sample_noise(const NoiseSchedule& schedule, Tick tick, const CounterRng& rng,
                                   std::size_t neuron_count) {
  std::vector<NeuronId> fired;
  const double p = schedule.probability(tick);
  if (p <= 0.0) return fired;
  for (std::size_t i = 0; i < neuron_count; ++i) {
    if (rng.uniform(static_cast<std::uint64_t>(tick), i) < p) fired.push_back(static_cast<NeuronId>(i));
  }
  return fired;
}

NeuronId Network::add_neuron(const NeuronParams& params, const NeuronState& state) {
  params.validate();
  const auto id = static_cast<NeuronId>(params_.size());
  params_.push_back(params);
  states_.push_back(state);
  out_.emplace_back();
  group_of_.push_back(-1);
  current_.push_back(0.0);
  active_holds_.push_back(0);
  output_on_.push_back(0);
  clamp_.push_back(0);
  forced_mask_.push_back(0);
  candidate_.push_back(0);
  for (auto& s : impulse_) s.push_back(0.0);
  for (auto& s : current_delta_) s.push_back(0.0);
  for (auto& s : hold_delta_) s.push_back(0);
  ensure_horizon(params.hold + 1);
  return id;
}

void Network::add_synapse(const Synapse& s) {
  if (s.pre >= size() || s.post >= size()) throw InvalidArgument("add_synapse: unknown neuron id");
  if (s.delay < 1) throw InvalidArgument("add_synapse: delay must be >= 1");
  if (!std::isfinite(s.weight)) throw InvalidArgument("add_synapse: weight must be finite");
  if (!pairs_.insert(pair_key(s.pre, s.post)).second) {
    throw InvalidArgument("add_synapse: duplicate synapse " + std::to_string(s.pre) + "->" + std::to_string(s.post));
  }
  auto& edges = out_[s.pre];
  auto pos = std::lower_bound(edges.begin(), edges.end(), s.post,
                              [](const Synapse& e, NeuronId post) { return e.post < post; });
  edges.insert(pos, s);
  ++synapse_count_;
  ensure_horizon(s.delay + params_[s.pre].hold + 1);
}

void Network::add_wta_group(WtaGroup group) {
  if (group.members.empty()) throw InvalidArgument("WtaGroup: no members");
  if (group.k < 1 || static_cast<std::size_t>(group.k) > group.members.size()) {
    throw InvalidArgument("WtaGroup: k must lie in [1, |members|]");
  }
  if (group.window < 1) throw InvalidArgument("WtaGroup: window must be >= 1");
  std::sort(group.members.begin(), group.members.end());
  const int index = static_cast<int>(groups_.size());
  for (NeuronId m : group.members) {
    if (m >= size()) throw InvalidArgument("WtaGroup: unknown neuron id");
    if (group_of_[m] != -1) throw InvalidArgument("WtaGroup: neuron already belongs to a group");
  }
  for (NeuronId m : group.members) group_of_[m] = index;
  groups_.push_back(std::move(group));
}

bool Network::has_synapse(NeuronId pre, NeuronId post) const {
  return pairs_.count(pair_key(pre, post)) != 0;
}

std::vector<Synapse> Network::synapses() const {
  std::vector<Synapse> all;
  all.reserve(synapse_count_);
  for (const auto& edges : out_) all.insert(all.end(), edges.begin(), edges.end());
  return all;
}

void Network::set_params(NeuronId id, const NeuronParams& params) {
  params.validate();
  params_.at(id) = params;
  int needed = params.hold + 1;
  for (const auto& s : out_[id]) needed = std::max(needed, s.delay + params.hold + 1);
  ensure_horizon(needed);
}

void Network::suppress(NeuronId id, int ticks) {
  auto& s = states_.at(id);
  s.refractory_remaining = std::max(s.refractory_remaining, ticks);
  clamp_[id] = 0;
}

void Network::clamp_on(NeuronId id, int ticks) { clamp_.at(id) = std::max(clamp_.at(id), ticks); }

void Network::ensure_horizon(int horizon) {
  const auto needed = static_cast<std::size_t>(std::max(horizon, 2));
  if (impulse_.size() >= needed) return;
  const std::size_t n = size();
  std::vector<std::vector<double>> impulse(needed, std::vector<double>(n, 0.0));
  std::vector<std::vector<double>> current(needed, std::vector<double>(n, 0.0));
  std::vector<std::vector<int>> holds(needed, std::vector<int>(n, 0));
  std::vector<std::uint64_t> flight(needed, 0);
  std::vector<std::vector<NeuronId>> expiry(needed);
  const std::size_t old = impulse_.size();
  for (std::size_t k = 0; k < old; ++k) {
    const Tick t = tick_ + static_cast<Tick>(k);
    const std::size_t from = static_cast<std::size_t>(t % static_cast<Tick>(old));
    const std::size_t to = static_cast<std::size_t>(t % static_cast<Tick>(needed));
    impulse[to] = std::move(impulse_[from]);
    current[to] = std::move(current_delta_[from]);
    holds[to] = std::move(hold_delta_[from]);
    flight[to] = flight_per_slot_[from];
    expiry[to] = std::move(expiry_[from]);
  }
  impulse_ = std::move(impulse);
  current_delta_ = std::move(current);
  hold_delta_ = std::move(holds);
  flight_per_slot_ = std::move(flight);
  expiry_ = std::move(expiry);
}

void Network::schedule_edge(NeuronId id, int direction) {
  for (const Synapse& syn : out_[id]) {
    const std::size_t at = slot(tick_ + syn.delay);
    current_delta_[at][syn.post] += direction * syn.weight;
    hold_delta_[at][syn.post] += direction;
    ++flight_per_slot_[at];
    ++in_flight_;
  }
}

const std::vector<NeuronId>& Network::step(std::span<const NeuronId> forced) {
  if (size() == 0) throw InvalidArgument("Network::step: empty network");
  const std::size_t n = size();
  const std::size_t now = slot(tick_);
  auto& impulse = impulse_[now];
  auto& delta = current_delta_[now];
  auto& holds = hold_delta_[now];
  in_flight_ -= flight_per_slot_[now];
  flight_per_slot_[now] = 0;

  for (NeuronId f : forced) {
    if (f >= n) throw InvalidArgument("Network::step: forced id out of range");
    forced_mask_[f] = 1;
  }

  const CounterRng stochastic(seed_, kStochasticStream);
  for (std::size_t i = 0; i < n; ++i) {
    if (holds[i] != 0 || delta[i] != 0.0) {
      active_holds_[i] += holds[i];
      current_[i] += delta[i];
      // Exact zero once nothing is held; stops rounding residue accumulating.
      if (active_holds_[i] == 0) current_[i] = 0.0;
      holds[i] = 0;
      delta[i] = 0.0;
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = params_[i];
    const double input = p.bias + impulse[i] + current_[i];
    impulse[i] = 0.0;
    auto& s = states_[i];
    if (clamp_[i] > 0) {
      --clamp_[i];
      if (s.refractory_remaining > 0) --s.refractory_remaining;
      candidate_[i] = 2;  // clamped: bypasses the custom gate
      continue;
    }
    const bool was_refractory = s.refractory_remaining > 0;
    std::optional<double> draw;
    if (p.kind == NeuronKind::Stochastic && !was_refractory) {
      draw = stochastic.uniform(static_cast<std::uint64_t>(tick_), i);
    }
    Advance a = advance(s, p, input, draw);
    s = a.state;
    candidate_[i] = (a.wants_spike || (forced_mask_[i] && !was_refractory)) ? 1 : 0;
  }

  // Admission: custom gate, then WTA capacity in ascending index order.
  std::vector<int> admitted(groups_.size(), 0);
  std::vector<int> active(groups_.size(), 0);
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    for (NeuronId m : groups_[g].members) {
      const auto& last = states_[m].last_spike;
      if (last && tick_ - *last < groups_[g].window) ++active[g];
    }
  }
  spikes_.clear();
  for (std::size_t i = 0; i < n; ++i) {
    forced_mask_[i] = 0;
    const std::uint8_t kind = candidate_[i];
    if (!kind) continue;
    candidate_[i] = 0;
    const auto id = static_cast<NeuronId>(i);
    if (gate_ && kind != 2 && !gate_(id, tick_)) continue;
    if (const int g = group_of_[i]; g >= 0) {
      const auto& last = states_[i].last_spike;
      const bool self_active = last && tick_ - *last < groups_[g].window;
      const int others = active[g] - (self_active ? 1 : 0) + admitted[g];
      if (others >= groups_[g].k) continue;
      ++admitted[g];
    }
    spikes_.push_back(id);
  }

  for (NeuronId id : spikes_) {
    auto& s = states_[id];
    fire(s, params_[id]);
    s.last_spike = tick_;
    const int hold = params_[id].hold;
    if (hold == 1) {
      for (const Synapse& syn : out_[id]) {
        const std::size_t on = slot(tick_ + syn.delay);
        impulse_[on][syn.post] += syn.weight;
        ++flight_per_slot_[on];
        ++in_flight_;
      }
    } else {
      // Held output follows the readout bit: deliver only on the off->on edge.
      if (!output_on_[id]) {
        output_on_[id] = 1;
        ++outputs_on_;
        schedule_edge(id, +1);
      }
      expiry_[slot(tick_ + hold)].push_back(id);
    }
    synaptic_events_ += out_[id].size();
  }
  // Outputs whose last spike is exactly `hold` ticks old switch off now.
  auto& expiring = expiry_[now];
  for (NeuronId id : expiring) {
    const auto& last = states_[id].last_spike;
    if (output_on_[id] && last && *last + params_[id].hold == tick_) {
      output_on_[id] = 0;
      --outputs_on_;
      schedule_edge(id, -1);
    }
  }
  expiring.clear();
  spike_count_ += spikes_.size();
  ++tick_;
  return spikes_;
}

void Network::quantize_weights(int bits) {
  if (bits < 2 || bits > 32) throw InvalidArgument("quantize_weights: bits must lie in [2,32]");
  double max_abs = 0.0;
  for (const auto& edges : out_) {
    for (const auto& s : edges) max_abs = std::max(max_abs, std::abs(s.weight));
  }
  if (max_abs == 0.0) return;
  const double levels = std::ldexp(1.0, bits - 1) - 1.0;
  const double scale = max_abs / levels;
  for (auto& edges : out_) {
    for (auto& s : edges) s.weight = std::round(s.weight / scale) * scale;
  }
}

SpikeTrace run(Network& network, Tick ticks, const std::optional<NoiseSchedule>& noise) {
  if (ticks < 1) throw InvalidArgument("run: tick budget must be >= 1");
  if (noise) noise->validate();
  SpikeTrace trace;
  trace.neuron_count = network.size();
  trace.start_tick = network.tick();
  trace.ticks = ticks;
  trace.per_tick_counts.reserve(static_cast<std::size_t>(ticks));
  const auto rng = network.noise_rng();
  const std::uint64_t events_before = network.synaptic_events();
  std::vector<NeuronId> forced;
  for (Tick k = 0; k < ticks; ++k) {
    const Tick t = network.tick();
    forced.clear();
    if (noise) forced = sample_noise(*noise, t, rng, network.size());
    trace.forced_spikes += forced.size();
    const auto& spikes = network.step(forced);
    for (NeuronId id : spikes) trace.records.push_back({t, id});
    trace.per_tick_counts.push_back(static_cast<std::uint32_t>(spikes.size()));
  }
  trace.synaptic_events = network.synaptic_events() - events_before;
  return trace;
}

BitVector readout_state(const SpikeTrace& trace, Tick t, Tick tau) {
  if (tau < 1) throw InvalidArgument("readout_state: tau must be >= 1");
  if (t < 0) throw InvalidArgument("readout_state: negative tick");
  if (t >= trace.end_tick()) throw InvalidArgument("readout_state: tick beyond trace end");
  BitVector x = BitVector::Zero(static_cast<Eigen::Index>(trace.neuron_count));
  auto first = std::upper_bound(trace.records.begin(), trace.records.end(), t - tau,
                                [](Tick v, const SpikeRecord& r) { return v < r.tick; });
  for (auto it = first; it != trace.records.end() && it->tick <= t; ++it) x[it->neuron] = 1;
  return x;
}

HoldReadout::HoldReadout(std::size_t neuron_count, Tick tau) : last_(neuron_count, kNever), tau_(tau) {
  if (tau < 1) throw InvalidArgument("HoldReadout: tau must be >= 1");
}

void HoldReadout::observe(std::span<const NeuronId> spikes, Tick tick) {
  for (NeuronId id : spikes) last_[id] = tick;
}

BitVector HoldReadout::state(Tick t) const {
  BitVector x(static_cast<Eigen::Index>(last_.size()));
  for (std::size_t i = 0; i < last_.size(); ++i) x[static_cast<Eigen::Index>(i)] = bit(static_cast<NeuronId>(i), t);
  return x;
}

}  // namespace spikeopt
