#include "spikeopt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace spikeopt {

SynapticOps count_synaptic_ops(const SpikeTrace& trace, const Network& network) {
  if (trace.neuron_count != network.size()) throw InvalidArgument("count_synaptic_ops: trace and network sizes differ");
  SynapticOps ops;
  for (const auto& rec : trace.records) {
    if (rec.neuron >= network.size()) throw InvalidArgument("count_synaptic_ops: unknown neuron in trace");
    ++ops.spikes;
    ops.deliveries += network.out_degree(rec.neuron);
  }
  return ops;
}

void EnergyModel::validate() const {
  for (double c : {p_static, e_source_spike, p_neuron_idle, e_spike_emit, e_spike_transmit, e_synaptic_event,
                   p_plasticity, tick_duration}) {
    if (!(c >= 0.0) || !std::isfinite(c)) throw InvalidArgument("EnergyModel: coefficients must be finite and >= 0");
  }
}

nlohmann::ordered_json to_json(const EnergyModel& m) {
  return {{"p_static", m.p_static},
          {"e_source_spike", m.e_source_spike},
          {"p_neuron_idle", m.p_neuron_idle},
          {"e_spike_emit", m.e_spike_emit},
          {"e_spike_transmit", m.e_spike_transmit},
          {"e_synaptic_event", m.e_synaptic_event},
          {"p_plasticity", m.p_plasticity},
          {"tick_duration", m.tick_duration}};
}

EnergyModel energy_model_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw InvalidArgument("energy model: expected a JSON object");
  EnergyModel m;
  auto read = [&doc](const char* key, double& field) {
    if (!doc.contains(key)) return;
    if (!doc[key].is_number()) throw InvalidArgument(std::string("energy model: ") + key + " must be a number");
    field = doc[key].get<double>();
  };
  for (const auto& [key, value] : doc.items()) {
    static const char* known[] = {"p_static",         "e_source_spike",   "p_neuron_idle", "e_spike_emit",
                                  "e_spike_transmit", "e_synaptic_event", "p_plasticity",  "tick_duration"};
    if (std::none_of(std::begin(known), std::end(known), [&key](const char* k) { return key == k; })) {
      throw InvalidArgument("energy model: unknown key " + key);
    }
  }
  read("p_static", m.p_static);
  read("e_source_spike", m.e_source_spike);
  read("p_neuron_idle", m.p_neuron_idle);
  read("e_spike_emit", m.e_spike_emit);
  read("e_spike_transmit", m.e_spike_transmit);
  read("e_synaptic_event", m.e_synaptic_event);
  read("p_plasticity", m.p_plasticity);
  read("tick_duration", m.tick_duration);
  m.validate();
  return m;
}

EventCounts count_events(const SpikeTrace& trace, const Network& network) {
  const SynapticOps ops = count_synaptic_ops(trace, network);
  EventCounts c;
  c.ticks = trace.ticks;
  c.neurons = network.size();
  c.spikes = ops.spikes;
  c.deliveries = ops.deliveries;
  c.source_spikes = trace.forced_spikes;
  return c;
}

EnergyBreakdown estimate_energy(const EventCounts& counts, const EnergyModel& model) {
  model.validate();
  const double seconds = static_cast<double>(counts.ticks) * model.tick_duration;
  const auto deliveries = static_cast<double>(counts.deliveries);
  EnergyBreakdown b;
  b.static_j = model.p_static * seconds;
  b.idle_j = model.p_neuron_idle * static_cast<double>(counts.neurons) * seconds;
  b.emit_j = static_cast<double>(counts.spikes) * model.e_spike_emit;
  b.transmit_j = deliveries * model.e_spike_transmit;
  b.synaptic_j = deliveries * model.e_synaptic_event;
  b.source_j = static_cast<double>(counts.source_spikes) * model.e_source_spike;
  b.plasticity_j = model.p_plasticity * static_cast<double>(counts.plasticity_ticks) * model.tick_duration;
  b.total_j = b.static_j + b.idle_j + b.emit_j + b.transmit_j + b.synaptic_j + b.source_j + b.plasticity_j;
  return b;
}

EnergyBreakdown estimate_energy(const SpikeTrace& trace, const Network& network, const EnergyModel& model) {
  return estimate_energy(count_events(trace, network), model);
}

nlohmann::ordered_json to_json(const EventCounts& c) {
  return {{"ticks", c.ticks},
          {"neurons", c.neurons},
          {"spikes", c.spikes},
          {"deliveries", c.deliveries},
          {"source_spikes", c.source_spikes},
          {"plasticity_ticks", c.plasticity_ticks}};
}

nlohmann::ordered_json to_json(const EnergyBreakdown& b) {
  return {{"static_j", b.static_j},   {"idle_j", b.idle_j},         {"emit_j", b.emit_j},
          {"transmit_j", b.transmit_j}, {"synaptic_j", b.synaptic_j}, {"source_j", b.source_j},
          {"plasticity_j", b.plasticity_j}, {"total_j", b.total_j}};
}

ComplexityReport complexity(const Network& network, const std::vector<NeuronId>& inputs,
                            const std::vector<NeuronId>& outputs) {
  ComplexityReport r;
  r.neurons = network.size();
  r.synapses = network.synapse_count();
  r.setup_count = r.neurons + r.synapses;
  if (inputs.empty() || outputs.empty()) return r;
  const std::size_t n = network.size();
  for (NeuronId id : inputs) {
    if (id >= n) throw InvalidArgument("complexity: input neuron out of range");
  }
  for (NeuronId id : outputs) {
    if (id >= n) throw InvalidArgument("complexity: output neuron out of range");
  }

  // Iterative DFS from the inputs; back edges are dropped, the rest is a DAG
  // whose reverse finishing order is topological.
  enum : std::uint8_t { kWhite, kGrey, kBlack };
  std::vector<std::uint8_t> color(n, kWhite);
  std::vector<NeuronId> finished;
  bool cyclic = false;
  for (NeuronId root : inputs) {
    if (color[root] != kWhite) continue;
    std::vector<std::pair<NeuronId, std::size_t>> stack{{root, 0}};
    color[root] = kGrey;
    while (!stack.empty()) {
      auto& [u, next] = stack.back();
      const auto out = network.outgoing(u);
      if (next < out.size()) {
        const NeuronId v = out[next++].post;
        if (color[v] == kGrey) cyclic = true;
        else if (color[v] == kWhite) {
          color[v] = kGrey;
          stack.emplace_back(v, 0);
        }
      } else {
        color[u] = kBlack;
        finished.push_back(u);
        stack.pop_back();
      }
    }
  }
  std::vector<std::size_t> order(n, 0);
  for (std::size_t i = 0; i < finished.size(); ++i) order[finished[i]] = finished.size() - i;  // topological rank

  constexpr std::int64_t kNone = std::numeric_limits<std::int64_t>::min();
  std::vector<std::int64_t> best(n, kNone);
  std::vector<int> hops(n, 0);
  std::vector<std::int64_t> delay(n, 0);
  for (NeuronId id : inputs) best[id] = 0;
  for (auto it = finished.rbegin(); it != finished.rend(); ++it) {
    const NeuronId u = *it;
    if (best[u] == kNone) continue;
    for (const auto& s : network.outgoing(u)) {
      const NeuronId v = s.post;
      if (order[v] <= order[u]) continue;  // back edge
      const std::int64_t cand = best[u] + 1 + s.delay;
      if (cand > best[v]) {
        best[v] = cand;
        hops[v] = hops[u] + 1;
        delay[v] = delay[u] + s.delay;
      }
    }
  }
  std::optional<RunTimePath> path;
  for (NeuronId id : outputs) {
    if (best[id] == kNone) continue;
    if (!path || best[id] > path->metric()) path = RunTimePath{hops[id], delay[id], !cyclic};
  }
  r.run_time = path;
  return r;
}

nlohmann::ordered_json to_json(const ComplexityReport& r) {
  nlohmann::ordered_json j{{"neurons", r.neurons},
                           {"synapses", r.synapses},
                           {"setup_time", {{"class", r.setup_class}, {"count", r.setup_count}}}};
  if (r.run_time) {
    j["run_time"] = {{"hops", r.run_time->hops},
                     {"delay", r.run_time->delay},
                     {"metric", r.run_time->metric()},
                     {"exact", r.run_time->exact}};
  } else {
    j["run_time"] = nullptr;
  }
  return j;
}

}  // namespace spikeopt
