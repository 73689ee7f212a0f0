#include "spikeopt/network_json.hpp"

namespace spikeopt {

std::string to_string(NeuronKind kind) {
  switch (kind) {
    case NeuronKind::IntegrateFire: return "if";
    case NeuronKind::LifSubtractive: return "lif_subtractive";
    case NeuronKind::LifProportional: return "lif_proportional";
    case NeuronKind::Stochastic: return "stochastic";
  }
  return "unknown";
}

NeuronKind neuron_kind_from_string(const std::string& name) {
  if (name == "if") return NeuronKind::IntegrateFire;
  if (name == "lif_subtractive") return NeuronKind::LifSubtractive;
  if (name == "lif_proportional") return NeuronKind::LifProportional;
  if (name == "stochastic") return NeuronKind::Stochastic;
  throw InvalidArgument("unknown neuron kind '" + name + "'");
}

nlohmann::ordered_json network_to_json(const Network& network) {
  nlohmann::ordered_json doc;
  doc["format"] = "spikeopt.network";
  doc["version"] = kNetworkFormatVersion;
  doc["seed"] = network.seed();
  auto neurons = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < network.size(); ++i) {
    const auto& p = network.params(static_cast<NeuronId>(i));
    const auto& s = network.state(static_cast<NeuronId>(i));
    nlohmann::ordered_json n;
    n["kind"] = to_string(p.kind);
    n["threshold"] = p.threshold;
    n["leak"] = p.leak;
    n["decay"] = p.decay;
    n["reset"] = p.reset;
    n["refractory"] = p.refractory;
    n["capacitance"] = p.capacitance;
    n["bias"] = p.bias;
    n["hold"] = p.hold;
    n["potential"] = s.potential;
    n["refractory_remaining"] = s.refractory_remaining;
    neurons.push_back(std::move(n));
  }
  doc["neurons"] = std::move(neurons);
  auto synapses = nlohmann::ordered_json::array();
  for (const auto& s : network.synapses()) {
    synapses.push_back({{"pre", s.pre}, {"post", s.post}, {"weight", s.weight}, {"delay", s.delay}});
  }
  doc["synapses"] = std::move(synapses);
  auto groups = nlohmann::ordered_json::array();
  for (const auto& g : network.wta_groups()) {
    groups.push_back({{"members", g.members}, {"k", g.k}, {"window", g.window}});
  }
  doc["wta_groups"] = std::move(groups);
  return doc;
}

Network network_from_json(const nlohmann::json& doc) {
  if (doc.value("format", std::string{}) != "spikeopt.network") {
    throw InvalidArgument("network json: missing or wrong 'format'");
  }
  if (doc.at("version").get<int>() != kNetworkFormatVersion) {
    throw InvalidArgument("network json: unsupported version");
  }
  Network net(doc.at("seed").get<std::uint64_t>());
  for (const auto& n : doc.at("neurons")) {
    NeuronParams p;
    p.kind = neuron_kind_from_string(n.at("kind").get<std::string>());
    p.threshold = n.at("threshold").get<double>();
    p.leak = n.value("leak", 0.0);
    p.decay = n.value("decay", 0.0);
    p.reset = n.value("reset", 0.0);
    p.refractory = n.value("refractory", 0);
    p.capacitance = n.value("capacitance", 1.0);
    p.bias = n.value("bias", 0.0);
    p.hold = n.value("hold", 1);
    NeuronState s;
    s.potential = n.value("potential", 0.0);
    s.refractory_remaining = n.value("refractory_remaining", 0);
    net.add_neuron(p, s);
  }
  for (const auto& s : doc.at("synapses")) {
    net.add_synapse({s.at("pre").get<NeuronId>(), s.at("post").get<NeuronId>(), s.at("weight").get<double>(),
                     s.value("delay", 1)});
  }
  if (doc.contains("wta_groups")) {
    for (const auto& g : doc.at("wta_groups")) {
      net.add_wta_group({g.at("members").get<std::vector<NeuronId>>(), g.value("k", 1), g.value("window", 1)});
    }
  }
  return net;
}

}  // namespace spikeopt
