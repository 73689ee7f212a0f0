#pragma once

#include <string>

#include <json.hpp>

#include "spikeopt/snn.hpp"

namespace spikeopt {

inline constexpr int kNetworkFormatVersion = 1;

std::string to_string(NeuronKind kind);
NeuronKind neuron_kind_from_string(const std::string& name);

/// Versioned snapshot of neurons (params and state), synapses, WTA groups
/// and the seed. In-flight deliveries are not captured, so a snapshot is
/// meant for freshly built networks and fixtures.
nlohmann::ordered_json network_to_json(const Network& network);
Network network_from_json(const nlohmann::json& doc);

}  // namespace spikeopt
