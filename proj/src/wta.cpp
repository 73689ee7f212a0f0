#include "spikeopt/wta.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace spikeopt {

namespace {

// Stochastic sampling network from synaptic weights (pre x post) and bias,
// both already divided by the temperature.
Network make_sampler(const Eigen::MatrixXd& s, const Eigen::VectorXd& bias, int hold, std::uint64_t seed) {
  if (hold < 1) throw InvalidArgument("energy net: hold must be >= 1");
  Network net(seed);
  NeuronParams p;
  p.kind = NeuronKind::Stochastic;
  p.threshold = std::log(static_cast<double>(hold));
  p.reset = p.threshold - 1.0;
  p.refractory = hold - 1;
  p.hold = hold;
  for (Eigen::Index i = 0; i < bias.size(); ++i) {
    p.bias = bias[i];
    net.add_neuron(p);
  }
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    for (Eigen::Index j = 0; j < s.cols(); ++j) {
      if (i != j && s(i, j) != 0.0) net.add_synapse({static_cast<NeuronId>(i), static_cast<NeuronId>(j), s(i, j), 1});
    }
  }
  return net;
}

void check_temperature(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw InvalidArgument("temperature must be > 0");
}

std::uint64_t state_index(const BitVector& x) {
  std::uint64_t idx = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) idx |= static_cast<std::uint64_t>(x[i] != 0) << i;
  return idx;
}

// Largest number of simultaneously active readout bits inside one group.
std::size_t max_active(const std::vector<WtaSubnetwork>& groups, const HoldReadout& readout, Tick t) {
  std::size_t worst = 0;
  for (const auto& g : groups) {
    std::size_t active = 0;
    for (NeuronId m : g.members) active += readout.bit(m, t) ? 1 : 0;
    worst = std::max(worst, active);
  }
  return worst;
}

void add_groups(Network& net, const std::vector<WtaSubnetwork>& groups, int window) {
  for (const auto& g : groups) net.add_wta_group({g.members, g.k, window});
}

}  // namespace

QuboInstance energy_to_qubo(const Eigen::MatrixXd& w, const Eigen::VectorXd& b) {
  if (w.rows() != w.cols() || w.rows() != b.size()) throw InvalidArgument("energy_to_qubo: dimension mismatch");
  QuboInstance q;
  q.q = Eigen::MatrixXd::Zero(w.rows(), w.cols());
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    q.q(i, i) = -b[i] + w(i, i);
    for (Eigen::Index j = i + 1; j < w.cols(); ++j) q.q(i, j) = w(i, j) + w(j, i);
  }
  return q;
}

void WtaSubnetwork::validate() const {
  if (!(inhibition_weight < 0.0)) throw InvalidArgument("WtaSubnetwork: inhibition_weight must be negative");
  if (k < 1 || static_cast<std::size_t>(k) > members.size()) throw InvalidArgument("WtaSubnetwork: k out of range");
}

EnergyNet build_energy_net(const Eigen::MatrixXd& w, const Eigen::VectorXd& b, double temperature, int hold,
                           std::uint64_t seed) {
  check_temperature(temperature);
  if (w.rows() != w.cols() || w.rows() != b.size()) throw InvalidArgument("build_energy_net: dimension mismatch");
  if (b.size() < 1) throw InvalidArgument("build_energy_net: empty net");
  if (w != w.transpose()) throw InvalidArgument("build_energy_net: W must be symmetric");
  if (!w.diagonal().isZero(0.0)) throw InvalidArgument("build_energy_net: W must have a zero diagonal");
  EnergyNet net{make_sampler(-2.0 * w / temperature, b / temperature, hold, seed), w, b, temperature, hold};
  return net;
}

std::vector<double> boltzmann_distribution(const EnergyNet& net) {
  const Eigen::Index n = net.size();
  if (n > kBoltzmannCap) throw SizeCapError("boltzmann: n exceeds the enumeration cap of 20");
  const std::uint64_t states = std::uint64_t{1} << n;
  std::vector<double> logp(states);
  BitVector x(n);
  for (std::uint64_t s = 0; s < states; ++s) {
    for (Eigen::Index i = 0; i < n; ++i) x[i] = (s >> i) & 1U;
    logp[s] = -energy(x, net.w, net.b) / net.temperature;
  }
  const double top = *std::max_element(logp.begin(), logp.end());
  double z = 0.0;
  for (double& v : logp) {
    v = std::exp(v - top);
    z += v;
  }
  for (double& v : logp) v /= z;
  return logp;
}

double boltzmann_prob(const BitVector& x, const EnergyNet& net) {
  if (x.size() != net.size()) throw InvalidArgument("boltzmann_prob: length mismatch");
  return boltzmann_distribution(net)[state_index(x)];
}

std::vector<double> sample_distribution(EnergyNet& net, Tick samples, Tick burn_in) {
  if (net.size() > kBoltzmannCap) throw SizeCapError("sample_distribution: n exceeds the cap of 20");
  if (samples < 1) throw InvalidArgument("sample_distribution: samples must be >= 1");
  const auto n = static_cast<std::size_t>(net.size());
  HoldReadout readout(n, net.hold);
  std::vector<double> hist(std::size_t{1} << n, 0.0);
  std::uint64_t idx = 0;
  for (Tick k = 0; k < burn_in + samples; ++k) {
    const Tick t = net.network.tick();
    const auto& spikes = net.network.step();
    readout.observe(spikes, t);
    if (k < burn_in) continue;
    idx = 0;
    for (std::size_t i = 0; i < n; ++i) idx |= static_cast<std::uint64_t>(readout.bit(static_cast<NeuronId>(i), t)) << i;
    hist[idx] += 1.0;
  }
  for (double& h : hist) h /= static_cast<double>(samples);
  return hist;
}

double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) throw InvalidArgument("total_variation: size mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) sum += std::abs(p[i] - q[i]);
  return 0.5 * sum;
}

// --- CSP ----------------------------------------------------------------------

AnnealConfig default_wta_config() {
  AnnealConfig c;
  c.ticks = 100000;
  c.noise = {0.0, 1.0};
  c.refractory_range = {0, 0};
  return c;
}

CspNet build_csp_network(const CspInstance& inst, const CspParams& params, std::uint64_t seed) {
  inst.validate();
  check_temperature(params.temperature);
  if (!(params.penalty > 0.0) || !(params.wta_inhibition > 0.0)) {
    throw InvalidArgument("build_csp_network: penalties must be > 0");
  }
  const CspIndex index(inst);
  std::vector<std::size_t> offset(inst.n() + 1, 0);
  for (std::size_t v = 0; v < inst.n(); ++v) offset[v + 1] = offset[v] + inst.domains[v].size();
  const auto total = static_cast<Eigen::Index>(offset.back());

  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(total, total);
  CspNet net;
  for (std::size_t v = 0; v < inst.n(); ++v) {
    WtaSubnetwork g;
    g.inhibition_weight = -params.wta_inhibition;
    for (std::size_t a = offset[v]; a < offset[v + 1]; ++a) {
      g.members.push_back(static_cast<NeuronId>(a));
      for (std::size_t b = offset[v]; b < offset[v + 1]; ++b) {
        if (a != b) s(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = -params.wta_inhibition;
      }
    }
    net.subnetworks.push_back(std::move(g));
  }
  for (const auto& c : inst.constraints) {
    for (auto [va, vb] : c.forbidden) {
      const auto i = static_cast<Eigen::Index>(offset[c.a] + index.value_index(c.a, va));
      const auto j = static_cast<Eigen::Index>(offset[c.b] + index.value_index(c.b, vb));
      s(i, j) -= params.penalty;
      s(j, i) -= params.penalty;
    }
  }
  const Eigen::VectorXd bias = Eigen::VectorXd::Constant(total, params.bias);
  const double t = params.temperature;
  net.energy = EnergyNet{make_sampler(s / t, bias / t, params.hold, seed), -0.5 * s, bias, t, params.hold};
  add_groups(net.energy.network, net.subnetworks, params.hold);
  net.constraint_penalty = params.penalty;
  net.instance = inst;
  return net;
}

CspResult solve_csp(const CspNet& net, const AnnealConfig& config, std::uint64_t seed) {
  config.validate();
  const CspInstance& inst = net.instance;
  const CspIndex index(inst);
  Network network = net.energy.network;
  network.set_seed(seed);
  const std::size_t n = network.size();
  HoldReadout readout(n, net.energy.hold);
  std::vector<Tick> last(n, std::numeric_limits<Tick>::min());
  std::vector<std::size_t> chosen(inst.n(), 0);
  std::vector<std::uint8_t> assigned(inst.n(), 0);

  CspResult result;
  std::size_t best_score = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> best(inst.n(), 0);
  std::vector<NeuronId> forced;
  for (Tick k = 0; k < config.ticks; ++k) {
    const Tick t = network.tick();
    forced = sample_noise(config.noise, t, network.noise_rng(), n);
    const auto& spikes = network.step(forced);
    readout.observe(spikes, t);
    bool changed = false;
    for (NeuronId id : spikes) {
      last[id] = t;
      changed = true;
    }
    result.max_active_per_group = std::max(result.max_active_per_group, max_active(net.subnetworks, readout, t));
    if (!changed) continue;
    std::size_t unassigned = 0;
    for (std::size_t v = 0; v < inst.n(); ++v) {
      const auto& members = net.subnetworks[v].members;
      Tick latest = std::numeric_limits<Tick>::min();
      std::size_t pick = 0;
      for (std::size_t a = 0; a < members.size(); ++a) {
        if (last[members[a]] > latest) {
          latest = last[members[a]];
          pick = a;
        }
      }
      assigned[v] = latest != std::numeric_limits<Tick>::min();
      chosen[v] = pick;
      unassigned += assigned[v] ? 0 : 1;
    }
    const std::size_t score = unassigned + index.violations(chosen);
    if (score < best_score) {
      best_score = score;
      best = chosen;
      result.tick_found = t;
    }
    if (best_score == 0) break;
    if (config.target && static_cast<double>(best_score) <= *config.target) break;
  }
  result.ticks_run = network.tick();
  result.success = best_score == 0;
  for (std::size_t v = 0; v < inst.n(); ++v) result.assignment.push_back(inst.domains[v][best[v]]);
  result.violations = csp_violations(inst, result.assignment);
  result.spikes_total = network.spike_count();
  result.synaptic_events = network.synaptic_events();
  return result;
}

// --- TSP ----------------------------------------------------------------------

SynapticForm tsp_synaptic_form(const TspInstance& inst, double excitation_scale, double city_penalty) {
  inst.validate();
  const int n = static_cast<int>(inst.n());
  if (n < 2) throw InvalidArgument("build_tsp_network: need at least 2 cities");
  if (!(excitation_scale > 0.0) || !(city_penalty > 0.0)) {
    throw InvalidArgument("build_tsp_network: excitation_scale and city_penalty must be > 0");
  }
  double dmax = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j) dmax = std::max(dmax, inst.dist(i, j));
    }
  }
  auto excitation = [&](int i, int j) {
    return dmax > 0.0 ? excitation_scale * (dmax - inst.dist(i, j)) / dmax : excitation_scale;
  };
  const int total = n * n;
  SynapticForm f{Eigen::MatrixXd::Zero(total, total), Eigen::VectorXd::Constant(total, 0.0)};
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      const int a = k * n + i;
      for (int l = 0; l < n; ++l) {
        for (int j = 0; j < n; ++j) {
          const int b = l * n + j;
          if (a == b) continue;
          if (k == l || i == j) {
            f.s(a, b) = -city_penalty;
            continue;
          }
          // Adjacent steps; with two cities both neighbours are the same step.
          if (l == (k + 1) % n) f.s(a, b) += excitation(i, j);
          if (l == (k + n - 1) % n) f.s(a, b) += excitation(i, j);
        }
      }
    }
  }
  f.bias.setConstant((n - 2) * excitation_scale + (city_penalty - n * excitation_scale) / 2.0);
  return f;
}

TspNet build_tsp_network(const TspInstance& inst, const TspParams& params, std::uint64_t seed) {
  check_temperature(params.temperature);
  const int n = static_cast<int>(inst.n());
  const double penalty = params.city_penalty.value_or(n * params.excitation_scale + 1.0);
  const SynapticForm f = tsp_synaptic_form(inst, params.excitation_scale, penalty);
  TspNet net;
  net.instance = inst;
  net.excitation_scale = params.excitation_scale;
  net.city_penalty = penalty;
  const double t = params.temperature;
  net.energy = EnergyNet{make_sampler(f.s / t, f.bias / t, params.hold, seed), -0.5 * f.s, f.bias, t, params.hold};
  for (int k = 0; k < n; ++k) {
    WtaSubnetwork g;
    g.inhibition_weight = -penalty;
    for (int c = 0; c < n; ++c) g.members.push_back(net.neuron(k, c));
    net.subnetworks.push_back(std::move(g));
  }
  add_groups(net.energy.network, net.subnetworks, params.hold);
  return net;
}

namespace {

std::optional<std::vector<int>> decode_from_last(const TspNet& net, const std::vector<Tick>& last) {
  const int n = net.cities();
  std::vector<int> tour(static_cast<std::size_t>(n), -1);
  std::vector<std::uint8_t> used(static_cast<std::size_t>(n), 0);
  for (int k = 0; k < n; ++k) {
    Tick latest = std::numeric_limits<Tick>::min();
    for (int c = 0; c < n; ++c) {
      if (last[net.neuron(k, c)] > latest) {
        latest = last[net.neuron(k, c)];
        tour[static_cast<std::size_t>(k)] = c;
      }
    }
    const int c = tour[static_cast<std::size_t>(k)];
    if (c < 0 || used[static_cast<std::size_t>(c)]) return std::nullopt;
    used[static_cast<std::size_t>(c)] = 1;
  }
  return tour;
}

}  // namespace

std::optional<std::vector<int>> decode_tour(const SpikeTrace& trace, const TspNet& net, Tick t) {
  const auto n = static_cast<std::size_t>(net.cities());
  if (trace.neuron_count != n * n || t < trace.start_tick || t >= trace.end_tick()) return std::nullopt;
  std::vector<Tick> last(n * n, std::numeric_limits<Tick>::min());
  for (const auto& r : trace.records) {
    if (r.tick > t) break;
    if (r.neuron < last.size()) last[r.neuron] = std::max(last[r.neuron], r.tick);
  }
  return decode_from_last(net, last);
}

TspResult solve_tsp(const TspNet& net, const AnnealConfig& config, std::uint64_t seed) {
  config.validate();
  Network network = net.energy.network;
  network.set_seed(seed);
  const std::size_t total = network.size();
  HoldReadout readout(total, net.energy.hold);
  std::vector<Tick> last(total, std::numeric_limits<Tick>::min());
  TspResult result;
  std::optional<std::vector<int>> current;
  std::vector<NeuronId> forced;
  for (Tick k = 0; k < config.ticks; ++k) {
    const Tick t = network.tick();
    forced = sample_noise(config.noise, t, network.noise_rng(), total);
    const auto& spikes = network.step(forced);
    readout.observe(spikes, t);
    for (NeuronId id : spikes) last[id] = t;
    result.max_active_per_group = std::max(result.max_active_per_group, max_active(net.subnetworks, readout, t));
    if (!spikes.empty()) current = decode_from_last(net, last);
    ++result.decodes;
    if (!current) continue;
    ++result.feasible_decodes;
    const double len = tour_length(net.instance, *current);
    if (!result.feasible || len < result.length) {
      result.feasible = true;
      result.tour = *current;
      result.length = len;
      result.tick_found = t;
    }
    if (config.target && result.length <= *config.target) break;
  }
  result.ticks_run = network.tick();
  result.spikes_total = network.spike_count();
  result.synaptic_events = network.synaptic_events();
  return result;
}

}  // namespace spikeopt
