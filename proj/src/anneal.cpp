#include "spikeopt/anneal.hpp"

#include <algorithm>
#include <map>

namespace spikeopt {

void AnnealConfig::validate() const {
  noise.validate();
  if (ticks < 1) throw InvalidArgument("AnnealConfig: ticks must be >= 1");
  if (tau < 1) throw InvalidArgument("AnnealConfig: tau must be >= 1");
  if (!(decay >= 0.0 && decay <= 1.0)) throw InvalidArgument("AnnealConfig: decay must lie in [0,1]");
  if (!(threshold > 0.0)) throw InvalidArgument("AnnealConfig: threshold must be > 0");
  if (refractory_range.min < 0 || refractory_range.max < refractory_range.min) {
    throw InvalidArgument("AnnealConfig: refractory_range must satisfy 0 <= min <= max");
  }
  if (flip_cap && *flip_cap < 1) throw InvalidArgument("AnnealConfig: flip_cap must be >= 1");
}

Network build_qubo_network(const QuboInstance& inst, const AnnealConfig& config, std::uint64_t seed) {
  inst.validate();
  config.validate();
  Network net(seed);
  const Eigen::Index n = inst.n();
  for (Eigen::Index j = 0; j < n; ++j) {
    NeuronParams p;
    p.kind = NeuronKind::LifProportional;
    p.decay = config.decay;
    p.threshold = config.threshold;
    p.reset = 0.0;
    p.bias = -inst.q(j, j);
    p.hold = config.tau;
    net.add_neuron(p);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double w = -inst.q(i, j);
      if (w == 0.0) continue;
      net.add_synapse({static_cast<NeuronId>(i), static_cast<NeuronId>(j), w, 1});
      net.add_synapse({static_cast<NeuronId>(j), static_cast<NeuronId>(i), w, 1});
    }
  }
  return net;
}

int stochastic_refractory(const RefractoryRange& range, Rng& rng) {
  if (range.max <= 0) return 0;
  return static_cast<int>(rng.uniform_int(range.min, range.max));
}

std::uint64_t derived_seed(std::uint64_t seed, std::uint64_t index) {
  if (index == 0) return seed;
  return CounterRng(seed, index).bits(0, 0);
}

namespace {
constexpr std::uint64_t kTabuStream = 3;
}

QuboAnnealer::QuboAnnealer(const QuboInstance& inst, const AnnealConfig& config, std::uint64_t seed)
    : inst_(inst),
      config_(config),
      network_(build_qubo_network(inst, config, seed)),
      readout_(static_cast<std::size_t>(inst.n()), config.tau),
      tabu_rng_(seed, kTabuStream) {
  const Eigen::Index n = inst.n();
  coupling_ = inst.q.triangularView<Eigen::StrictlyUpper>();
  coupling_ += coupling_.transpose().eval();
  field_ = inst.q.diagonal();
  state_ = BitVector::Zero(n);
  best_ = state_;
  flips_.resize(static_cast<std::size_t>(n));
  if (config_.flip_cap) {
    network_.set_gate([this](NeuronId id, Tick t) {
      if (state_[id]) return true;  // already on: not a flip
      if (t != gate_tick_) {
        gate_tick_ = t;
        turned_on_ = 0;
      }
      if (turned_on_ >= *config_.flip_cap) return false;
      ++turned_on_;
      return true;
    });
  }
}

void QuboAnnealer::apply_flip(Eigen::Index v, bool on) {
  const double sign = on ? 1.0 : -1.0;
  objective_ += sign * field_[v];
  field_ += sign * coupling_.col(v);
  state_[v] = on ? 1 : 0;
}

void QuboAnnealer::step() {
  const Tick t = network_.tick();
  forced_ = sample_noise(config_.noise, t, network_.noise_rng(), network_.size());
  const auto& spikes = network_.step(forced_);
  readout_.observe(spikes, t);
  const Eigen::Index n = inst_.n();
  for (Eigen::Index v = 0; v < n; ++v) {
    const bool bit = readout_.bit(static_cast<NeuronId>(v), t);
    if (bit == (state_[v] != 0)) continue;
    apply_flip(v, bit);
    if (log_flips_) flips_[static_cast<std::size_t>(v)].push_back(t);
    const int k = stochastic_refractory(config_.refractory_range, tabu_rng_);
    if (k > 0) {
      if (bit) network_.clamp_on(static_cast<NeuronId>(v), k);
      else network_.suppress(static_cast<NeuronId>(v), k);
    }
  }
  if (!started_ || objective_ < best_objective_) {
    started_ = true;
    best_objective_ = objective_;
    best_ = state_;
    tick_found_ = t;
  }
  if ((t + 1) % kCheckpointTicks == 0) trajectory_.push_back(best_objective_);
}

void QuboAnnealer::precharge(const BitVector& x, int ticks) {
  if (x.size() != inst_.n()) throw InvalidArgument("precharge: length mismatch");
  if (ticks < 1) return;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i]) network_.clamp_on(static_cast<NeuronId>(i), ticks);
    else network_.suppress(static_cast<NeuronId>(i), ticks);
  }
}

bool QuboAnnealer::done() const {
  if (network_.tick() >= config_.ticks) return true;
  return started_ && config_.target && best_objective_ <= *config_.target;
}

AnnealResult QuboAnnealer::result() const {
  AnnealResult r;
  r.best_solution = best_;
  r.best_objective = qubo_objective(inst_, best_);
  r.tick_found = tick_found_;
  r.ticks_run = network_.tick();
  r.spikes_total = network_.spike_count();
  r.synaptic_events = network_.synaptic_events();
  r.objective_trajectory = trajectory_;
  if (r.ticks_run % kCheckpointTicks != 0) r.objective_trajectory.push_back(best_objective_);
  return r;
}

AnnealResult anneal(const QuboInstance& inst, const AnnealConfig& config, std::uint64_t seed) {
  QuboAnnealer run(inst, config, seed);
  while (!run.done()) run.step();
  return run.result();
}

AnnealResult iterated_anneal(const QuboInstance& inst, const AnnealConfig& config, int restarts, std::uint64_t seed) {
  if (restarts < 1) throw InvalidArgument("iterated_anneal: restarts must be >= 1");
  AnnealResult total;
  Tick offset = 0;
  for (int r = 0; r < restarts; ++r) {
    QuboAnnealer run(inst, config, derived_seed(seed, static_cast<std::uint64_t>(r)));
    if (r > 0) run.precharge(total.best_solution, 1);
    while (!run.done()) run.step();
    AnnealResult part = run.result();
    if (r == 0 || part.best_objective < total.best_objective) {
      total.best_solution = part.best_solution;
      total.best_objective = part.best_objective;
      total.tick_found = offset + part.tick_found;
    }
    total.spikes_total += part.spikes_total;
    total.synaptic_events += part.synaptic_events;
    for (double b : part.objective_trajectory) {
      total.objective_trajectory.push_back(total.objective_trajectory.empty()
                                               ? b
                                               : std::min(b, total.objective_trajectory.back()));
    }
    offset += part.ticks_run;
    if (config.target && total.best_objective <= *config.target) break;
  }
  total.ticks_run = offset;
  return total;
}

// --- 3-SAT ------------------------------------------------------------------

AnnealConfig default_sat_config() {
  AnnealConfig c;
  c.ticks = 100000;
  c.tau = 1;
  c.noise = {0.0, 1.0};
  return c;
}

Network build_sat_network(const CnfFormula& f, const SatParams& params, int tau, std::uint64_t seed) {
  f.validate();
  Network net(seed);
  NeuronParams var;
  var.kind = NeuronKind::Stochastic;
  var.threshold = 0.0;
  var.reset = -1.0;
  var.bias = params.var_bias;
  var.hold = tau;
  for (int v = 0; v < f.n_vars; ++v) net.add_neuron(var);
  for (int v = 0; v < f.n_vars; ++v) {
    if (params.self_weight != 0.0) net.add_synapse({static_cast<NeuronId>(v), static_cast<NeuronId>(v), params.self_weight, 1});
  }
  for (const auto& clause : f.clauses) {
    // Repeated variables inside one clause merge into a single synapse.
    std::map<int, double> in;
    std::map<int, double> out;
    int negative = 0;
    for (int lit : clause) {
      const int v = std::abs(lit) - 1;
      in[v] += lit < 0 ? 1.0 : -1.0;
      out[v] += lit > 0 ? params.clause_weight : -params.clause_weight;
      negative += lit < 0 ? 1 : 0;
    }
    NeuronParams c;
    c.kind = NeuronKind::LifProportional;
    c.decay = 1.0;
    c.threshold = 1.0;
    c.reset = 0.0;
    c.bias = 1.0 - negative;  // reaches threshold only when every literal is false
    const NeuronId id = net.add_neuron(c);
    for (auto [v, w] : in) {
      if (w != 0.0) net.add_synapse({static_cast<NeuronId>(v), id, w, 1});
    }
    for (auto [v, w] : out) {
      if (w != 0.0) net.add_synapse({id, static_cast<NeuronId>(v), w, 1});
    }
  }
  return net;
}

AnnealResult solve_sat(const CnfFormula& f, const AnnealConfig& config, std::uint64_t seed, const SatParams& params) {
  config.validate();
  if (!f.is_3cnf()) throw InvalidArgument("solve_sat: formula is not 3-CNF");
  Network net = build_sat_network(f, params, config.tau, seed);
  const auto n = static_cast<std::size_t>(f.n_vars);
  HoldReadout readout(n, config.tau);
  Rng tabu_rng(seed, kTabuStream);
  BitVector state = BitVector::Zero(static_cast<Eigen::Index>(n));
  int turned_on = 0;
  Tick gate_tick = -1;
  if (config.flip_cap) {
    net.set_gate([&](NeuronId id, Tick t) {
      if (id >= n || state[id]) return true;
      if (t != gate_tick) {
        gate_tick = t;
        turned_on = 0;
      }
      if (turned_on >= *config.flip_cap) return false;
      ++turned_on;
      return true;
    });
  }

  auto unsatisfied = [&f](const BitVector& x) {
    return static_cast<double>(f.clauses.size() - cnf_eval(f, x).satisfied);
  };
  AnnealResult result;
  result.best_solution = state;
  result.best_objective = unsatisfied(state);
  double current = result.best_objective;
  std::vector<NeuronId> forced;
  for (Tick k = 0; k < config.ticks && result.best_objective > 0.0; ++k) {
    const Tick t = net.tick();
    forced = sample_noise(config.noise, t, net.noise_rng(), n);
    const auto& spikes = net.step(forced);
    // Clause spikes are ids >= n; readout covers variables only.
    std::vector<NeuronId> var_spikes;
    for (NeuronId id : spikes) {
      if (id < n) var_spikes.push_back(id);
    }
    readout.observe(var_spikes, t);
    bool changed = false;
    for (std::size_t v = 0; v < n; ++v) {
      const bool bit = readout.bit(static_cast<NeuronId>(v), t);
      if (bit == (state[static_cast<Eigen::Index>(v)] != 0)) continue;
      state[static_cast<Eigen::Index>(v)] = bit ? 1 : 0;
      changed = true;
      const int tabu = stochastic_refractory(config.refractory_range, tabu_rng);
      if (tabu > 0) {
        if (bit) net.clamp_on(static_cast<NeuronId>(v), tabu);
        else net.suppress(static_cast<NeuronId>(v), tabu);
      }
    }
    if (changed) current = unsatisfied(state);
    if (current < result.best_objective) {
      result.best_objective = current;
      result.best_solution = state;
      result.tick_found = t;
    }
    if ((t + 1) % kCheckpointTicks == 0) result.objective_trajectory.push_back(result.best_objective);
  }
  result.ticks_run = net.tick();
  if (result.ticks_run % kCheckpointTicks != 0 || result.objective_trajectory.empty()) {
    result.objective_trajectory.push_back(result.best_objective);
  }
  result.best_objective = unsatisfied(result.best_solution);
  result.spikes_total = net.spike_count();
  result.synaptic_events = net.synaptic_events();
  return result;
}

}  // namespace spikeopt
