#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <set>

#include "spikeopt/anneal.hpp"
#include "spikeopt/cli.hpp"
#include "spikeopt/problem_io.hpp"
#include "spikeopt/qp.hpp"
#include "spikeopt/swarm.hpp"
#include "spikeopt/wta.hpp"

namespace spikeopt::cli {

using nlohmann::json;
using nlohmann::ordered_json;

int exit_code_for_current_exception(std::string* message) {
  auto note = [message](const std::exception& e) {
    if (message) *message = e.what();
  };
  try {
    throw;
  } catch (const ParseError& e) {
    note(e);
    return kExitParse;
  } catch (const IncompatibleError& e) {
    note(e);
    return kExitIncompatible;
  } catch (const ConfigError& e) {
    note(e);
    return kExitConfig;
  } catch (const SizeCapError& e) {
    note(e);
    return kExitOverCap;
  } catch (const std::exception& e) {
    note(e);
    return kExitFailure;
  }
}

// --- names ----------------------------------------------------------------------

namespace {

const std::vector<std::pair<ProblemKind, std::string>>& kind_table() {
  static const std::vector<std::pair<ProblemKind, std::string>> t{
      {ProblemKind::Qubo, "qubo"}, {ProblemKind::Ising, "ising"},       {ProblemKind::Cnf, "cnf"},
      {ProblemKind::Csp, "csp"},   {ProblemKind::Tsp, "tsp"},           {ProblemKind::Qp, "qp"},
      {ProblemKind::Function, "function"}, {ProblemKind::Graph, "graph"}, {ProblemKind::Grid, "grid"}};
  return t;
}

const std::vector<std::pair<Solver, std::string>>& solver_table() {
  static const std::vector<std::pair<Solver, std::string>> t{
      {Solver::Anneal, "anneal"}, {Solver::Iterated, "iterated"}, {Solver::Sat, "sat"},   {Solver::Csp, "csp"},
      {Solver::TspWta, "tsp-wta"}, {Solver::Swarm, "swarm"},      {Solver::Osnn, "osnn"}, {Solver::Aco, "aco"},
      {Solver::Qp, "qp"},         {Solver::Sssp, "sssp"},         {Solver::Plan, "plan"}};
  return t;
}

template <typename T>
std::vector<std::string> names_of(const std::vector<std::pair<T, std::string>>& table) {
  std::vector<std::string> out;
  for (const auto& [_, name] : table) out.push_back(name);
  return out;
}

}  // namespace

std::string to_string(ProblemKind kind) {
  for (const auto& [k, name] : kind_table()) {
    if (k == kind) return name;
  }
  return "?";
}

std::string to_string(Solver solver) {
  for (const auto& [s, name] : solver_table()) {
    if (s == solver) return name;
  }
  return "?";
}

ProblemKind problem_kind_from_string(const std::string& name) {
  for (const auto& [k, n] : kind_table()) {
    if (n == name) return k;
  }
  throw ConfigError("unknown problem kind '" + name + "'");
}

Solver solver_from_string(const std::string& name) {
  for (const auto& [s, n] : solver_table()) {
    if (n == name) return s;
  }
  throw ConfigError("unknown solver '" + name + "'");
}

const std::vector<std::string>& problem_kind_names() {
  static const auto names = names_of(kind_table());
  return names;
}

const std::vector<std::string>& solver_names() {
  static const auto names = names_of(solver_table());
  return names;
}

std::vector<Solver> solvers_for(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::Qubo:
    case ProblemKind::Ising: return {Solver::Anneal, Solver::Iterated, Solver::Swarm};
    case ProblemKind::Cnf: return {Solver::Sat};
    case ProblemKind::Csp: return {Solver::Csp};
    case ProblemKind::Tsp: return {Solver::TspWta, Solver::Aco};
    case ProblemKind::Qp: return {Solver::Qp};
    case ProblemKind::Function: return {Solver::Osnn};
    case ProblemKind::Graph: return {Solver::Sssp};
    case ProblemKind::Grid: return {Solver::Plan};
  }
  return {};
}

bool compatible(ProblemKind kind, Solver solver) {
  const auto ok = solvers_for(kind);
  return std::find(ok.begin(), ok.end(), solver) != ok.end();
}

// --- benchmark functions --------------------------------------------------------

void FunctionSpec::validate() const {
  if (name != "sphere" && name != "rastrigin" && name != "rosenbrock") {
    throw InvalidArgument("function: unknown name '" + name + "'");
  }
  if (dims < 1) throw InvalidArgument("function: dims must be >= 1");
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) throw InvalidArgument("function: need finite lo < hi");
}

Objective FunctionSpec::objective() const {
  validate();
  if (name == "sphere") return [](const Eigen::VectorXd& x) { return x.squaredNorm(); };
  if (name == "rastrigin") {
    return [](const Eigen::VectorXd& x) {
      double s = 10.0 * static_cast<double>(x.size());
      for (double v : x) s += v * v - 10.0 * std::cos(2.0 * std::numbers::pi * v);
      return s;
    };
  }
  return [](const Eigen::VectorXd& x) {
    double s = 0.0;
    for (Eigen::Index i = 0; i + 1 < x.size(); ++i) {
      s += 100.0 * std::pow(x[i + 1] - x[i] * x[i], 2) + std::pow(1.0 - x[i], 2);
    }
    return s;
  };
}

Bounds FunctionSpec::bounds() const {
  return {Eigen::VectorXd::Constant(dims, lo), Eigen::VectorXd::Constant(dims, hi)};
}

// --- loading --------------------------------------------------------------------

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string("fnv1a64:") + buf;
}

ProblemKind detect_kind(const std::filesystem::path& path, const std::string& text) {
  const std::string ext = path.extension().string();
  if (ext == ".qubo") return ProblemKind::Qubo;
  if (ext == ".cnf") return ProblemKind::Cnf;
  if (ext == ".tsp") return ProblemKind::Tsp;
  if (ext == ".graph") return ProblemKind::Graph;
  if (ext == ".grid") return ProblemKind::Grid;
  if (ext == ".json") {
    const json doc = io::parse_json(text);
    if (doc.is_object()) {
      if (doc.value("format", std::string{}) == "spikeopt.ising") return ProblemKind::Ising;
      if (doc.contains("domains")) return ProblemKind::Csp;
      if (doc.contains("function")) return ProblemKind::Function;
      if (doc.contains("q") && doc.contains("p")) return ProblemKind::Qp;
    }
  }
  throw ParseError("cannot tell the problem kind of '" + path.string() + "'; pass --kind", 0);
}

namespace {

FunctionSpec parse_function(const std::string& text) {
  const json doc = io::parse_json(text);
  if (!doc.is_object()) throw ParseError("function spec must be a JSON object", 0);
  FunctionSpec f;
  try {
    for (const auto& [key, _] : doc.items()) {
      if (key != "function" && key != "dims" && key != "lo" && key != "hi") {
        throw ParseError("function spec: unknown key '" + key + "'", 0);
      }
    }
    f.name = doc.at("function").get<std::string>();
    f.dims = doc.at("dims").get<int>();
    f.lo = doc.value("lo", f.lo);
    f.hi = doc.value("hi", f.hi);
    f.validate();
  } catch (const json::exception& e) {
    throw ParseError(std::string("function spec: ") + e.what(), 0);
  } catch (const InvalidArgument& e) {
    throw ParseError(e.what(), 0);
  }
  return f;
}

template <typename T>
T validated(T inst) {
  try {
    inst.validate();
  } catch (const InvalidArgument& e) {
    throw ParseError(e.what(), 0);
  }
  return inst;
}

}  // namespace

LoadedProblem parse_problem(const std::string& text, ProblemKind kind) {
  LoadedProblem p;
  p.kind = kind;
  p.hash = fnv1a_hex(text);
  switch (kind) {
    case ProblemKind::Qubo: p.instance = validated(io::parse_qubo(text)); break;
    case ProblemKind::Ising: p.instance = io::ising_from_json(io::parse_json(text)); break;
    case ProblemKind::Cnf: p.instance = validated(io::parse_dimacs(text)); break;
    case ProblemKind::Csp: p.instance = validated(io::parse_csp(text)); break;
    case ProblemKind::Tsp: p.instance = validated(io::parse_tsp(text)); break;
    case ProblemKind::Qp: p.instance = validated(io::parse_qp(text)); break;
    case ProblemKind::Function: p.instance = parse_function(text); break;
    case ProblemKind::Graph: p.instance = validated(io::parse_graph(text)); break;
    case ProblemKind::Grid: p.instance = validated(io::parse_grid(text)); break;
  }
  return p;
}

LoadedProblem load_problem(const std::filesystem::path& path, std::optional<ProblemKind> kind) {
  const std::string text = io::read_text(path);
  return parse_problem(text, kind ? *kind : detect_kind(path, text));
}

void RunSpec::validate() const {
  if (problem_path.empty()) throw ConfigError("run spec: problem path is required");
  if (seeds.empty()) throw ConfigError("run spec: at least one seed is required");
  if (budget && *budget < 1) throw ConfigError("run spec: budget must be >= 1");
  if (problem_kind && !compatible(*problem_kind, solver)) {
    throw IncompatibleError("solver '" + to_string(solver) + "' cannot run on '" + to_string(*problem_kind) + "' problems");
  }
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  auto number = [&text](const std::string& tok) {
    if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos) {
      throw ConfigError("bad seed list '" + text + "'");
    }
    return std::stoull(tok);
  };
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find(',', pos);
    if (end == std::string::npos) end = text.size();
    const std::string part = text.substr(pos, end - pos);
    const std::size_t dash = part.find('-');
    if (dash == std::string::npos) {
      out.push_back(number(part));
    } else {
      const auto lo = number(part.substr(0, dash));
      const auto hi = number(part.substr(dash + 1));
      if (hi < lo || hi - lo > 1000000) throw ConfigError("bad seed range '" + part + "'");
      for (auto s = lo; s <= hi; ++s) out.push_back(s);
    }
    pos = end + 1;
  }
  return out;
}

// --- result records ---------------------------------------------------------------

ordered_json to_json(const ResultRecord& r) {
  ordered_json j;
  j["schema"] = "spikeopt.result";
  j["schema_version"] = kResultSchemaVersion;
  j["problem"] = {{"kind", r.problem_kind}, {"hash", r.problem_hash}};
  j["solver"] = {{"name", r.solver}, {"config_hash", r.config_hash}};
  j["seed"] = r.seed;
  j["best_objective"] = r.best_objective ? ordered_json(*r.best_objective) : ordered_json(nullptr);
  j["best_solution"] = r.best_solution;
  j["feasible"] = r.feasible;
  j["ticks_to_best"] = r.ticks_to_best ? ordered_json(*r.ticks_to_best) : ordered_json(nullptr);
  j["ticks_run"] = r.ticks_run;
  j["spikes_total"] = r.spikes_total;
  j["synaptic_events"] = r.synaptic_events;
  j["events"] = to_json(r.events);
  j["energy_breakdown"] = to_json(r.energy);
  j["wall_time_ms"] = r.wall_time_ms;
  j["version"] = r.version;
  return j;
}

namespace {

void require_keys(const json& obj, std::initializer_list<const char*> keys, const char* where) {
  if (!obj.is_object()) throw ParseError(std::string(where) + " must be an object", 0);
  for (const auto& [key, _] : obj.items()) {
    if (std::none_of(keys.begin(), keys.end(), [&key](const char* k) { return key == k; })) {
      throw ParseError(std::string(where) + ": unknown field '" + key + "'", 0);
    }
  }
  for (const char* k : keys) {
    if (!obj.contains(k)) throw ParseError(std::string(where) + ": missing field '" + k + "'", 0);
  }
}

}  // namespace

ResultRecord result_from_json(const json& doc) {
  try {
    require_keys(doc,
                 {"schema", "schema_version", "problem", "solver", "seed", "best_objective", "best_solution", "feasible",
                  "ticks_to_best", "ticks_run", "spikes_total", "synaptic_events", "events", "energy_breakdown",
                  "wall_time_ms", "version"},
                 "result");
    if (doc["schema"] != "spikeopt.result") throw ParseError("not a spikeopt.result document", 0);
    if (doc["schema_version"].get<int>() != kResultSchemaVersion) throw ParseError("unsupported schema_version", 0);
    require_keys(doc["problem"], {"kind", "hash"}, "result.problem");
    require_keys(doc["solver"], {"name", "config_hash"}, "result.solver");
    require_keys(doc["events"], {"ticks", "neurons", "spikes", "deliveries", "source_spikes", "plasticity_ticks"},
                 "result.events");
    require_keys(doc["energy_breakdown"],
                 {"static_j", "idle_j", "emit_j", "transmit_j", "synaptic_j", "source_j", "plasticity_j", "total_j"},
                 "result.energy_breakdown");
    ResultRecord r;
    r.problem_kind = doc["problem"]["kind"].get<std::string>();
    r.problem_hash = doc["problem"]["hash"].get<std::string>();
    r.solver = doc["solver"]["name"].get<std::string>();
    r.config_hash = doc["solver"]["config_hash"].get<std::string>();
    r.seed = doc["seed"].get<std::uint64_t>();
    if (!doc["best_objective"].is_null()) r.best_objective = doc["best_objective"].get<double>();
    r.best_solution = doc["best_solution"];
    r.feasible = doc["feasible"].get<bool>();
    if (!doc["ticks_to_best"].is_null()) r.ticks_to_best = doc["ticks_to_best"].get<Tick>();
    r.ticks_run = doc["ticks_run"].get<Tick>();
    r.spikes_total = doc["spikes_total"].get<std::uint64_t>();
    r.synaptic_events = doc["synaptic_events"].get<std::uint64_t>();
    const auto& ev = doc["events"];
    r.events.ticks = ev["ticks"].get<Tick>();
    r.events.neurons = ev["neurons"].get<std::uint64_t>();
    r.events.spikes = ev["spikes"].get<std::uint64_t>();
    r.events.deliveries = ev["deliveries"].get<std::uint64_t>();
    r.events.source_spikes = ev["source_spikes"].get<std::uint64_t>();
    r.events.plasticity_ticks = ev["plasticity_ticks"].get<Tick>();
    const auto& en = doc["energy_breakdown"];
    r.energy.static_j = en["static_j"].get<double>();
    r.energy.idle_j = en["idle_j"].get<double>();
    r.energy.emit_j = en["emit_j"].get<double>();
    r.energy.transmit_j = en["transmit_j"].get<double>();
    r.energy.synaptic_j = en["synaptic_j"].get<double>();
    r.energy.source_j = en["source_j"].get<double>();
    r.energy.plasticity_j = en["plasticity_j"].get<double>();
    r.energy.total_j = en["total_j"].get<double>();
    r.wall_time_ms = doc["wall_time_ms"].get<double>();
    r.version = doc["version"].get<std::string>();
    return r;
  } catch (const json::exception& e) {
    throw ParseError(std::string("result: ") + e.what(), 0);
  }
}

// --- solution evaluation ----------------------------------------------------------

namespace {

template <typename T>
std::vector<T> array_of(const json& s, std::size_t n, const char* what) {
  if (!s.is_array() || s.size() != n) {
    throw InvalidArgument(std::string(what) + ": expected an array of " + std::to_string(n));
  }
  std::vector<T> out;
  out.reserve(n);
  try {
    for (const auto& v : s) out.push_back(v.get<T>());
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string(what) + ": " + e.what());
  }
  return out;
}

BitVector bits_of(const json& s, Eigen::Index n) {
  const auto v = array_of<int>(s, static_cast<std::size_t>(n), "solution");
  BitVector x(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (v[static_cast<std::size_t>(i)] != 0 && v[static_cast<std::size_t>(i)] != 1) {
      throw InvalidArgument("solution: entries must be 0 or 1");
    }
    x[i] = static_cast<std::uint8_t>(v[static_cast<std::size_t>(i)]);
  }
  return x;
}

Eigen::VectorXd reals_of(const json& s, Eigen::Index n) {
  const auto v = array_of<double>(s, static_cast<std::size_t>(n), "solution");
  return Eigen::Map<const Eigen::VectorXd>(v.data(), n);
}

double authored(const QuboInstance& inst, double canonical) {
  return inst.sense == Sense::Maximize ? -canonical : canonical;
}

struct Evaluator {
  const json& s;

  double operator()(const QuboInstance& inst) const { return authored(inst, qubo_objective(inst, bits_of(s, inst.n()))); }
  double operator()(const IsingInstance& inst) const {
    const auto v = array_of<int>(s, static_cast<std::size_t>(inst.n()), "solution");
    Eigen::VectorXd spins(inst.n());
    for (Eigen::Index i = 0; i < inst.n(); ++i) {
      const int x = v[static_cast<std::size_t>(i)];
      if (x != 1 && x != -1) throw InvalidArgument("solution: spins must be -1 or +1");
      spins[i] = x;
    }
    return ising_energy(inst, spins) + inst.offset;
  }
  double operator()(const CnfFormula& f) const {
    const BitVector x = bits_of(s, f.n_vars);
    return static_cast<double>(f.clauses.size() - cnf_eval(f, x).satisfied);
  }
  double operator()(const CspInstance& inst) const {
    return static_cast<double>(csp_violations(inst, array_of<int>(s, inst.n(), "solution")));
  }
  double operator()(const TspInstance& inst) const {
    const auto tour = array_of<int>(s, static_cast<std::size_t>(inst.n()), "solution");
    if (!is_permutation_of_range(tour, static_cast<std::size_t>(inst.n()))) throw InvalidArgument("solution: not a tour");
    return tour_length(inst, tour);
  }
  double operator()(const QpInstance& inst) const { return qp_objective(inst, reals_of(s, inst.dims())); }
  double operator()(const FunctionSpec& f) const { return f.objective()(reals_of(s, f.dims)); }
  double operator()(const WeightedGraph& g) const {
    if (!s.is_array() || s.size() != static_cast<std::size_t>(g.n)) throw InvalidArgument("solution: distance table size");
    double total = 0.0;
    for (const auto& d : s) {
      if (d.is_null()) continue;
      if (!d.is_number_integer() || d.get<std::int64_t>() < 0) throw InvalidArgument("solution: bad distance");
      total += static_cast<double>(d.get<std::int64_t>());
    }
    return total;
  }
  double operator()(const GridWorld& w) const {
    if (!s.is_array() || s.empty()) throw InvalidArgument("solution: path must be a nonempty array");
    std::optional<Cell> prev;
    for (const auto& c : s) {
      if (!c.is_array() || c.size() != 2) throw InvalidArgument("solution: cells are [row, col]");
      const Cell cell{c[0].get<int>(), c[1].get<int>()};
      if (!w.inside(cell) || w.blocked(cell)) throw InvalidArgument("solution: path leaves the free cells");
      if (prev && std::abs(prev->row - cell.row) + std::abs(prev->col - cell.col) != 1) {
        throw InvalidArgument("solution: path cells must be 4-adjacent");
      }
      prev = cell;
    }
    const Cell first{s.front()[0].get<int>(), s.front()[1].get<int>()};
    if (!(first == w.start) || !(*prev == w.goal)) throw InvalidArgument("solution: path must run from start to goal");
    return static_cast<double>(s.size() - 1);
  }
};

}  // namespace

double evaluate_solution(const LoadedProblem& problem, const json& solution) {
  return std::visit(Evaluator{solution}, problem.instance);
}

// --- configuration ----------------------------------------------------------------

namespace {

class ConfigReader {
 public:
  explicit ConfigReader(const json& doc) : doc_(doc.is_null() ? json::object() : doc) {
    if (!doc_.is_object()) throw ConfigError("config must be a JSON object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    if (!doc_.contains(key)) return;
    used_.insert(key);
    const json& v = doc_[key];
    bool ok = false;
    if constexpr (std::is_same_v<T, bool>) ok = v.is_boolean();
    else if constexpr (std::is_integral_v<T>) ok = v.is_number_integer();
    else if constexpr (std::is_floating_point_v<T>) ok = v.is_number();
    else ok = true;
    if (!ok) throw ConfigError(std::string("config: '") + key + "' has the wrong type");
    out = v.get<T>();
  }

  template <typename T>
  void read(const char* key, std::optional<T>& out) {
    if (!doc_.contains(key)) return;
    if (doc_[key].is_null()) {
      used_.insert(key);
      out.reset();
      return;
    }
    T v{};
    read(key, v);
    out = v;
  }

  std::optional<json> object(const char* key) {
    if (!doc_.contains(key)) return std::nullopt;
    used_.insert(key);
    return doc_[key];
  }

  void finish() const {
    for (const auto& [key, _] : doc_.items()) {
      if (!used_.count(key)) throw ConfigError("config: unknown key '" + key + "'");
    }
  }

 private:
  json doc_;
  std::set<std::string> used_;
};

template <typename F>
void checked(F&& f) {
  try {
    f();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
}

void read_run_length(ConfigReader& r, AnnealConfig& c) {
  r.read("ticks", c.ticks);
  r.read("noise_mu", c.noise.mu);
  r.read("noise_beta", c.noise.beta);
  r.read("target", c.target);
}

void read_anneal(ConfigReader& r, AnnealConfig& c) {
  read_run_length(r, c);
  r.read("tau", c.tau);
  r.read("decay", c.decay);
  r.read("threshold", c.threshold);
  r.read("refractory_min", c.refractory_range.min);
  r.read("refractory_max", c.refractory_range.max);
  r.read("flip_cap", c.flip_cap);
}

struct Outcome {
  std::optional<json> solution;  // null when nothing feasible was decoded
  bool feasible = false;
  std::optional<Tick> ticks_to_best;
  Tick ticks_run = 0;
  std::uint64_t spikes = 0;
  std::uint64_t synaptic_events = 0;
  std::uint64_t neurons = 0;
  std::uint64_t source_spikes = 0;
};

json bits_json(const BitVector& x) {
  json out = json::array();
  for (Eigen::Index i = 0; i < x.size(); ++i) out.push_back(static_cast<int>(x[i]));
  return out;
}

json reals_json(const Eigen::VectorXd& x) {
  json out = json::array();
  for (double v : x) out.push_back(v);
  return out;
}

Outcome from_anneal(const AnnealResult& r, std::uint64_t neurons) {
  Outcome o;
  o.solution = bits_json(r.best_solution);
  o.feasible = true;
  o.ticks_to_best = r.tick_found;
  o.ticks_run = r.ticks_run;
  o.spikes = r.spikes_total;
  o.synaptic_events = r.synaptic_events;
  o.neurons = neurons;
  return o;
}

// QUBO view of a QUBO or Ising problem; `spins` turns bits back into spins.
struct BinaryView {
  QuboInstance qubo;
  bool spins = false;
};

BinaryView binary_view(const LoadedProblem& p) {
  if (const auto* q = std::get_if<QuboInstance>(&p.instance)) return {*q, false};
  return {ising_to_qubo(std::get<IsingInstance>(p.instance)).qubo, true};
}

json to_spins(const json& bits) {
  json out = json::array();
  for (const auto& b : bits) out.push_back(b.get<int>() ? 1 : -1);
  return out;
}

Outcome run_binary(const LoadedProblem& p, Solver solver, ConfigReader& r, std::uint64_t seed,
                   std::optional<Tick> budget) {
  const BinaryView view = binary_view(p);
  const auto n = static_cast<std::uint64_t>(view.qubo.n());
  Outcome o;
  if (solver == Solver::Swarm) {
    SwarmConfig c;
    read_anneal(r, c.base);
    r.read("m", c.m);
    r.read("share_period", c.share_period);
    r.read("share", c.share);
    r.read("broadcast_to_all", c.broadcast_to_all);
    r.read("precharge_ticks", c.precharge_ticks);
    if (budget) c.base.ticks = *budget;
    r.finish();
    checked([&] { c.validate(); });
    const SwarmResult res = collaborative_solve(view.qubo, c, seed);
    o = from_anneal(res.best, n * static_cast<std::uint64_t>(c.m));
    o.ticks_run = res.best.ticks_run;
  } else {
    AnnealConfig c;
    int restarts = 4;
    read_anneal(r, c);
    if (solver == Solver::Iterated) r.read("restarts", restarts);
    if (budget) c.ticks = *budget;
    r.finish();
    checked([&] {
      c.validate();
      if (restarts < 1) throw InvalidArgument("restarts must be >= 1");
    });
    o = from_anneal(solver == Solver::Iterated ? iterated_anneal(view.qubo, c, restarts, seed) : anneal(view.qubo, c, seed),
                    n);
  }
  if (view.spins) o.solution = to_spins(*o.solution);
  return o;
}

Outcome run_sat(const CnfFormula& f, ConfigReader& r, std::uint64_t seed, std::optional<Tick> budget) {
  AnnealConfig c = default_sat_config();
  SatParams params;
  read_anneal(r, c);
  r.read("clause_weight", params.clause_weight);
  r.read("var_bias", params.var_bias);
  r.read("self_weight", params.self_weight);
  if (budget) c.ticks = *budget;
  r.finish();
  checked([&] { c.validate(); });
  const AnnealResult res = solve_sat(f, c, seed, params);
  Outcome o = from_anneal(res, static_cast<std::uint64_t>(f.n_vars) + f.clauses.size());
  o.feasible = res.best_objective == 0.0;
  return o;
}

Outcome run_csp(const CspInstance& inst, ConfigReader& r, std::uint64_t seed, std::optional<Tick> budget) {
  AnnealConfig c = default_wta_config();
  CspParams params;
  read_run_length(r, c);
  r.read("penalty", params.penalty);
  r.read("wta_inhibition", params.wta_inhibition);
  r.read("bias", params.bias);
  r.read("temperature", params.temperature);
  r.read("hold", params.hold);
  if (budget) c.ticks = *budget;
  r.finish();
  checked([&] { c.validate(); });
  CspNet net;
  checked([&] { net = build_csp_network(inst, params, seed); });
  const CspResult res = solve_csp(net, c, seed);
  Outcome o;
  o.solution = json(res.assignment);
  o.feasible = res.success;
  o.ticks_to_best = res.tick_found;
  o.ticks_run = res.ticks_run;
  o.spikes = res.spikes_total;
  o.synaptic_events = res.synaptic_events;
  o.neurons = net.energy.network.size();
  return o;
}

Outcome run_tsp_wta(const TspInstance& inst, ConfigReader& r, std::uint64_t seed, std::optional<Tick> budget) {
  AnnealConfig c = default_wta_config();
  TspParams params;
  read_run_length(r, c);
  r.read("excitation_scale", params.excitation_scale);
  r.read("city_penalty", params.city_penalty);
  r.read("temperature", params.temperature);
  r.read("hold", params.hold);
  if (budget) c.ticks = *budget;
  r.finish();
  checked([&] { c.validate(); });
  TspNet net;
  checked([&] { net = build_tsp_network(inst, params, seed); });
  const TspResult res = solve_tsp(net, c, seed);
  Outcome o;
  if (res.feasible) {
    o.solution = json(res.tour);
    o.ticks_to_best = res.tick_found;
  }
  o.feasible = res.feasible;
  o.ticks_run = res.ticks_run;
  o.spikes = res.spikes_total;
  o.synaptic_events = res.synaptic_events;
  o.neurons = net.energy.network.size();
  return o;
}

Outcome run_aco(const TspInstance& inst, ConfigReader& r, std::uint64_t seed, std::optional<Tick> budget) {
  AcoConfig c;
  r.read("n_agents", c.n_agents);
  r.read("rho", c.rho);
  r.read("deposit", c.deposit);
  r.read("iterations", c.iterations);
  r.read("pheromone_weight", c.pheromone_weight);
  r.read("distance_weight", c.distance_weight);
  r.read("tau0", c.tau0);
  if (budget) {
    if (*budget > std::numeric_limits<int>::max()) throw ConfigError("budget too large for aco");
    c.iterations = static_cast<int>(*budget);
  }
  r.finish();
  checked([&] { c.validate(); });
  const AcoResult res = aco_tsp_solve(inst, c, seed);
  Outcome o;
  o.solution = json(res.tour);
  o.feasible = true;
  o.ticks_to_best = res.iteration_found;
  o.ticks_run = static_cast<Tick>(res.best_trajectory.size());
  o.spikes = res.spikes;
  o.synaptic_events = res.synaptic_events;
  o.neurons = static_cast<std::uint64_t>(c.n_agents) * 2 * static_cast<std::uint64_t>(inst.n());
  return o;
}

Outcome run_qp(const QpInstance& inst, ConfigReader& r, std::optional<Tick> budget) {
  QpSchedule s = default_schedule(inst);
  double feasibility_tol = 1e-3;
  r.read("alpha0", s.alpha0);
  r.read("beta0", s.beta0);
  r.read("t0", s.t0);
  r.read("beta_max", s.beta_max);
  r.read("max_iters", s.max_iters);
  r.read("tol", s.tol);
  r.read("feasibility_tol", feasibility_tol);
  if (budget) s.max_iters = *budget;
  r.finish();
  checked([&] {
    s.validate();
    if (!(feasibility_tol >= 0.0)) throw InvalidArgument("feasibility_tol must be >= 0");
  });
  const QpResult res = solve_qp(inst, s);
  Outcome o;
  o.solution = reals_json(res.x);
  o.feasible = res.max_violation <= feasibility_tol;
  o.ticks_to_best = res.iterations;
  o.ticks_run = res.iterations;
  o.neurons = static_cast<std::uint64_t>(inst.dims() + inst.constraints());
  return o;
}

Outcome run_osnn(const FunctionSpec& f, ConfigReader& r, std::uint64_t seed, std::optional<Tick> budget) {
  OsnnConfig c;
  c.dims = f.dims;
  r.read("theta", c.theta);
  r.read("delta", c.delta);
  r.read("n_particles", c.n_particles);
  r.read("iterations", c.iterations);
  r.read("target", c.target);
  if (budget) c.iterations = *budget;
  r.finish();
  checked([&] { c.validate(); });
  const OsnnResult res = osnn_solve(f.objective(), f.bounds(), c, seed);
  Outcome o;
  o.solution = reals_json(res.x);
  o.feasible = true;
  const auto& traj = res.gb_trajectory;
  const auto first = std::find(traj.begin(), traj.end(), traj.empty() ? 0.0 : traj.back());
  o.ticks_to_best = traj.empty() ? 0 : static_cast<Tick>(first - traj.begin()) + 1;
  o.ticks_run = res.sweeps;
  o.spikes = res.spikes;
  o.neurons = static_cast<std::uint64_t>(c.n_particles) * static_cast<std::uint64_t>(c.dims);
  return o;
}

Outcome from_table(const FiringTimeTable& t, std::uint64_t neurons) {
  Outcome o;
  o.ticks_run = t.ticks_run;
  o.spikes = t.spikes;
  o.synaptic_events = t.synaptic_events;
  o.neurons = neurons;
  o.source_spikes = 1;
  return o;
}

Outcome run_sssp(const WeightedGraph& g, ConfigReader& r) {
  int source = 0;
  r.read("source", source);
  r.finish();
  if (source < 0 || source >= g.n) throw ConfigError("config: source out of range");
  const FiringTimeTable t = sssp(g, source);
  Outcome o = from_table(t, static_cast<std::uint64_t>(g.n));
  json table = json::array();
  Tick last = 0;
  for (const auto& time : t.times) {
    table.push_back(time ? json(*time) : json(nullptr));
    if (time) last = std::max(last, *time);
  }
  o.solution = table;
  o.feasible = true;
  o.ticks_to_best = last;
  return o;
}

Outcome run_plan(const GridWorld& w, ConfigReader& r) {
  r.finish();
  const PlanResult res = plan(w);
  Outcome o = from_table(res.times, static_cast<std::uint64_t>(res.grid.graph.n));
  if (res.path) {
    json path = json::array();
    for (const Cell& c : *res.path) path.push_back({c.row, c.col});
    o.solution = path;
    o.feasible = true;
    o.ticks_to_best = res.times.times[static_cast<std::size_t>(res.grid.node_of[static_cast<std::size_t>(w.index(w.start))])];
  }
  return o;
}

}  // namespace

ResultRecord run_solver(const LoadedProblem& problem, Solver solver, const json& config, std::uint64_t seed,
                        std::optional<Tick> budget) {
  if (!compatible(problem.kind, solver)) {
    throw IncompatibleError("solver '" + to_string(solver) + "' cannot run on '" + to_string(problem.kind) + "' problems");
  }
  const auto start = std::chrono::steady_clock::now();
  ConfigReader reader(config);
  EnergyModel model;
  if (auto e = reader.object("energy")) checked([&] { model = energy_model_from_json(*e); });

  Outcome o;
  switch (solver) {
    case Solver::Anneal:
    case Solver::Iterated:
    case Solver::Swarm: o = run_binary(problem, solver, reader, seed, budget); break;
    case Solver::Sat: o = run_sat(std::get<CnfFormula>(problem.instance), reader, seed, budget); break;
    case Solver::Csp: o = run_csp(std::get<CspInstance>(problem.instance), reader, seed, budget); break;
    case Solver::TspWta: o = run_tsp_wta(std::get<TspInstance>(problem.instance), reader, seed, budget); break;
    case Solver::Aco: o = run_aco(std::get<TspInstance>(problem.instance), reader, seed, budget); break;
    case Solver::Qp: o = run_qp(std::get<QpInstance>(problem.instance), reader, budget); break;
    case Solver::Osnn: o = run_osnn(std::get<FunctionSpec>(problem.instance), reader, seed, budget); break;
    case Solver::Sssp: o = run_sssp(std::get<WeightedGraph>(problem.instance), reader); break;
    case Solver::Plan: o = run_plan(std::get<GridWorld>(problem.instance), reader); break;
  }

  ResultRecord rec;
  rec.problem_kind = to_string(problem.kind);
  rec.problem_hash = problem.hash;
  rec.solver = to_string(solver);
  json canonical{{"config", config.is_null() ? json::object() : config}};
  canonical["budget"] = budget ? json(*budget) : json(nullptr);
  rec.config_hash = fnv1a_hex(canonical.dump());
  rec.seed = seed;
  if (o.solution) {
    rec.best_solution = ordered_json(*o.solution);
    rec.best_objective = evaluate_solution(problem, *o.solution);
  }
  rec.feasible = o.feasible;
  rec.ticks_to_best = o.ticks_to_best;
  rec.ticks_run = o.ticks_run;
  rec.spikes_total = o.spikes;
  rec.synaptic_events = o.synaptic_events;
  rec.events.ticks = o.ticks_run;
  rec.events.neurons = o.neurons;
  rec.events.spikes = o.spikes;
  rec.events.deliveries = o.synaptic_events;
  rec.events.source_spikes = o.source_spikes;
  rec.energy = estimate_energy(rec.events, model);
  rec.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

// --- oracle -----------------------------------------------------------------------

namespace {

struct OracleVisitor {
  const json& config;

  ordered_json operator()(const QuboInstance& inst) const {
    const QuboOptimum opt = brute_force(inst);
    return {{"method", "exhaustive"},
            {"evaluated", std::uint64_t{1} << inst.n()},
            {"objective", authored(inst, opt.objective)},
            {"solution", bits_json(opt.x)}};
  }
  ordered_json operator()(const IsingInstance& inst) const {
    const IsingToQubo conv = ising_to_qubo(inst);
    const QuboOptimum opt = brute_force(conv.qubo);
    const Eigen::VectorXd s = spins_from_bits(opt.x);
    json spins = json::array();
    for (double v : s) spins.push_back(static_cast<int>(v));
    return {{"method", "exhaustive"},
            {"evaluated", std::uint64_t{1} << inst.n()},
            {"objective", ising_energy(inst, s) + inst.offset},
            {"solution", spins}};
  }
  ordered_json operator()(const CnfFormula& f) const {
    const CnfOptimum opt = brute_force(f);
    return {{"method", "exhaustive"},
            {"evaluated", std::uint64_t{1} << f.n_vars},
            {"objective", static_cast<double>(f.clauses.size() - opt.satisfied)},
            {"satisfiable", opt.satisfiable},
            {"solution", bits_json(opt.assignment)}};
  }
  ordered_json operator()(const CspInstance& inst) const {
    const CspOptimum opt = brute_force(inst);
    return {{"method", "exhaustive"},
            {"objective", static_cast<double>(opt.violations)},
            {"solution", opt.assignment}};
  }
  ordered_json operator()(const TspInstance& inst) const {
    const TspOptimum opt = brute_force(inst);
    std::uint64_t tours = 1;
    for (Eigen::Index k = 2; k < inst.n(); ++k) tours *= static_cast<std::uint64_t>(k);
    return {{"method", "exhaustive"}, {"evaluated", tours}, {"objective", opt.length}, {"solution", opt.tour}};
  }
  ordered_json operator()(const QpInstance& inst) const {
    const QpReference ref = reference_qp_solve(inst);
    return {{"method", "accelerated projected gradient"},
            {"iterations", ref.iterations},
            {"objective", ref.objective},
            {"max_violation", max_violation(inst, ref.x)},
            {"solution", reals_json(ref.x)}};
  }
  ordered_json operator()(const FunctionSpec& f) const {
    const double at = f.name == "rosenbrock" ? 1.0 : 0.0;
    if (at < f.lo || at > f.hi) throw IncompatibleError("the known minimizer lies outside the bounds");
    const Eigen::VectorXd x = Eigen::VectorXd::Constant(f.dims, at);
    return {{"method", "analytic"}, {"objective", f.objective()(x)}, {"solution", reals_json(x)}};
  }
  ordered_json operator()(const WeightedGraph& g) const {
    ConfigReader r(config);
    int source = 0;
    r.read("source", source);
    r.finish();
    if (source < 0 || source >= g.n) throw ConfigError("config: source out of range");
    json table = json::array();
    double total = 0.0;
    for (const auto& d : dijkstra(g, source)) {
      table.push_back(d ? json(*d) : json(nullptr));
      if (d) total += static_cast<double>(*d);
    }
    return {{"method", "dijkstra"}, {"objective", total}, {"solution", table}};
  }
  ordered_json operator()(const GridWorld& w) const {
    const auto len = bfs_path_length(w);
    return {{"method", "bfs"}, {"objective", len ? json(*len) : json(nullptr)}, {"reachable", len.has_value()}};
  }
};

}  // namespace

ordered_json oracle(const LoadedProblem& problem, const json& config) {
  ordered_json doc;
  doc["schema"] = "spikeopt.oracle";
  doc["schema_version"] = kResultSchemaVersion;
  doc["problem"] = {{"kind", to_string(problem.kind)}, {"hash", problem.hash}};
  const ordered_json body = std::visit(OracleVisitor{config}, problem.instance);
  for (const auto& [k, v] : body.items()) doc[k] = v;
  doc["version"] = kVersion;
  return doc;
}

}  // namespace spikeopt::cli
