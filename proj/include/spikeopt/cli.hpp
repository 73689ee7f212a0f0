#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "spikeopt/metrics.hpp"
#include "spikeopt/problems.hpp"
#include "spikeopt/swarm.hpp"
#include "spikeopt/wavefront.hpp"

namespace spikeopt::cli {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kResultSchemaVersion = 1;

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitParse = 2,
  kExitIncompatible = 3,
  kExitConfig = 4,
  kExitOverCap = 5,
};

class IncompatibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exit code for the exception currently being handled.
int exit_code_for_current_exception(std::string* message = nullptr);

enum class ProblemKind { Qubo, Ising, Cnf, Csp, Tsp, Qp, Function, Graph, Grid };
enum class Solver { Anneal, Iterated, Sat, Csp, TspWta, Swarm, Osnn, Aco, Qp, Sssp, Plan };

std::string to_string(ProblemKind kind);
std::string to_string(Solver solver);
ProblemKind problem_kind_from_string(const std::string& name);  // ConfigError on unknown names
Solver solver_from_string(const std::string& name);
const std::vector<std::string>& problem_kind_names();
const std::vector<std::string>& solver_names();

[[nodiscard]] bool compatible(ProblemKind kind, Solver solver);
std::vector<Solver> solvers_for(ProblemKind kind);

/// Box-bounded benchmark function, stored as JSON
/// {"function": "sphere" | "rastrigin" | "rosenbrock", "dims": D, "lo": a, "hi": b}.
struct FunctionSpec {
  std::string name = "sphere";
  int dims = 1;
  double lo = -5.0;
  double hi = 5.0;

  void validate() const;
  [[nodiscard]] Objective objective() const;
  [[nodiscard]] Bounds bounds() const;
};

using Instance = std::variant<QuboInstance, IsingInstance, CnfFormula, CspInstance, TspInstance, QpInstance,
                              FunctionSpec, WeightedGraph, GridWorld>;

struct LoadedProblem {
  ProblemKind kind = ProblemKind::Qubo;
  std::string hash;  // of the file bytes
  Instance instance;
};

std::string fnv1a_hex(const std::string& bytes);

/// Extension first (.qubo .cnf .tsp .graph .grid), then the keys of a JSON
/// document (ising format tag, q/p/a/k, domains, function).
ProblemKind detect_kind(const std::filesystem::path& path, const std::string& text);
LoadedProblem load_problem(const std::filesystem::path& path, std::optional<ProblemKind> kind = std::nullopt);
LoadedProblem parse_problem(const std::string& text, ProblemKind kind);

struct RunSpec {
  std::filesystem::path problem_path;
  std::optional<ProblemKind> problem_kind;
  Solver solver = Solver::Anneal;
  std::optional<std::filesystem::path> config_path;
  std::vector<std::uint64_t> seeds{0};
  std::optional<Tick> budget;  // ticks, sweeps or iterations, depending on the solver
  std::optional<std::filesystem::path> output_path;

  void validate() const;
};

/// "3", "1,4,9" or "1-20" (inclusive); combinations separated by commas.
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

struct ResultRecord {
  std::string problem_kind;
  std::string problem_hash;
  std::string solver;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::optional<double> best_objective;  // absent when no feasible solution was decoded
  nlohmann::ordered_json best_solution;  // null alongside an absent objective
  bool feasible = false;
  std::optional<Tick> ticks_to_best;
  Tick ticks_run = 0;
  std::uint64_t spikes_total = 0;
  std::uint64_t synaptic_events = 0;
  EventCounts events;
  EnergyBreakdown energy;
  double wall_time_ms = 0.0;
  std::string version = kVersion;
};

nlohmann::ordered_json to_json(const ResultRecord& r);
/// Rejects unknown fields and schema versions other than the current one.
ResultRecord result_from_json(const nlohmann::json& doc);

/// Objective of a solution in the encoding emitted by run_solver; throws
/// InvalidArgument when the solution does not fit the instance.
double evaluate_solution(const LoadedProblem& problem, const nlohmann::json& solution);

/// One run. `config` is the solver's JSON object (null for defaults);
/// unknown keys and invalid values raise ConfigError.
ResultRecord run_solver(const LoadedProblem& problem, Solver solver, const nlohmann::json& config,
                        std::uint64_t seed, std::optional<Tick> budget = std::nullopt);

/// Exact optimum by exhaustive search (SizeCapError past the caps), or the
/// reference solver for QP, Dijkstra for graphs and BFS for grids.
nlohmann::ordered_json oracle(const LoadedProblem& problem, const nlohmann::json& config = nullptr);

// --- bench ---------------------------------------------------------------------

struct BenchEntry {
  std::filesystem::path problem;
  std::optional<ProblemKind> kind;
  Solver solver = Solver::Anneal;
  nlohmann::json config;           // inline object, or null
  std::optional<double> target;    // success needs feasible and best_objective <= target
  std::optional<Tick> budget;
};

struct BenchSuite {
  std::vector<BenchEntry> entries;
};

/// {"runs": [{"problem": path, "solver": name, "kind"?, "config"?: object | path,
/// "target"?, "budget"?}]}; relative paths resolve against `base_dir`.
BenchSuite parse_suite(const nlohmann::json& doc, const std::filesystem::path& base_dir);

struct BenchRow {
  std::size_t entry = 0;
  std::string problem;
  std::string solver;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  bool success = false;
  std::optional<ResultRecord> record;
};

/// Rows ordered by (entry, seed position) whatever the worker count.
std::vector<BenchRow> run_bench(const BenchSuite& suite, const std::vector<std::uint64_t>& seeds, int jobs);
std::string bench_csv(const std::vector<BenchRow>& rows);
nlohmann::ordered_json bench_summary(const BenchSuite& suite, const std::vector<BenchRow>& rows);

/// Entry point behind tools/spikeopt; returns the process exit code.
int main(int argc, char** argv);

}  // namespace spikeopt::cli
