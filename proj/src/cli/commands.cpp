#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "spikeopt/cli.hpp"
#include "spikeopt/problem_io.hpp"

namespace spikeopt::cli {

using nlohmann::json;
using nlohmann::ordered_json;

// --- bench ------------------------------------------------------------------------

BenchSuite parse_suite(const json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object() || !doc.contains("runs") || !doc["runs"].is_array()) {
    throw ParseError("suite must be an object with a 'runs' array", 0);
  }
  auto resolve = [&base_dir](const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  };
  BenchSuite suite;
  for (const auto& run : doc["runs"]) {
    if (!run.is_object()) throw ParseError("suite runs must be objects", 0);
    for (const auto& [key, _] : run.items()) {
      if (key != "problem" && key != "solver" && key != "kind" && key != "config" && key != "target" && key != "budget") {
        throw ParseError("suite run: unknown key '" + key + "'", 0);
      }
    }
    if (!run.contains("problem") || !run.contains("solver")) throw ParseError("suite run needs 'problem' and 'solver'", 0);
    try {
      BenchEntry e;
      e.problem = resolve(run["problem"].get<std::string>());
      e.solver = solver_from_string(run["solver"].get<std::string>());
      if (run.contains("kind")) e.kind = problem_kind_from_string(run["kind"].get<std::string>());
      if (run.contains("config")) {
        const auto& c = run["config"];
        e.config = c.is_string() ? io::parse_json(io::read_text(resolve(c.get<std::string>()))) : c;
      }
      if (run.contains("target")) e.target = run["target"].get<double>();
      if (run.contains("budget")) e.budget = run["budget"].get<Tick>();
      suite.entries.push_back(std::move(e));
    } catch (const json::exception& ex) {
      throw ParseError(std::string("suite run: ") + ex.what(), 0);
    }
  }
  return suite;
}

std::vector<BenchRow> run_bench(const BenchSuite& suite, const std::vector<std::uint64_t>& seeds, int jobs) {
  if (seeds.empty()) throw ConfigError("bench: no seeds");
  if (jobs < 1) throw ConfigError("bench: jobs must be >= 1");
  const std::size_t total = suite.entries.size() * seeds.size();
  std::vector<BenchRow> rows(total);

  // Problems are loaded once; a load failure is recorded on every row of its entry.
  std::vector<std::optional<LoadedProblem>> problems(suite.entries.size());
  std::vector<std::string> load_errors(suite.entries.size());
  for (std::size_t e = 0; e < suite.entries.size(); ++e) {
    try {
      problems[e] = load_problem(suite.entries[e].problem, suite.entries[e].kind);
    } catch (...) {
      exit_code_for_current_exception(&load_errors[e]);
    }
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < total; i = next++) {
      const std::size_t e = i / seeds.size();
      const BenchEntry& entry = suite.entries[e];
      BenchRow& row = rows[i];
      row.entry = e;
      row.problem = entry.problem.filename().string();
      row.solver = to_string(entry.solver);
      row.seed = seeds[i % seeds.size()];
      if (!problems[e]) {
        row.error = load_errors[e];
        continue;
      }
      try {
        row.record = run_solver(*problems[e], entry.solver, entry.config, row.seed, entry.budget);
        row.ok = true;
        row.success = row.record->feasible && row.record->best_objective &&
                      (!entry.target || *row.record->best_objective <= *entry.target);
      } catch (...) {
        exit_code_for_current_exception(&row.error);
      }
      spdlog::debug("bench row {} ({} {} seed {}) {}", i, row.problem, row.solver, row.seed, row.ok ? "ok" : row.error);
    }
  };
  const int workers = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(jobs), std::max<std::size_t>(total, 1)));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return rows;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::optional<double> median(std::vector<double> v) {
  if (v.empty()) return std::nullopt;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream out;
  out << "entry,problem,solver,seed,status,feasible,success,best_objective,ticks_to_best,ticks_run,spikes_total,"
         "synaptic_events,energy_total_j,error\n";
  for (const auto& r : rows) {
    out << r.entry << ',' << csv_field(r.problem) << ',' << r.solver << ',' << r.seed << ',' << (r.ok ? "ok" : "failed")
        << ',';
    if (r.record) {
      const auto& rec = *r.record;
      out << (rec.feasible ? 1 : 0) << ',' << (r.success ? 1 : 0) << ','
          << (rec.best_objective ? io::format_double(*rec.best_objective) : "") << ','
          << (rec.ticks_to_best ? std::to_string(*rec.ticks_to_best) : "") << ',' << rec.ticks_run << ','
          << rec.spikes_total << ',' << rec.synaptic_events << ',' << io::format_double(rec.energy.total_j) << ',';
    } else {
      out << "0,0,,,,,,,";
    }
    out << csv_field(r.error) << '\n';
  }
  return out.str();
}

ordered_json bench_summary(const BenchSuite& suite, const std::vector<BenchRow>& rows) {
  ordered_json entries = ordered_json::array();
  for (std::size_t e = 0; e < suite.entries.size(); ++e) {
    std::size_t runs = 0, failures = 0, successes = 0;
    std::vector<double> ticks;
    double energy = 0.0;
    for (const auto& r : rows) {
      if (r.entry != e) continue;
      ++runs;
      if (!r.ok) {
        ++failures;
        continue;
      }
      if (r.success) {
        ++successes;
        if (r.record->ticks_to_best) ticks.push_back(static_cast<double>(*r.record->ticks_to_best));
      }
      energy += r.record->energy.total_j;
    }
    const auto med = median(ticks);
    const std::size_t completed = runs - failures;
    entries.push_back({{"entry", e},
                       {"problem", suite.entries[e].problem.filename().string()},
                       {"solver", to_string(suite.entries[e].solver)},
                       {"runs", runs},
                       {"failures", failures},
                       {"success_rate", runs ? static_cast<double>(successes) / static_cast<double>(runs) : 0.0},
                       {"median_ticks_to_best", med ? ordered_json(*med) : ordered_json(nullptr)},
                       {"mean_energy_j", completed ? energy / static_cast<double>(completed) : 0.0}});
  }
  return {{"schema", "spikeopt.bench"}, {"schema_version", kResultSchemaVersion}, {"entries", entries}, {"version", kVersion}};
}

// --- command line -------------------------------------------------------------------

namespace {

void emit(const std::optional<std::filesystem::path>& path, const std::string& text) {
  if (path) io::write_text(*path, text);
  else std::cout << text;
}

json load_config(const std::optional<std::filesystem::path>& path) {
  if (!path) return nullptr;
  try {
    return io::parse_json(io::read_text(*path));
  } catch (const ParseError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

void setup_logging() {
  auto logger = spdlog::get("spikeopt");
  if (!logger) logger = spdlog::stderr_color_mt("spikeopt");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("SPIKEOPT_LOG")) spdlog::set_level(spdlog::level::from_str(env));
}

template <typename F>
int guarded_command(F&& f) {
  try {
    return f();
  } catch (...) {
    std::string message;
    const int code = exit_code_for_current_exception(&message);
    spdlog::error("{}", message);
    return code;
  }
}

int cmd_solve(const RunSpec& spec) {
  const LoadedProblem problem = load_problem(spec.problem_path, spec.problem_kind);
  RunSpec resolved = spec;
  resolved.problem_kind = problem.kind;
  resolved.validate();
  const json config = load_config(spec.config_path);
  ordered_json out;
  if (spec.seeds.size() == 1) {
    out = to_json(run_solver(problem, spec.solver, config, spec.seeds.front(), spec.budget));
  } else {
    out = ordered_json::array();
    for (auto seed : spec.seeds) out.push_back(to_json(run_solver(problem, spec.solver, config, seed, spec.budget)));
  }
  spdlog::info("solve {} on {} done", to_string(spec.solver), spec.problem_path.string());
  emit(spec.output_path, out.dump(2) + "\n");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Spiking-network optimization solvers and benchmark harness"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  RunSpec spec;
  std::string kind_name, solver_name = "anneal", seeds_text;
  std::string config_path, output_path;
  Tick budget = 0;

  auto* solve = app.add_subcommand("solve", "run one solver on one problem file");
  solve->add_option("--problem", spec.problem_path, "problem file")->required();
  solve->add_option("--kind", kind_name, "problem kind (default: from the file)")->check(CLI::IsMember(problem_kind_names()));
  solve->add_option("--solver", solver_name, "solver")->check(CLI::IsMember(solver_names()));
  solve->add_option("--config", config_path, "solver config JSON");
  solve->add_option("--seed", spec.seeds.front(), "seed");
  solve->add_option("--seeds", seeds_text, "seed list, e.g. 1-20 or 1,5,9 (overrides --seed)");
  solve->add_option("--budget", budget, "tick / sweep / iteration budget")->check(CLI::PositiveNumber);
  solve->add_option("--output", output_path, "result JSON path (default stdout)");

  std::string oracle_problem, oracle_kind, oracle_config, oracle_output;
  auto* orc = app.add_subcommand("oracle", "exact or reference optimum of a problem file");
  orc->add_option("--problem", oracle_problem, "problem file")->required();
  orc->add_option("--kind", oracle_kind, "problem kind")->check(CLI::IsMember(problem_kind_names()));
  orc->add_option("--config", oracle_config, "JSON with oracle options (graph: source)");
  orc->add_option("--output", oracle_output, "output path");

  std::string suite_path, bench_seeds = "0", bench_output, bench_summary_path;
  int jobs = 1;
  auto* bench = app.add_subcommand("bench", "run a suite of (problem, solver, config) runs over seeds");
  bench->add_option("--suite", suite_path, "suite JSON")->required();
  bench->add_option("--seeds", bench_seeds, "seed list");
  bench->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  bench->add_option("--output", bench_output, "per-run CSV path (default stdout)");
  bench->add_option("--summary", bench_summary_path, "aggregate JSON path");

  std::string convert_input, convert_output;
  auto* convert = app.add_subcommand("convert", "QUBO text <-> Ising JSON");
  convert->add_option("--problem", convert_input, "QUBO (.qubo) or Ising (.json) file")->required();
  convert->add_option("--output", convert_output, "output path");

  std::string gen_kind, gen_output;
  int gen_n = 16, gen_m = 0, gen_colors = 3, gen_max_weight = 10, gen_lo = -8, gen_hi = 8;
  double gen_density = 0.15;
  bool gen_undirected = false, gen_lp = false;
  std::uint64_t gen_seed = 0;
  auto* gen = app.add_subcommand("generate", "write a random instance");
  gen->add_option("--kind", gen_kind, "qubo, spin-glass, cnf, tsp, qp, coloring, graph or maze")
      ->required()
      ->check(CLI::IsMember({"qubo", "spin-glass", "cnf", "tsp", "qp", "coloring", "graph", "maze"}));
  gen->add_option("--n", gen_n, "variables, cities, nodes, QP dimension or maze width");
  gen->add_option("--m", gen_m, "clauses, edges, QP constraints or maze height");
  gen->add_option("--density", gen_density, "edge probability or obstacle density");
  gen->add_option("--lo", gen_lo, "smallest QUBO entry");
  gen->add_option("--hi", gen_hi, "largest QUBO entry");
  gen->add_option("--colors", gen_colors, "colors for coloring CSPs");
  gen->add_option("--max-weight", gen_max_weight, "largest graph weight");
  gen->add_flag("--undirected", gen_undirected, "undirected graph");
  gen->add_flag("--lp", gen_lp, "QP with Q = 0");
  gen->add_option("--seed", gen_seed, "seed");
  gen->add_option("--output", gen_output, "output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitParse;
  }
  auto opt_path = [](const std::string& s) {
    return s.empty() ? std::nullopt : std::optional<std::filesystem::path>(s);
  };

  if (*solve) {
    return guarded_command([&] {
      if (!kind_name.empty()) spec.problem_kind = problem_kind_from_string(kind_name);
      spec.solver = solver_from_string(solver_name);
      spec.config_path = opt_path(config_path);
      spec.output_path = opt_path(output_path);
      if (!seeds_text.empty()) spec.seeds = parse_seed_list(seeds_text);
      if (budget > 0) spec.budget = budget;
      // Incompatible pairs are rejected before the file is read when the kind is given.
      if (spec.problem_kind) spec.validate();
      return cmd_solve(spec);
    });
  }
  if (*orc) {
    return guarded_command([&] {
      const auto kind = oracle_kind.empty() ? std::nullopt : std::optional(problem_kind_from_string(oracle_kind));
      const LoadedProblem problem = load_problem(oracle_problem, kind);
      emit(opt_path(oracle_output), oracle(problem, load_config(opt_path(oracle_config))).dump(2) + "\n");
      return kExitOk;
    });
  }
  if (*bench) {
    return guarded_command([&] {
      const std::filesystem::path path(suite_path);
      const BenchSuite suite = parse_suite(io::parse_json(io::read_text(path)), path.parent_path());
      const auto rows = run_bench(suite, parse_seed_list(bench_seeds), jobs);
      emit(opt_path(bench_output), bench_csv(rows));
      if (!bench_summary_path.empty()) io::write_text(bench_summary_path, bench_summary(suite, rows).dump(2) + "\n");
      return kExitOk;
    });
  }
  if (*convert) {
    return guarded_command([&] {
      const LoadedProblem problem = load_problem(convert_input);
      std::string text;
      if (const auto* q = std::get_if<QuboInstance>(&problem.instance)) {
        text = io::ising_to_json(qubo_to_ising(*q)).dump(2) + "\n";
      } else if (const auto* s = std::get_if<IsingInstance>(&problem.instance)) {
        const IsingToQubo conv = ising_to_qubo(*s);
        text = "# constant " + io::format_double(conv.constant) + "\n" + io::write_qubo(conv.qubo);
      } else {
        throw IncompatibleError("convert takes a QUBO or an Ising problem");
      }
      emit(opt_path(convert_output), text);
      return kExitOk;
    });
  }
  return guarded_command([&] {
    Rng rng(gen_seed);
    std::string text;
    if (gen_kind == "qubo") {
      text = io::write_qubo(random_qubo(gen_n, gen_lo, gen_hi, rng));
    } else if (gen_kind == "spin-glass") {
      text = io::ising_to_json(random_spin_glass(gen_n, rng)).dump(2) + "\n";
    } else if (gen_kind == "cnf") {
      text = io::write_dimacs(random_3cnf(gen_n, gen_m, rng));
    } else if (gen_kind == "tsp") {
      text = io::write_tsp(random_tsp(gen_n, rng));
    } else if (gen_kind == "qp") {
      text = io::write_qp(random_qp(gen_n, gen_m, rng, gen_lp));
    } else if (gen_kind == "coloring") {
      text = io::write_csp(coloring_csp(gen_n, random_graph_edges(gen_n, gen_density, rng), gen_colors));
    } else if (gen_kind == "graph") {
      text = io::write_graph(random_graph(gen_n, gen_m, gen_max_weight, rng, !gen_undirected));
    } else {
      text = io::write_grid(random_maze(gen_n, gen_m > 0 ? gen_m : gen_n, gen_density, rng));
    }
    emit(opt_path(gen_output), text);
    return kExitOk;
  });
}

}  // namespace spikeopt::cli
