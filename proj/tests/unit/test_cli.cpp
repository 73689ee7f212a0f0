#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <numeric>

#include "spikeopt/cli.hpp"
#include "spikeopt/problem_io.hpp"

using namespace spikeopt;
using namespace spikeopt::cli;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = SPIKEOPT_FIXTURES;

fs::path scratch_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("spikeopt_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int tool(const std::string& args) {
  const std::string cmd = std::string("\"") + SPIKEOPT_TOOL + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string strip_wall_time(std::string text) {
  auto doc = nlohmann::ordered_json::parse(text);
  if (doc.is_array()) {
    for (auto& r : doc) r.erase("wall_time_ms");
  } else {
    doc.erase("wall_time_ms");
  }
  return doc.dump(2);
}

QuboInstance random_small_qubo(int n, std::uint64_t seed) {
  Rng rng(seed);
  return random_qubo(n, -8, 8, rng);
}

fs::path write_scratch(const std::string& name, const std::string& text) {
  const fs::path p = scratch_dir() / name;
  io::write_text(p, text);
  return p;
}

}  // namespace

TEST_CASE("names and compatibility") {
  for (const auto& name : solver_names()) CHECK(to_string(solver_from_string(name)) == name);
  for (const auto& name : problem_kind_names()) CHECK(to_string(problem_kind_from_string(name)) == name);
  CHECK_THROWS_AS(solver_from_string("magic"), ConfigError);
  CHECK(compatible(ProblemKind::Qubo, Solver::Anneal));
  CHECK(compatible(ProblemKind::Tsp, Solver::Aco));
  CHECK_FALSE(compatible(ProblemKind::Qubo, Solver::Qp));
  CHECK_FALSE(compatible(ProblemKind::Grid, Solver::Sssp));
  for (auto kind : {ProblemKind::Qubo, ProblemKind::Cnf, ProblemKind::Grid, ProblemKind::Function}) {
    CHECK_FALSE(solvers_for(kind).empty());
  }
}

TEST_CASE("seed lists") {
  CHECK(parse_seed_list("3") == std::vector<std::uint64_t>{3});
  CHECK(parse_seed_list("1,4,9") == std::vector<std::uint64_t>{1, 4, 9});
  CHECK(parse_seed_list("1-3,7") == std::vector<std::uint64_t>{1, 2, 3, 7});
  CHECK_THROWS(parse_seed_list("5-2"));
  CHECK_THROWS(parse_seed_list("x"));
}

TEST_CASE("solve the two-variable fixture") {
  const LoadedProblem p = load_problem(kFixtures / "two_var.qubo");
  CHECK(p.kind == ProblemKind::Qubo);
  CHECK(p.hash == load_problem(kFixtures / "two_var.qubo").hash);
  CHECK(p.hash.rfind("fnv1a64:", 0) == 0);
  const ResultRecord r = run_solver(p, Solver::Anneal, nullptr, 3, 200);
  REQUIRE(r.best_objective);
  CHECK(*r.best_objective == -2.0);
  CHECK(r.best_solution == nlohmann::ordered_json::array({0, 1}));
  CHECK(r.feasible);
  CHECK(r.problem_hash == p.hash);

  const fs::path out = scratch_dir() / "two_var.json";
  REQUIRE(tool("solve --problem \"" + (kFixtures / "two_var.qubo").string() + "\" --seed 3 --budget 200 --output \"" +
               out.string() + "\"") == 0);
  const auto doc = nlohmann::json::parse(io::read_text(out));
  CHECK(doc["best_objective"] == -2.0);
  CHECK(doc["schema"] == "spikeopt.result");
}

TEST_CASE("exit codes") {
  const std::string fixture = "\"" + (kFixtures / "two_var.qubo").string() + "\"";
  CHECK(tool("solve --problem /nonexistent/file.qubo") == kExitParse);
  CHECK(tool("solve --problem " + fixture + " --solver qp") == kExitIncompatible);
  CHECK(tool("solve --problem " + fixture + " --solver nonsense") == kExitParse);
  const fs::path bad = write_scratch("bad.json", "{\"tickz\": 5}");
  CHECK(tool("solve --problem " + fixture + " --config \"" + bad.string() + "\"") == kExitConfig);
  const fs::path broken = write_scratch("broken.qubo", "2 1\n0 5 1\n");
  CHECK(tool("solve --problem \"" + broken.string() + "\"") == kExitParse);
  CHECK(tool("solve") == kExitParse);

  const fs::path big = scratch_dir() / "big.qubo";
  REQUIRE(tool("generate --kind qubo --n 25 --seed 1 --output \"" + big.string() + "\"") == 0);
  CHECK(tool("oracle --problem \"" + big.string() + "\"") == kExitOverCap);
  CHECK(tool("solve --problem \"" + big.string() + "\" --budget 100") == kExitOk);
}

TEST_CASE("oracle examples") {
  const LoadedProblem tsp = load_problem(kFixtures / "five_city.tsp");
  const auto& inst = std::get<TspInstance>(tsp.instance);
  std::vector<int> perm{0, 1, 2, 3, 4};
  double best = INFINITY;
  int tours = 0;
  do {
    best = std::min(best, tour_length(inst, perm));
    ++tours;
  } while (std::next_permutation(perm.begin(), perm.end()));
  CHECK(tours == 120);
  const auto o = oracle(tsp);
  CHECK(o["objective"].get<double>() == best);
  CHECK(evaluate_solution(tsp, o["solution"]) == best);

  const LoadedProblem zero = parse_problem("3 0\n", ProblemKind::Qubo);
  CHECK(oracle(zero)["objective"].get<double>() == 0.0);
  CHECK(*run_solver(zero, Solver::Anneal, nullptr, 1, 50).best_objective == 0.0);

  const LoadedProblem grid = load_problem(kFixtures / "corridor.grid");
  CHECK(oracle(grid)["objective"].get<double>() == 6.0);
  const LoadedProblem cnf = load_problem(kFixtures / "small.cnf");
  CHECK(oracle(cnf)["satisfiable"] == true);
}

TEST_CASE("every solver: objective re-derivable and deterministic") {
  struct Case {
    LoadedProblem problem;
    Solver solver;
    nlohmann::json config;
  };
  const auto qubo = load_problem(kFixtures / "two_var.qubo");
  const auto tsp = load_problem(kFixtures / "five_city.tsp");
  Rng rng(3);
  const std::vector<Case> cases{
      {qubo, Solver::Anneal, {{"ticks", 300}}},
      {parse_problem(io::ising_to_json(random_spin_glass(6, rng)).dump(), ProblemKind::Ising), Solver::Anneal,
       {{"ticks", 300}}},
      {qubo, Solver::Iterated, {{"ticks", 100}, {"restarts", 3}}},
      {qubo, Solver::Swarm, {{"ticks", 100}, {"m", 3}}},
      {load_problem(kFixtures / "small.cnf"), Solver::Sat, {{"ticks", 500}}},
      {parse_problem(io::write_csp(coloring_csp(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}}, 3)), ProblemKind::Csp),
       Solver::Csp, {{"ticks", 2000}}},
      {tsp, Solver::TspWta, {{"ticks", 2000}}},
      {tsp, Solver::Aco, {{"iterations", 30}}},
      {parse_problem(io::write_qp(random_qp(4, 2, rng)), ProblemKind::Qp), Solver::Qp, nullptr},
      {parse_problem(R"({"function": "sphere", "dims": 3, "lo": -2, "hi": 2})", ProblemKind::Function), Solver::Osnn,
       {{"iterations", 500}}},
      {parse_problem("4 3 directed\n0 1 2\n1 2 3\n0 3 9\n", ProblemKind::Graph), Solver::Sssp, nullptr},
      {load_problem(kFixtures / "corridor.grid"), Solver::Plan, nullptr},
  };
  for (const auto& c : cases) {
    CAPTURE(to_string(c.solver));
    const ResultRecord a = run_solver(c.problem, c.solver, c.config, 7);
    const ResultRecord b = run_solver(c.problem, c.solver, c.config, 7);
    REQUIRE(a.best_objective);
    CHECK(*a.best_objective == evaluate_solution(c.problem, a.best_solution));
    nlohmann::ordered_json ja = to_json(a), jb = to_json(b);
    ja.erase("wall_time_ms");
    jb.erase("wall_time_ms");
    CHECK(ja.dump() == jb.dump());
    CHECK(a.energy.total_j >= 0.0);
    CHECK(a.synaptic_events == a.events.deliveries);
  }
}

TEST_CASE("tool output is byte-identical across runs") {
  const std::string fixture = "\"" + (kFixtures / "five_city.tsp").string() + "\"";
  const fs::path a = scratch_dir() / "a.json", b = scratch_dir() / "b.json";
  for (const std::string solver : {"tsp-wta", "aco"}) {
    const std::string base = "solve --problem " + fixture + " --solver " + solver + " --seeds 1-3 --budget 300 --output ";
    REQUIRE(tool(base + "\"" + a.string() + "\"") == 0);
    REQUIRE(tool(base + "\"" + b.string() + "\"") == 0);
    CHECK(strip_wall_time(io::read_text(a)) == strip_wall_time(io::read_text(b)));
    CHECK(nlohmann::json::parse(io::read_text(a)).size() == 3);
  }
}

TEST_CASE("result records are strict") {
  const ResultRecord r = run_solver(load_problem(kFixtures / "two_var.qubo"), Solver::Anneal, nullptr, 1, 100);
  const nlohmann::json doc = nlohmann::json::parse(to_json(r).dump());
  const ResultRecord back = result_from_json(doc);
  CHECK(to_json(back).dump() == to_json(r).dump());

  nlohmann::json extra = doc;
  extra["surprise"] = 1;
  CHECK_THROWS(result_from_json(extra));
  nlohmann::json newer = doc;
  newer["schema_version"] = kResultSchemaVersion + 1;
  CHECK_THROWS(result_from_json(newer));
  nlohmann::json missing = doc;
  missing.erase("seed");
  CHECK_THROWS(result_from_json(missing));
}

TEST_CASE("bench: cardinality and parallel determinism") {
  const BenchSuite suite = parse_suite(nlohmann::json::parse(io::read_text(kFixtures / "suite.json")), kFixtures);
  REQUIRE(suite.entries.size() == 3);
  const auto seeds = parse_seed_list("1-5");
  const auto serial = run_bench(suite, seeds, 1);
  const auto parallel = run_bench(suite, seeds, 8);
  CHECK(serial.size() == 15);
  CHECK(bench_csv(serial) == bench_csv(parallel));
  for (const auto& row : serial) CHECK(row.ok);
  const auto summary = bench_summary(suite, serial);
  CHECK(summary.dump() == bench_summary(suite, parallel).dump());

  // A failing row is recorded, not fatal.
  const BenchSuite broken = parse_suite(
      nlohmann::json::parse(R"({"runs": [{"problem": "two_var.qubo", "solver": "qp"}]})"), kFixtures);
  const auto rows = run_bench(broken, {1}, 1);
  REQUIRE(rows.size() == 1);
  CHECK_FALSE(rows[0].ok);
  CHECK_FALSE(rows[0].error.empty());
  CHECK_THROWS(parse_suite(nlohmann::json::parse(R"({"runs": [{"problem": "x", "solverr": "anneal"}]})"), kFixtures));

  const fs::path csv = scratch_dir() / "bench.csv";
  CHECK(tool("bench --suite \"" + (kFixtures / "suite.json").string() + "\" --seeds 1-5 --jobs 4 --output \"" +
             csv.string() + "\"") == 0);
  CHECK(io::read_text(csv) == bench_csv(serial));
}

TEST_CASE("convert round trip") {
  for (int n = 1; n <= 12; ++n) {
    const QuboInstance q = random_small_qubo(n, 40 + n);
    const fs::path qpath = write_scratch("conv.qubo", io::write_qubo(q));
    const fs::path ipath = scratch_dir() / "conv.json";
    const fs::path back = scratch_dir() / "back.qubo";
    REQUIRE(tool("convert --problem \"" + qpath.string() + "\" --output \"" + ipath.string() + "\"") == 0);
    REQUIRE(tool("convert --problem \"" + ipath.string() + "\" --output \"" + back.string() + "\"") == 0);
    const LoadedProblem ising = load_problem(ipath);
    REQUIRE(ising.kind == ProblemKind::Ising);
    const std::string text = io::read_text(back);
    REQUIRE(text.rfind("# constant ", 0) == 0);
    const double constant = std::stod(text.substr(11, text.find('\n') - 11));
    const LoadedProblem q2 = parse_problem(text, ProblemKind::Qubo);
    const std::uint64_t states = std::uint64_t{1} << n;
    for (std::uint64_t s = 0; s < states; ++s) {
      BitVector x(n);
      nlohmann::json bits = nlohmann::json::array(), spins = nlohmann::json::array();
      for (int i = 0; i < n; ++i) {
        x[i] = (s >> i) & 1U;
        bits.push_back(x[i]);
        spins.push_back(x[i] ? 1 : -1);
      }
      const double f = qubo_objective(q, x);
      CHECK(evaluate_solution(ising, spins) == doctest::Approx(f).epsilon(1e-12));
      CHECK(evaluate_solution(q2, bits) + constant == doctest::Approx(f).epsilon(1e-12));
    }
  }
  const fs::path zero = write_scratch("zero.qubo", "3 0\n");
  const fs::path zi = scratch_dir() / "zero.json";
  REQUIRE(tool("convert --problem \"" + zero.string() + "\" --output \"" + zi.string() + "\"") == 0);
  const LoadedProblem zp = load_problem(zi);
  const auto& z = std::get<IsingInstance>(zp.instance);
  CHECK(z.j.isZero(0.0));
  CHECK(z.h.isZero(0.0));
  CHECK(z.offset == 0.0);
  CHECK(tool("convert --problem \"" + (kFixtures / "five_city.tsp").string() + "\"") == kExitIncompatible);
}
