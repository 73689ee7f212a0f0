#include "spikeopt/problem_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>
#include <string_view>

namespace spikeopt::io {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

struct Line {
  std::size_t number;
  std::vector<std::string_view> tokens;
};

std::vector<std::string_view> split(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    const std::size_t start = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

// Non-empty lines whose first token does not start with one of `comment`.
std::vector<Line> content_lines(const std::string& text, std::string_view comment) {
  std::vector<Line> out;
  std::size_t number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    ++number;
    auto tokens = split(std::string_view(text).substr(pos, end - pos));
    if (!tokens.empty() && comment.find(tokens.front().front()) == std::string_view::npos) {
      out.push_back({number, std::move(tokens)});
    }
    pos = end + 1;
  }
  return out;
}

long long to_int(std::string_view tok, std::size_t line) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
    throw ParseError("expected an integer, got '" + std::string(tok) + "'", line);
  }
  return v;
}

double to_double(std::string_view tok, std::size_t line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size() || !std::isfinite(v)) {
    throw ParseError("expected a finite number, got '" + std::string(tok) + "'", line);
  }
  return v;
}

void require_content(const std::vector<Line>& lines, const char* what) {
  if (lines.empty()) throw ParseError(std::string("empty ") + what + " input", 1);
}

std::size_t line_of_offset(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

Eigen::MatrixXd matrix_from_json(const json& v, const char* key, Eigen::Index cols_if_empty) {
  if (!v.is_array()) throw ParseError(std::string("'") + key + "' must be an array of rows", 0);
  const auto rows = static_cast<Eigen::Index>(v.size());
  if (rows == 0) return Eigen::MatrixXd(0, cols_if_empty);
  const auto cols = static_cast<Eigen::Index>(v[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = v[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw ParseError(std::string("'") + key + "' rows must have equal length", 0);
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

Eigen::VectorXd vector_from_json(const json& v, const char* key) {
  if (!v.is_array()) throw ParseError(std::string("'") + key + "' must be an array", 0);
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i].get<double>();
  return out;
}

ordered_json matrix_to_json(const Eigen::MatrixXd& m) {
  auto out = ordered_json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    auto row = ordered_json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

ordered_json vector_to_json(const Eigen::VectorXd& v) {
  auto out = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

// Runs a JSON-structured loader and turns type errors into ParseError.
template <typename F>
auto guarded(F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw ParseError(e.what(), 0);
  } catch (const InvalidArgument& e) {
    throw ParseError(e.what(), 0);
  }
}

}  // namespace

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path.string() + "'", 0);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write '" + path.string() + "'");
  out << text;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

nlohmann::json parse_json(const std::string& text) {
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) throw ParseError("empty JSON input", 1);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what(), line_of_offset(text, e.byte == 0 ? 0 : e.byte - 1));
  }
}

// --- QUBO -----------------------------------------------------------------

QuboInstance parse_qubo(const std::string& text) {
  const auto lines = content_lines(text, "#");
  require_content(lines, "QUBO");
  const auto& head = lines.front();
  if (head.tokens.size() < 2 || head.tokens.size() > 3) throw ParseError("header must be 'n nnz [min|max]'", head.number);
  const long long n = to_int(head.tokens[0], head.number);
  const long long nnz = to_int(head.tokens[1], head.number);
  if (n < 1) throw ParseError("n must be >= 1", head.number);
  if (nnz < 0) throw ParseError("nnz must be >= 0", head.number);
  Sense sense = Sense::Minimize;
  if (head.tokens.size() == 3) {
    if (head.tokens[2] == "max") sense = Sense::Maximize;
    else if (head.tokens[2] != "min") throw ParseError("sense must be 'min' or 'max'", head.number);
  }
  if (static_cast<long long>(lines.size()) - 1 != nnz) {
    const std::size_t where = lines.size() - 1 < static_cast<std::size_t>(nnz) ? lines.back().number + 1
                                                                             : lines[static_cast<std::size_t>(nnz) + 1].number;
    throw ParseError("expected " + std::to_string(nnz) + " entries, found " + std::to_string(lines.size() - 1), where);
  }
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto& l = lines[k];
    if (l.tokens.size() != 3) throw ParseError("entry must be 'i j value'", l.number);
    long long i = to_int(l.tokens[0], l.number);
    long long j = to_int(l.tokens[1], l.number);
    const double v = to_double(l.tokens[2], l.number);
    if (i < 0 || i >= n || j < 0 || j >= n) {
      throw BoundsError("index (" + std::to_string(i) + "," + std::to_string(j) + ") outside n=" + std::to_string(n),
                        l.number);
    }
    if (i > j) std::swap(i, j);
    q(i, j) += v;
  }
  return make_qubo(q, sense);
}

std::string write_qubo(const QuboInstance& inst) {
  inst.validate();
  const Eigen::MatrixXd q = inst.sense == Sense::Maximize ? Eigen::MatrixXd(-inst.q) : inst.q;
  std::ostringstream body;
  std::size_t nnz = 0;
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    for (Eigen::Index j = i; j < q.cols(); ++j) {
      if (q(i, j) == 0.0) continue;
      body << i << ' ' << j << ' ' << format_double(q(i, j)) << '\n';
      ++nnz;
    }
  }
  std::ostringstream out;
  out << q.rows() << ' ' << nnz;
  if (inst.sense == Sense::Maximize) out << " max";
  out << '\n' << body.str();
  return out.str();
}

// --- DIMACS CNF -----------------------------------------------------------

CnfFormula parse_dimacs(const std::string& text) {
  const auto lines = content_lines(text, "c");
  require_content(lines, "DIMACS");
  const auto& head = lines.front();
  if (head.tokens.size() != 4 || head.tokens[0] != "p" || head.tokens[1] != "cnf") {
    throw ParseError("expected 'p cnf <vars> <clauses>' header", head.number);
  }
  CnfFormula f;
  const long long vars = to_int(head.tokens[2], head.number);
  const long long m = to_int(head.tokens[3], head.number);
  if (vars < 0 || m < 0) throw ParseError("negative counts in header", head.number);
  f.n_vars = static_cast<int>(vars);
  std::vector<int> clause;
  std::size_t last_line = head.number;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto& l = lines[k];
    if (l.tokens.front() == "%") break;  // SATLIB trailer
    if (l.tokens.front() == "p") throw ParseError("duplicate header", l.number);
    last_line = l.number;
    for (auto tok : l.tokens) {
      const long long lit = to_int(tok, l.number);
      if (lit == 0) {
        if (clause.empty()) throw ParseError("empty clause", l.number);
        f.clauses.push_back(std::move(clause));
        clause.clear();
        continue;
      }
      if (lit < -vars || lit > vars) {
        throw BoundsError("literal " + std::to_string(lit) + " outside 1.." + std::to_string(vars), l.number);
      }
      clause.push_back(static_cast<int>(lit));
    }
  }
  if (!clause.empty()) f.clauses.push_back(std::move(clause));
  if (static_cast<long long>(f.clauses.size()) != m) {
    throw ParseError("header declares " + std::to_string(m) + " clauses, found " + std::to_string(f.clauses.size()),
                     last_line);
  }
  return f;
}

std::string write_dimacs(const CnfFormula& f) {
  f.validate();
  std::ostringstream out;
  out << "p cnf " << f.n_vars << ' ' << f.clauses.size() << '\n';
  for (const auto& c : f.clauses) {
    for (int lit : c) out << lit << ' ';
    out << "0\n";
  }
  return out.str();
}

// --- TSP ------------------------------------------------------------------

TspInstance parse_tsp(const std::string& text) {
  const auto lines = content_lines(text, "#");
  require_content(lines, "TSP");
  const auto& head = lines.front();
  if (head.tokens.size() != 1) throw ParseError("first line must hold the city count", head.number);
  const long long n = to_int(head.tokens[0], head.number);
  if (n < 1) throw ParseError("city count must be >= 1", head.number);
  if (static_cast<long long>(lines.size()) - 1 != n) {
    throw ParseError("expected " + std::to_string(n) + " matrix rows, found " + std::to_string(lines.size() - 1),
                     lines.back().number);
  }
  TspInstance inst;
  inst.dist.resize(n, n);
  for (long long r = 0; r < n; ++r) {
    const auto& l = lines[static_cast<std::size_t>(r) + 1];
    if (static_cast<long long>(l.tokens.size()) != n) {
      throw ParseError("row must hold " + std::to_string(n) + " distances", l.number);
    }
    for (long long c = 0; c < n; ++c) {
      const double d = to_double(l.tokens[static_cast<std::size_t>(c)], l.number);
      if (d < 0.0) throw ParseError("negative distance", l.number);
      if (r == c && d != 0.0) throw ParseError("diagonal distance must be 0", l.number);
      inst.dist(r, c) = d;
    }
  }
  return inst;
}

std::string write_tsp(const TspInstance& inst) {
  inst.validate();
  std::ostringstream out;
  out << inst.n() << '\n';
  for (Eigen::Index r = 0; r < inst.n(); ++r) {
    for (Eigen::Index c = 0; c < inst.n(); ++c) out << (c ? " " : "") << format_double(inst.dist(r, c));
    out << '\n';
  }
  return out.str();
}

// --- QP -------------------------------------------------------------------

QpInstance parse_qp(const std::string& text) {
  const json doc = parse_json(text);
  return guarded([&] {
    QpInstance inst;
    inst.p = vector_from_json(doc.at("p"), "p");
    inst.q = matrix_from_json(doc.at("q"), "q", inst.p.size());
    inst.k = doc.contains("k") ? vector_from_json(doc.at("k"), "k") : Eigen::VectorXd(0);
    inst.a = doc.contains("a") ? matrix_from_json(doc.at("a"), "a", inst.p.size()) : Eigen::MatrixXd(0, inst.p.size());
    if (inst.a.rows() == 0) inst.a.resize(0, inst.p.size());
    inst.validate();
    return inst;
  });
}

std::string write_qp(const QpInstance& inst) {
  inst.validate();
  ordered_json doc;
  doc["q"] = matrix_to_json(inst.q);
  doc["p"] = vector_to_json(inst.p);
  doc["a"] = matrix_to_json(inst.a);
  doc["k"] = vector_to_json(inst.k);
  return doc.dump(2) + "\n";
}

// --- CSP ------------------------------------------------------------------

CspInstance parse_csp(const std::string& text) {
  const json doc = parse_json(text);
  return guarded([&] {
    CspInstance inst;
    for (const auto& d : doc.at("domains")) inst.domains.push_back(d.get<std::vector<int>>());
    if (doc.contains("constraints")) {
      for (const auto& c : doc.at("constraints")) {
        const auto vars = c.at("vars").get<std::vector<long long>>();
        if (vars.size() != 2) throw ParseError("constraint 'vars' must name two variables", 0);
        for (long long v : vars) {
          if (v < 0 || static_cast<std::size_t>(v) >= inst.n()) {
            throw BoundsError("constraint references variable " + std::to_string(v), 0);
          }
        }
        CspConstraint con;
        con.a = static_cast<std::size_t>(vars[0]);
        con.b = static_cast<std::size_t>(vars[1]);
        con.forbidden = c.at("forbidden").get<std::vector<std::pair<int, int>>>();
        inst.constraints.push_back(std::move(con));
      }
    }
    inst.validate();
    return inst;
  });
}

std::string write_csp(const CspInstance& inst) {
  inst.validate();
  ordered_json doc;
  doc["domains"] = inst.domains;
  auto cons = ordered_json::array();
  for (const auto& c : inst.constraints) {
    ordered_json j;
    j["vars"] = {c.a, c.b};
    auto pairs = ordered_json::array();
    for (auto [a, b] : c.forbidden) pairs.push_back({a, b});
    j["forbidden"] = std::move(pairs);
    cons.push_back(std::move(j));
  }
  doc["constraints"] = std::move(cons);
  return doc.dump() + "\n";
}

CspInstance parse_coloring(const std::string& text, int colors) {
  if (colors < 1) throw InvalidArgument("parse_coloring: need at least one color");
  const auto lines = content_lines(text, "c");
  require_content(lines, "DIMACS graph");
  const auto& head = lines.front();
  if (head.tokens.size() != 4 || head.tokens[0] != "p" || (head.tokens[1] != "edge" && head.tokens[1] != "col")) {
    throw ParseError("expected 'p edge <nodes> <edges>' header", head.number);
  }
  const long long n = to_int(head.tokens[2], head.number);
  const long long m = to_int(head.tokens[3], head.number);
  if (n < 0 || m < 0) throw ParseError("negative counts in header", head.number);
  std::vector<std::pair<int, int>> edges;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto& l = lines[k];
    if (l.tokens.size() != 3 || l.tokens[0] != "e") throw ParseError("edge line must be 'e u v'", l.number);
    const long long u = to_int(l.tokens[1], l.number);
    const long long v = to_int(l.tokens[2], l.number);
    if (u < 1 || u > n || v < 1 || v > n) throw BoundsError("edge endpoint outside 1.." + std::to_string(n), l.number);
    if (u == v) throw ParseError("self-loop cannot be colored", l.number);
    edges.emplace_back(static_cast<int>(u - 1), static_cast<int>(v - 1));
  }
  if (static_cast<long long>(edges.size()) != m) {
    throw ParseError("header declares " + std::to_string(m) + " edges, found " + std::to_string(edges.size()),
                     lines.back().number);
  }
  return coloring_csp(static_cast<int>(n), edges, colors);
}

std::string write_coloring_graph(int n, const std::vector<std::pair<int, int>>& edges) {
  std::ostringstream out;
  out << "p edge " << n << ' ' << edges.size() << '\n';
  for (auto [u, v] : edges) out << "e " << u + 1 << ' ' << v + 1 << '\n';
  return out.str();
}

// --- weighted graph -----------------------------------------------------------

WeightedGraph parse_graph(const std::string& text) {
  const auto lines = content_lines(text, "#");
  require_content(lines, "graph");
  const auto& head = lines.front();
  if (head.tokens.size() < 2 || head.tokens.size() > 3) {
    throw ParseError("header must be 'n m [directed|undirected]'", head.number);
  }
  WeightedGraph g;
  const long long n = to_int(head.tokens[0], head.number);
  const long long m = to_int(head.tokens[1], head.number);
  if (n < 1) throw ParseError("n must be >= 1", head.number);
  if (m < 0) throw ParseError("m must be >= 0", head.number);
  if (head.tokens.size() == 3) {
    if (head.tokens[2] == "undirected") g.directed = false;
    else if (head.tokens[2] != "directed") throw ParseError("expected 'directed' or 'undirected'", head.number);
  }
  if (static_cast<long long>(lines.size()) - 1 != m) {
    throw ParseError("header declares " + std::to_string(m) + " edges, found " + std::to_string(lines.size() - 1),
                     lines.back().number);
  }
  g.n = static_cast<int>(n);
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto& l = lines[k];
    if (l.tokens.size() != 3) throw ParseError("edge must be 'u v w'", l.number);
    const long long u = to_int(l.tokens[0], l.number);
    const long long v = to_int(l.tokens[1], l.number);
    const long long w = to_int(l.tokens[2], l.number);
    if (u < 0 || u >= n || v < 0 || v >= n) throw BoundsError("edge endpoint outside 0.." + std::to_string(n - 1), l.number);
    if (u == v) throw ParseError("self-loop", l.number);
    if (w < 1 || w > std::numeric_limits<int>::max()) throw ParseError("weight must be an integer >= 1", l.number);
    g.edges.push_back({static_cast<int>(u), static_cast<int>(v), static_cast<int>(w)});
  }
  return g;
}

std::string write_graph(const WeightedGraph& g) {
  g.validate();
  std::ostringstream out;
  out << g.n << ' ' << g.edges.size() << (g.directed ? " directed" : " undirected") << '\n';
  for (const auto& e : g.edges) out << e.u << ' ' << e.v << ' ' << e.weight << '\n';
  return out.str();
}

// --- grid -----------------------------------------------------------------------

GridWorld parse_grid(const std::string& text) {
  const auto lines = content_lines(text, "");
  require_content(lines, "grid");
  GridWorld w;
  w.height = static_cast<int>(lines.size());
  w.width = -1;
  bool has_start = false;
  bool has_goal = false;
  for (std::size_t r = 0; r < lines.size(); ++r) {
    const auto& l = lines[r];
    if (l.tokens.size() != 1) throw ParseError("grid rows may not contain spaces", l.number);
    const std::string_view row = l.tokens.front();
    if (w.width < 0) w.width = static_cast<int>(row.size());
    if (static_cast<int>(row.size()) != w.width) throw ParseError("grid rows must have equal width", l.number);
    for (std::size_t c = 0; c < row.size(); ++c) {
      const Cell cell{static_cast<int>(r), static_cast<int>(c)};
      switch (row[c]) {
        case '#': w.obstacles.push_back(1); break;
        case '.': w.obstacles.push_back(0); break;
        case 'S':
          if (has_start) throw ParseError("more than one 'S'", l.number);
          has_start = true;
          w.start = cell;
          w.obstacles.push_back(0);
          break;
        case 'G':
          if (has_goal) throw ParseError("more than one 'G'", l.number);
          has_goal = true;
          w.goal = cell;
          w.obstacles.push_back(0);
          break;
        default: throw ParseError(std::string("unexpected grid character '") + row[c] + "'", l.number);
      }
    }
  }
  if (!has_start || !has_goal) throw ParseError("grid needs one 'S' and one 'G'", lines.back().number);
  return w;
}

std::string write_grid(const GridWorld& world) {
  world.validate();
  std::string out;
  for (int r = 0; r < world.height; ++r) {
    for (int c = 0; c < world.width; ++c) {
      const Cell cell{r, c};
      out += cell == world.start ? 'S' : cell == world.goal ? 'G' : world.blocked(cell) ? '#' : '.';
    }
    out += '\n';
  }
  return out;
}

// --- Ising ----------------------------------------------------------------

nlohmann::ordered_json ising_to_json(const IsingInstance& ising) {
  ising.validate();
  ordered_json doc;
  doc["format"] = "spikeopt.ising";
  doc["version"] = 1;
  doc["h"] = vector_to_json(ising.h);
  doc["j"] = matrix_to_json(ising.j);
  doc["offset"] = ising.offset;
  return doc;
}

IsingInstance ising_from_json(const nlohmann::json& doc) {
  return guarded([&] {
    if (doc.value("format", std::string{}) != "spikeopt.ising") throw ParseError("not a spikeopt.ising document", 0);
    IsingInstance ising;
    ising.h = vector_from_json(doc.at("h"), "h");
    ising.j = matrix_from_json(doc.at("j"), "j", ising.h.size());
    if (ising.j.rows() == 0) ising.j.resize(0, 0);
    ising.offset = doc.value("offset", 0.0);
    ising.validate();
    return ising;
  });
}

}  // namespace spikeopt::io
