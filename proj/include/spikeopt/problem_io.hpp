#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "spikeopt/problems.hpp"
#include "spikeopt/wavefront.hpp"

namespace spikeopt::io {

// Whole file as a string; a missing or unreadable file is a ParseError.
std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

// Shortest decimal text that parses back to the identical double.
std::string format_double(double v);

/// QUBO text: header "n nnz [min|max]", then nnz lines "i j value",
/// 0-indexed. Entries with i > j fold onto (j, i); repeats accumulate.
/// Blank lines and lines starting with '#' are ignored.
QuboInstance parse_qubo(const std::string& text);
std::string write_qubo(const QuboInstance& inst);

/// DIMACS CNF ("c" comments, "p cnf vars clauses", 0-terminated clauses).
CnfFormula parse_dimacs(const std::string& text);
std::string write_dimacs(const CnfFormula& f);

/// "n" on the first line, then n rows of n distances.
TspInstance parse_tsp(const std::string& text);
std::string write_tsp(const TspInstance& inst);

/// JSON object with keys q (L x L), p (L), a (M x L), k (M).
QpInstance parse_qp(const std::string& text);
std::string write_qp(const QpInstance& inst);

/// JSON: {"domains": [[v, ...], ...],
///        "constraints": [{"vars": [a, b], "forbidden": [[va, vb], ...]}, ...]}
CspInstance parse_csp(const std::string& text);
std::string write_csp(const CspInstance& inst);

/// DIMACS graph ("p edge n m", "e u v", 1-indexed) turned into a k-coloring CSP.
CspInstance parse_coloring(const std::string& text, int colors);
std::string write_coloring_graph(int n, const std::vector<std::pair<int, int>>& edges);

/// Header "n m [directed|undirected]" (directed by default), then m lines
/// "u v w", 0-indexed, integer weights >= 1.
WeightedGraph parse_graph(const std::string& text);
std::string write_graph(const WeightedGraph& g);

/// ASCII rows of equal width: '#' blocked, '.' free, 'S' start, 'G' goal
/// (exactly one each).
GridWorld parse_grid(const std::string& text);
std::string write_grid(const GridWorld& world);

nlohmann::ordered_json ising_to_json(const IsingInstance& ising);
IsingInstance ising_from_json(const nlohmann::json& doc);

// JSON text parse that reports the failing line as a ParseError.
nlohmann::json parse_json(const std::string& text);

}  // namespace spikeopt::io
