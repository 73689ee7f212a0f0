#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "spikeopt/snn.hpp"

namespace spikeopt {

struct Edge {
  int u = 0;
  int v = 0;
  int weight = 1;  // ticks
  friend bool operator==(const Edge&, const Edge&) = default;
};

struct WeightedGraph {
  int n = 0;
  std::vector<Edge> edges;
  bool directed = true;

  // Positive integer weights, endpoints in range, no self-loops.
  void validate() const;
  // Sum of weights over directed arcs (undirected edges count twice).
  [[nodiscard]] std::int64_t arc_weight_sum() const;
};

/// One IF neuron per node; every arc becomes a synapse with delay equal to
/// its weight and a weight that fires the target outright. The refractory
/// period exceeds every possible arrival time, so each neuron fires at most
/// once per run.
Network build_graph_network(const WeightedGraph& g);

struct FiringTimeTable {
  std::vector<std::optional<Tick>> times;  // first spike per node
  Tick ticks_run = 0;
  std::uint64_t spikes = 0;
  std::uint64_t synaptic_events = 0;
  std::vector<std::uint32_t> spikes_per_neuron;

  [[nodiscard]] bool reachable(int v) const { return times.at(static_cast<std::size_t>(v)).has_value(); }
};

/// Forces `source` to spike at tick 0 and runs until no spike is in flight.
FiringTimeTable sssp(Network& network, int source);
FiringTimeTable sssp(const WeightedGraph& g, int source);

/// Distances by Dijkstra; nullopt for unreachable nodes.
std::vector<std::optional<std::int64_t>> dijkstra(const WeightedGraph& g, int source);

// --- grid planning --------------------------------------------------------------

struct Cell {
  int row = 0;
  int col = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

struct GridWorld {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> obstacles;  // row-major, 1 = blocked
  Cell start;
  Cell goal;

  void validate() const;
  [[nodiscard]] bool inside(Cell c) const noexcept { return c.row >= 0 && c.row < height && c.col >= 0 && c.col < width; }
  [[nodiscard]] bool blocked(Cell c) const {
    return obstacles.at(static_cast<std::size_t>(c.row) * static_cast<std::size_t>(width) + static_cast<std::size_t>(c.col)) != 0;
  }
  [[nodiscard]] int index(Cell c) const noexcept { return c.row * width + c.col; }
};

/// Free cells in row-major order joined to their 4-neighbours by unit edges;
/// node i is the i-th free cell.
struct GridGraph {
  WeightedGraph graph;
  std::vector<int> node_of;  // per cell, -1 for obstacles
  std::vector<Cell> cell_of;
};
GridGraph grid_graph(const GridWorld& world);

struct PlanResult {
  std::optional<std::vector<Cell>> path;  // start .. goal
  FiringTimeTable times;                  // wavefront from the goal, per grid-graph node
  GridGraph grid;
};

/// Wavefront from the goal, then descent of firing times from the start;
/// ties go to the first of N, E, S, W.
PlanResult plan(const GridWorld& world);
std::optional<std::vector<Cell>> plan_path(const GridWorld& world);

/// Shortest path length in moves, by BFS; nullopt when the goal is cut off.
std::optional<int> bfs_path_length(const GridWorld& world);

// --- generators ---------------------------------------------------------------

/// m arcs (edges when undirected) with distinct endpoints, weights uniform
/// in [1, max_weight]; parallel arcs are skipped.
WeightedGraph random_graph(int n, int m, int max_weight, Rng& rng, bool directed = true);
/// Each cell blocked with probability `density`; start is the top-left
/// corner, goal the bottom-right, both kept free.
GridWorld random_maze(int width, int height, double density, Rng& rng);

}  // namespace spikeopt
