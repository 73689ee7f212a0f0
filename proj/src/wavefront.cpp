#include "spikeopt/wavefront.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <map>
#include <queue>
#include <set>

namespace spikeopt {

void WeightedGraph::validate() const {
  if (n < 0) throw InvalidArgument("WeightedGraph: n must be >= 0");
  for (const auto& e : edges) {
    if (e.u < 0 || e.u >= n || e.v < 0 || e.v >= n) throw InvalidArgument("WeightedGraph: edge endpoint out of range");
    if (e.u == e.v) throw InvalidArgument("WeightedGraph: self-loops are not allowed");
    if (e.weight < 1) throw InvalidArgument("WeightedGraph: weights must be integers >= 1");
  }
}

std::int64_t WeightedGraph::arc_weight_sum() const {
  std::int64_t s = 0;
  for (const auto& e : edges) s += e.weight;
  return directed ? s : 2 * s;
}

namespace {

// Arcs keyed by (pre, post); parallel arcs keep the lightest weight.
std::map<std::pair<int, int>, int> arcs(const WeightedGraph& g) {
  std::map<std::pair<int, int>, int> out;
  auto add = [&out](int a, int b, int w) {
    auto [it, fresh] = out.emplace(std::make_pair(a, b), w);
    if (!fresh) it->second = std::min(it->second, w);
  };
  for (const auto& e : g.edges) {
    add(e.u, e.v, e.weight);
    if (!g.directed) add(e.v, e.u, e.weight);
  }
  return out;
}

}  // namespace

Network build_graph_network(const WeightedGraph& g) {
  g.validate();
  const std::int64_t horizon = g.arc_weight_sum() + 1;
  if (horizon > std::numeric_limits<int>::max()) throw SizeCapError("build_graph_network: total weight too large");
  Network net;
  NeuronParams p;
  p.kind = NeuronKind::IntegrateFire;
  p.threshold = 1.0;
  p.reset = 0.0;
  p.refractory = static_cast<int>(horizon);
  for (int v = 0; v < g.n; ++v) net.add_neuron(p);
  for (const auto& [key, w] : arcs(g)) {
    net.add_synapse({static_cast<NeuronId>(key.first), static_cast<NeuronId>(key.second), 1.0, w});
  }
  return net;
}

FiringTimeTable sssp(Network& network, int source) {
  if (source < 0 || static_cast<std::size_t>(source) >= network.size()) throw InvalidArgument("sssp: source out of range");
  FiringTimeTable table;
  table.times.assign(network.size(), std::nullopt);
  table.spikes_per_neuron.assign(network.size(), 0);
  const Tick start = network.tick();
  const std::uint64_t spikes0 = network.spike_count();
  const std::uint64_t events0 = network.synaptic_events();
  const NeuronId forced[] = {static_cast<NeuronId>(source)};
  bool first = true;
  do {
    const Tick t = network.tick();
    const auto& spikes = first ? network.step(forced) : network.step();
    first = false;
    for (NeuronId id : spikes) {
      if (!table.times[id]) table.times[id] = t - start;
      ++table.spikes_per_neuron[id];
    }
  } while (!network.quiescent());
  table.ticks_run = network.tick() - start;
  table.spikes = network.spike_count() - spikes0;
  table.synaptic_events = network.synaptic_events() - events0;
  return table;
}

FiringTimeTable sssp(const WeightedGraph& g, int source) {
  if (source < 0 || source >= g.n) throw InvalidArgument("sssp: source out of range");
  Network net = build_graph_network(g);
  return sssp(net, source);
}

std::vector<std::optional<std::int64_t>> dijkstra(const WeightedGraph& g, int source) {
  g.validate();
  if (source < 0 || source >= g.n) throw InvalidArgument("dijkstra: source out of range");
  std::vector<std::vector<std::pair<int, int>>> adj(static_cast<std::size_t>(g.n));
  for (const auto& e : g.edges) {
    adj[static_cast<std::size_t>(e.u)].emplace_back(e.v, e.weight);
    if (!g.directed) adj[static_cast<std::size_t>(e.v)].emplace_back(e.u, e.weight);
  }
  std::vector<std::optional<std::int64_t>> dist(static_cast<std::size_t>(g.n));
  using Item = std::pair<std::int64_t, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[static_cast<std::size_t>(source)] = 0;
  heap.emplace(0, source);
  while (!heap.empty()) {
    const auto [d, u] = heap.top();
    heap.pop();
    if (d != *dist[static_cast<std::size_t>(u)]) continue;
    for (const auto& [v, w] : adj[static_cast<std::size_t>(u)]) {
      auto& dv = dist[static_cast<std::size_t>(v)];
      if (!dv || d + w < *dv) {
        dv = d + w;
        heap.emplace(*dv, v);
      }
    }
  }
  return dist;
}

// --- grid -----------------------------------------------------------------------

void GridWorld::validate() const {
  if (width < 1 || height < 1) throw InvalidArgument("GridWorld: width and height must be >= 1");
  if (obstacles.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw InvalidArgument("GridWorld: obstacle map size mismatch");
  }
  if (!inside(start) || !inside(goal)) throw InvalidArgument("GridWorld: start or goal outside the grid");
  if (blocked(start) || blocked(goal)) throw InvalidArgument("GridWorld: start and goal must be free");
}

namespace {
constexpr int kDr[4] = {-1, 0, 1, 0};  // N, E, S, W
constexpr int kDc[4] = {0, 1, 0, -1};
}  // namespace

GridGraph grid_graph(const GridWorld& world) {
  world.validate();
  GridGraph gg;
  gg.node_of.assign(world.obstacles.size(), -1);
  for (int r = 0; r < world.height; ++r) {
    for (int c = 0; c < world.width; ++c) {
      if (world.blocked({r, c})) continue;
      gg.node_of[static_cast<std::size_t>(world.index({r, c}))] = static_cast<int>(gg.cell_of.size());
      gg.cell_of.push_back({r, c});
    }
  }
  gg.graph.n = static_cast<int>(gg.cell_of.size());
  gg.graph.directed = false;
  for (const Cell& cell : gg.cell_of) {
    const int u = gg.node_of[static_cast<std::size_t>(world.index(cell))];
    // East and south only, so each undirected edge appears once.
    for (int d : {1, 2}) {
      const Cell next{cell.row + kDr[d], cell.col + kDc[d]};
      if (!world.inside(next) || world.blocked(next)) continue;
      gg.graph.edges.push_back({u, gg.node_of[static_cast<std::size_t>(world.index(next))], 1});
    }
  }
  return gg;
}

PlanResult plan(const GridWorld& world) {
  PlanResult out;
  out.grid = grid_graph(world);
  const int goal = out.grid.node_of[static_cast<std::size_t>(world.index(world.goal))];
  out.times = sssp(out.grid.graph, goal);
  const int start = out.grid.node_of[static_cast<std::size_t>(world.index(world.start))];
  if (!out.times.reachable(start)) return out;
  std::vector<Cell> path{world.start};
  Cell at = world.start;
  Tick t = *out.times.times[static_cast<std::size_t>(start)];
  while (t > 0) {
    std::optional<Cell> best;
    Tick best_t = t;
    for (int d = 0; d < 4; ++d) {
      const Cell next{at.row + kDr[d], at.col + kDc[d]};
      if (!world.inside(next) || world.blocked(next)) continue;
      const auto& nt = out.times.times[static_cast<std::size_t>(out.grid.node_of[static_cast<std::size_t>(world.index(next))])];
      if (nt && *nt < best_t) {
        best_t = *nt;
        best = next;
      }
    }
    if (!best) throw InvalidArgument("plan: firing times admit no descent");  // cannot happen on a valid wavefront
    at = *best;
    t = best_t;
    path.push_back(at);
  }
  out.path = std::move(path);
  return out;
}

std::optional<std::vector<Cell>> plan_path(const GridWorld& world) { return plan(world).path; }

std::optional<int> bfs_path_length(const GridWorld& world) {
  world.validate();
  std::vector<int> dist(world.obstacles.size(), -1);
  std::queue<Cell> q;
  dist[static_cast<std::size_t>(world.index(world.start))] = 0;
  q.push(world.start);
  while (!q.empty()) {
    const Cell c = q.front();
    q.pop();
    if (c == world.goal) return dist[static_cast<std::size_t>(world.index(c))];
    for (int d = 0; d < 4; ++d) {
      const Cell next{c.row + kDr[d], c.col + kDc[d]};
      if (!world.inside(next) || world.blocked(next)) continue;
      int& dn = dist[static_cast<std::size_t>(world.index(next))];
      if (dn >= 0) continue;
      dn = dist[static_cast<std::size_t>(world.index(c))] + 1;
      q.push(next);
    }
  }
  return std::nullopt;
}

// --- generators -------------------------------------------------------------------

WeightedGraph random_graph(int n, int m, int max_weight, Rng& rng, bool directed) {
  if (n < 1 || m < 0 || max_weight < 1) throw InvalidArgument("random_graph: bad parameters");
  WeightedGraph g;
  g.n = n;
  g.directed = directed;
  if (n < 2) return g;
  std::set<std::pair<int, int>> seen;
  const std::int64_t capacity = static_cast<std::int64_t>(n) * (n - 1) / (directed ? 1 : 2);
  const std::int64_t target = std::min<std::int64_t>(m, capacity);
  while (static_cast<std::int64_t>(g.edges.size()) < target) {
    int u = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
    int v = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
    const int w = static_cast<int>(rng.uniform_int(1, max_weight));
    if (u == v) continue;
    const auto key = directed ? std::make_pair(u, v) : std::make_pair(std::min(u, v), std::max(u, v));
    if (!seen.insert(key).second) continue;
    g.edges.push_back({u, v, w});
  }
  return g;
}

GridWorld random_maze(int width, int height, double density, Rng& rng) {
  if (width < 1 || height < 1) throw InvalidArgument("random_maze: width and height must be >= 1");
  if (!(density >= 0.0 && density <= 1.0)) throw InvalidArgument("random_maze: density must lie in [0,1]");
  GridWorld w;
  w.width = width;
  w.height = height;
  w.obstacles.resize(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
  for (auto& cell : w.obstacles) cell = rng.bernoulli(density) ? 1 : 0;
  w.start = {0, 0};
  w.goal = {height - 1, width - 1};
  w.obstacles[static_cast<std::size_t>(w.index(w.start))] = 0;
  w.obstacles[static_cast<std::size_t>(w.index(w.goal))] = 0;
  return w;
}

}  // namespace spikeopt
