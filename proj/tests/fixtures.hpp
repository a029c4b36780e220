#pragma once

#include <random>
#include <vector>

#include "graphrob/graph.hpp"
#include "graphrob/rng.hpp"

namespace fixtures {

inline graphrob::Graph undirected(int n, std::vector<graphrob::Edge> edges) {
  return graphrob::build_graph(n, edges, false);
}

inline graphrob::Graph triangle() { return undirected(3, {{0, 1}, {1, 2}, {0, 2}}); }

// Triangles {0,1,2} and {3,4,5} joined by the bridge 2-3.
inline graphrob::Graph barbell6(bool bridge = true) {
  std::vector<graphrob::Edge> e{{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}};
  if (bridge) e.push_back({2, 3});
  return undirected(6, e);
}

inline graphrob::Graph two_triangles() { return barbell6(false); }

// G(n, p) with optional uniform weights in [0.5, 1.5]; may have isolated nodes.
inline graphrob::Graph erdos_renyi(int n, double p, std::uint64_t seed, bool weighted = false) {
  graphrob::Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<graphrob::Edge> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (u(rng) < p) edges.push_back({i, j, weighted ? 0.5 + u(rng) : 1.0});
    }
  }
  return undirected(n, edges);
}

// Resamples until no node is isolated.
inline graphrob::Graph connected_enough(int n, double p, std::uint64_t seed, bool weighted = false) {
  for (std::uint64_t s = seed;; s += 0x9E37) {
    graphrob::Graph g = erdos_renyi(n, p, s, weighted);
    bool ok = true;
    for (double d : g.degrees()) ok = ok && d > 0.0;
    if (ok) return g;
  }
}

}  // namespace fixtures
