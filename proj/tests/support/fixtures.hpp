// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "vigil/graph.hpp"
#include "vigil/signal.hpp"

namespace vigil::testing {

// The worked three-vertex example: B influences A fully, A and C influence B
// at 0.6/0.4, A influences C fully. Already normalized.
inline InfluenceGraph three_vertex_graph() {
  InfluenceGraph::Builder builder({"A", "B", "C"});
  builder.add_edge("A", "B", 1.0);
  builder.add_edge("B", "A", 0.6);
  builder.add_edge("B", "C", 0.4);
  builder.add_edge("C", "A", 1.0);
  return builder.build().normalize();
}

inline GraphSignal three_vertex_signal() {
  GraphSignal x(3);
  x.set(0, 2.0);  // A
  x.set(1, 1.0);  // B
  x.set(2, 3.0);  // C
  return x;
}

inline std::string vertex_name(std::size_t i) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "v%04zu", i);
  return buf;
}

// Random sparse normalized graph: each vertex draws up to `max_in_degree`
// distinct predecessors with positive weights. Some vertices may end up
// without predecessors.
inline InfluenceGraph random_graph(std::mt19937_64& rng, std::size_t vertex_count,
                                   std::size_t max_in_degree = 8) {
  std::vector<VertexId> ids;
  ids.reserve(vertex_count);
  for (std::size_t i = 0; i < vertex_count; ++i) ids.push_back(vertex_name(i));
  InfluenceGraph::Builder builder(ids);

  std::uniform_int_distribution<std::size_t> degree_dist(
      0, std::min(max_in_degree, vertex_count - 1));
  std::uniform_int_distribution<std::size_t> source_dist(0, vertex_count - 1);
  std::uniform_real_distribution<double> weight_dist(0.1, 5.0);

  std::vector<bool> used(vertex_count, false);
  for (std::size_t t = 0; t < vertex_count; ++t) {
    const std::size_t degree = degree_dist(rng);
    std::vector<std::size_t> chosen;
    while (chosen.size() < degree) {
      const std::size_t s = source_dist(rng);
      if (s == t || used[s]) continue;
      used[s] = true;
      chosen.push_back(s);
    }
    for (const std::size_t s : chosen) {
      used[s] = false;
      builder.add_edge(t, s, weight_dist(rng));
    }
  }
  return builder.build().normalize();
}

// Random complete signal with values in [lo, hi); `missing_probability`
// optionally knocks out entries.
inline GraphSignal random_signal(std::mt19937_64& rng, std::size_t vertex_count, double lo = 0.0,
                                 double hi = 20.0, double missing_probability = 0.0) {
  GraphSignal x(vertex_count);
  std::uniform_real_distribution<double> value_dist(lo, hi);
  std::uniform_real_distribution<double> miss_dist(0.0, 1.0);
  for (std::size_t i = 0; i < vertex_count; ++i) {
    if (missing_probability > 0.0 && miss_dist(rng) < missing_probability) continue;
    x.set(i, value_dist(rng));
  }
  return x;
}

// Deterministic large graph with an exact edge budget: vertex i takes
// predecessors (i+1), (i+2), ... modulo N, with the per-vertex in-degree
// spreading the remainder so the total comes out to exactly `edge_count`.
inline InfluenceGraph ring_graph(std::size_t vertex_count, std::size_t edge_count) {
  std::vector<VertexId> ids;
  ids.reserve(vertex_count);
  for (std::size_t i = 0; i < vertex_count; ++i) ids.push_back(vertex_name(i));
  InfluenceGraph::Builder builder(ids);

  const std::size_t base = edge_count / vertex_count;
  const std::size_t extra = edge_count % vertex_count;
  for (std::size_t t = 0; t < vertex_count; ++t) {
    const std::size_t degree = base + (t < extra ? 1 : 0);
    for (std::size_t j = 1; j <= degree; ++j) {
      const std::size_t s = (t + j) % vertex_count;
      builder.add_edge(t, s, 1.0 + static_cast<double>(j) * 0.125);
    }
  }
  return builder.build().normalize();
}

}  // namespace vigil::testing
