// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vigil/graph.hpp"

namespace vigil {

// A per-vertex scalar observation aligned with an InfluenceGraph's vertex
// order. Entries may be missing (no data for that unit on that day); missing
// is distinct from zero.
class GraphSignal {
 public:
  GraphSignal() = default;

  explicit GraphSignal(std::size_t vertex_count) : values_(vertex_count) {}

  static GraphSignal constant(std::size_t vertex_count, double value) {
    GraphSignal s(vertex_count);
    for (auto& v : s.values_) v = value;
    return s;
  }

  // Builds a signal for `graph` from an id-keyed map; ids absent from the map
  // stay missing, ids absent from the graph are an error.
  static GraphSignal from_values(const InfluenceGraph& graph,
                                 const std::map<VertexId, double>& values) {
    GraphSignal s(graph.vertex_count());
    for (const auto& [id, value] : values) {
      s.set(graph.require_vertex(id), value);
    }
    return s;
  }

  std::size_t size() const { return values_.size(); }

  void set(std::size_t index, double value) { values_.at(index) = value; }
  void set_missing(std::size_t index) { values_.at(index) = std::nullopt; }

  std::optional<double> operator[](std::size_t index) const { return values_.at(index); }
  bool is_missing(std::size_t index) const { return !values_.at(index).has_value(); }

  std::size_t missing_count() const {
    std::size_t n = 0;
    for (const auto& v : values_) n += v.has_value() ? 0 : 1;
    return n;
  }

  friend bool operator==(const GraphSignal&, const GraphSignal&) = default;

 private:
  std::vector<std::optional<double>> values_;
};

}  // namespace vigil
