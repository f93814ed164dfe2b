// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "vigil/csv.hpp"
#include "vigil/errors.hpp"

namespace vigil {

using VertexId = std::string;

// Tolerance for treating a row of incoming weights as summing to one.
inline constexpr double kNormalizationTolerance = 1e-12;

// A directed, weighted influence network over administrative units.
//
// Vertices are identified by stable string ids and keep their insertion
// order. Edges point from an influencing unit (source) to an influenced unit
// (target); the weight is the influence intensity. The structure is immutable
// after construction: build instances through InfluenceGraph::Builder,
// normalize(), or from_csv().
//
// Incoming edges of each vertex are stored sorted by source index, and
// duplicate (target, source) contributions are accumulated in a canonical
// order at build time, so equal edge multisets produce bit-identical weights
// regardless of insertion order.
class InfluenceGraph {
 public:
  struct InEdge {
    std::uint32_t source;
    double weight;
    friend bool operator==(const InEdge&, const InEdge&) = default;
  };

  class Builder;

  InfluenceGraph() { row_offsets_.push_back(0); }

  std::size_t vertex_count() const { return ids_.size(); }
  std::size_t edge_count() const { return in_edges_.size(); }

  const std::vector<VertexId>& vertices() const { return ids_; }
  const VertexId& vertex_id(std::size_t index) const { return ids_.at(index); }

  std::optional<std::size_t> find_vertex(const VertexId& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t require_vertex(const VertexId& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) {
      throw std::invalid_argument("unknown vertex id: '" + id + "'");
    }
    return it->second;
  }

  // Incoming edges of `target`, sorted by source index.
  std::span<const InEdge> in_edges(std::size_t target) const {
    if (target >= ids_.size()) throw std::invalid_argument("vertex index out of range");
    return {in_edges_.data() + row_offsets_[target],
            row_offsets_[target + 1] - row_offsets_[target]};
  }

  bool has_predecessors(std::size_t target) const { return !in_edges(target).empty(); }

  // Sum of incoming weights, accumulated in stored (source-sorted) order.
  double in_degree(std::size_t target) const {
    double sum = 0.0;
    for (const InEdge& e : in_edges(target)) sum += e.weight;
    return sum;
  }

  double in_degree(const VertexId& id) const { return in_degree(require_vertex(id)); }

  // True when every vertex that has predecessors was scaled so its incoming
  // weights sum to one.
  bool normalized() const { return normalized_; }

  // Returns a copy whose incoming weights are scaled per target to sum to
  // one. Vertices without predecessors are left untouched.
  InfluenceGraph normalize() const {
    InfluenceGraph out = *this;
    for (std::size_t t = 0; t < out.ids_.size(); ++t) {
      const std::size_t begin = out.row_offsets_[t];
      const std::size_t end = out.row_offsets_[t + 1];
      if (begin == end) continue;
      double sum = 0.0;
      for (std::size_t i = begin; i < end; ++i) sum += out.in_edges_[i].weight;
      for (std::size_t i = begin; i < end; ++i) out.in_edges_[i].weight /= sum;
    }
    out.normalized_ = true;
    return out;
  }

  // Serializes to the canonical edge-list CSV: header
  // "target_id,source_id,weight", rows sorted lexicographically by
  // (target_id, source_id), weights formatted as shortest round-trip
  // decimals. Vertices without any edge do not appear.
  std::string to_csv() const {
    struct Row {
      const VertexId* target;
      const VertexId* source;
      double weight;
    };
    std::vector<Row> rows;
    rows.reserve(in_edges_.size());
    for (std::size_t t = 0; t < ids_.size(); ++t) {
      for (const InEdge& e : in_edges(t)) {
        rows.push_back(Row{&ids_[t], &ids_[e.source], e.weight});
      }
    }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
      if (*a.target != *b.target) return *a.target < *b.target;
      return *a.source < *b.source;
    });
    std::string out = "target_id,source_id,weight\n";
    for (const Row& r : rows) {
      out += csv_row({*r.target, *r.source, format_double(r.weight)});
    }
    return out;
  }

  // Parses the edge-list CSV produced by to_csv(). Vertices are the ids in
  // `known_vertices` (in that order) plus any further ids encountered in the
  // file, in order of first appearance. When `known_vertices` is non-empty,
  // every edge endpoint must be one of them. The normalized flag is set by
  // inspecting row sums against kNormalizationTolerance.
  static InfluenceGraph from_csv(std::string_view text, const std::string& filename,
                                 std::span<const VertexId> known_vertices = {});

  friend bool operator==(const InfluenceGraph& a, const InfluenceGraph& b) {
    return a.ids_ == b.ids_ && a.row_offsets_ == b.row_offsets_ &&
           a.in_edges_ == b.in_edges_ && a.normalized_ == b.normalized_;
  }

 private:
  bool rows_sum_to_one() const {
    for (std::size_t t = 0; t < ids_.size(); ++t) {
      if (!has_predecessors(t)) continue;
      if (std::abs(in_degree(t) - 1.0) > kNormalizationTolerance) return false;
    }
    return true;
  }

  std::vector<VertexId> ids_;
  std::unordered_map<VertexId, std::size_t> index_;
  std::vector<std::size_t> row_offsets_;  // size vertex_count() + 1
  std::vector<InEdge> in_edges_;          // grouped by target, sorted by source
  bool normalized_ = false;
};

// Mutable staging area for assembling an InfluenceGraph.
//
// Validation happens eagerly: weights must be finite and strictly positive,
// self-influence is rejected, and edge endpoints must name known vertices.
// Contributions to the same (target, source) pair are summed; the summation
// order is canonicalized at build() time so the result does not depend on
// insertion order.
class InfluenceGraph::Builder {
 public:
  Builder() = default;

  explicit Builder(std::vector<VertexId> vertices) {
    for (VertexId& id : vertices) add_vertex(std::move(id));
  }

  std::size_t add_vertex(VertexId id) {
    if (id.empty()) throw std::invalid_argument("vertex id must be non-empty");
    auto [it, inserted] = index_.try_emplace(std::move(id), ids_.size());
    if (!inserted) {
      throw std::invalid_argument("duplicate vertex id: '" + it->first + "'");
    }
    ids_.push_back(it->first);
    return ids_.size() - 1;
  }

  std::size_t vertex(const VertexId& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) {
      throw std::invalid_argument("unknown vertex id: '" + id + "'");
    }
    return it->second;
  }

  std::size_t vertex_or_add(const VertexId& id) {
    auto it = index_.find(id);
    if (it != index_.end()) return it->second;
    return add_vertex(id);
  }

  std::size_t vertex_count() const { return ids_.size(); }

  void add_edge(std::size_t target, std::size_t source, double weight) {
    if (target >= ids_.size() || source >= ids_.size()) {
      throw std::invalid_argument("edge endpoint index out of range");
    }
    if (target == source) {
      throw std::invalid_argument("self-influence is not allowed: '" + ids_[target] + "'");
    }
    if (!std::isfinite(weight) || weight <= 0.0) {
      throw std::invalid_argument("edge weight must be finite and > 0, got " +
                                  format_double(weight) + " for '" + ids_[source] + "' -> '" +
                                  ids_[target] + "'");
    }
    edges_.push_back(Triple{static_cast<std::uint32_t>(target),
                            static_cast<std::uint32_t>(source), weight});
  }

  void add_edge(const VertexId& target, const VertexId& source, double weight) {
    // Resolve both endpoints before validating so error messages name ids.
    const std::size_t t = vertex(target);
    const std::size_t s = vertex(source);
    add_edge(t, s, weight);
  }

  InfluenceGraph build() const {
    std::vector<Triple> sorted = edges_;
    std::sort(sorted.begin(), sorted.end(), [](const Triple& a, const Triple& b) {
      if (a.target != b.target) return a.target < b.target;
      if (a.source != b.source) return a.source < b.source;
      return a.weight < b.weight;
    });

    InfluenceGraph graph;
    graph.ids_ = ids_;
    graph.index_ = index_;
    graph.row_offsets_.assign(ids_.size() + 1, 0);
    graph.in_edges_.clear();

    std::size_t i = 0;
    for (std::size_t t = 0; t < ids_.size(); ++t) {
      graph.row_offsets_[t] = graph.in_edges_.size();
      while (i < sorted.size() && sorted[i].target == t) {
        const std::uint32_t source = sorted[i].source;
        double sum = 0.0;
        while (i < sorted.size() && sorted[i].target == t && sorted[i].source == source) {
          sum += sorted[i].weight;
          ++i;
        }
        graph.in_edges_.push_back(InEdge{source, sum});
      }
    }
    graph.row_offsets_[ids_.size()] = graph.in_edges_.size();
    return graph;
  }

 private:
  struct Triple {
    std::uint32_t target;
    std::uint32_t source;
    double weight;
  };

  std::vector<VertexId> ids_;
  std::unordered_map<VertexId, std::size_t> index_;
  std::vector<Triple> edges_;
};

inline InfluenceGraph InfluenceGraph::from_csv(std::string_view text, const std::string& filename,
                                               std::span<const VertexId> known_vertices) {
  CsvReader reader(text, filename);
  reader.expect_header({"target_id", "source_id", "weight"});

  Builder builder;
  for (const VertexId& id : known_vertices) builder.add_vertex(id);
  const bool closed_vertex_set = !known_vertices.empty();

  CsvRow row;
  while (reader.next(row)) {
    if (row.fields.size() != 3) {
      reader.fail(row, "expected 3 fields, got " + std::to_string(row.fields.size()));
    }
    const std::string& target = row.fields[0];
    const std::string& source = row.fields[1];
    if (target.empty() || source.empty()) {
      reader.fail(row, "empty vertex id");
    }
    double weight = 0.0;
    if (!try_parse_double(row.fields[2], weight)) {
      reader.fail(row, "malformed weight: '" + row.fields[2] + "'");
    }
    try {
      const std::size_t target_idx =
          closed_vertex_set ? builder.vertex(target) : builder.vertex_or_add(target);
      const std::size_t source_idx =
          closed_vertex_set ? builder.vertex(source) : builder.vertex_or_add(source);
      builder.add_edge(target_idx, source_idx, weight);
    } catch (const std::invalid_argument& e) {
      reader.fail(row, e.what());
    }
  }
  InfluenceGraph graph = builder.build();
  graph.normalized_ = graph.rows_sum_to_one();
  return graph;
}

}  // namespace vigil
