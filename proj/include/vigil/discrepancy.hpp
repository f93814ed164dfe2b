// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "vigil/csv.hpp"
#include "vigil/graph.hpp"
#include "vigil/signal.hpp"

namespace vigil {

// Ratio between an observed value and the value expected from a unit's
// influencers. 1 means "in line with the neighborhood"; above 1 means the
// unit over-shoots its expectation.
struct DiscrepancyValue {
  enum class Kind {
    Finite,     // expected > 0: plain ratio observed / expected
    Infinite,   // observed > 0 but expected == 0
    Undefined,  // observed or expected is missing
  };

  Kind kind = Kind::Undefined;
  // Finite -> the ratio; Infinite -> +infinity; Undefined -> quiet NaN.
  double value = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> observed;
  std::optional<double> expected;

  static DiscrepancyValue finite(double ratio, double observed, double expected) {
    return {Kind::Finite, ratio, observed, expected};
  }
  static DiscrepancyValue infinite(double observed) {
    return {Kind::Infinite, std::numeric_limits<double>::infinity(), observed, 0.0};
  }
  static DiscrepancyValue undefined(std::optional<double> observed,
                                    std::optional<double> expected) {
    return {Kind::Undefined, std::numeric_limits<double>::quiet_NaN(), observed, expected};
  }

  bool is_finite() const { return kind == Kind::Finite; }
  bool is_infinite() const { return kind == Kind::Infinite; }
  bool is_undefined() const { return kind == Kind::Undefined; }

  // Severity key for worst-first orderings: infinite sorts above every
  // finite value. Do not call on undefined values.
  double sort_key() const {
    if (kind == Kind::Undefined) {
      throw std::logic_error("undefined discrepancy has no ordering");
    }
    return value;
  }

  std::string to_string() const {
    switch (kind) {
      case Kind::Finite:
        return format_double(value);
      case Kind::Infinite:
        return "INF";
      case Kind::Undefined:
        return "UNDEFINED";
    }
    throw std::logic_error("unreachable");
  }
};

namespace detail {

inline void require_normalized(const InfluenceGraph& graph, const char* op) {
  if (!graph.normalized()) {
    throw std::logic_error(std::string(op) + " requires a normalized graph");
  }
}

inline void validate_observation_signal(const InfluenceGraph& graph, const GraphSignal& x,
                                        const char* op) {
  if (x.size() != graph.vertex_count()) {
    throw std::invalid_argument(std::string(op) + ": signal has " + std::to_string(x.size()) +
                                " entries, graph has " + std::to_string(graph.vertex_count()) +
                                " vertices");
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto v = x[i];
    if (v && (!std::isfinite(*v) || *v < 0.0)) {
      throw std::invalid_argument(std::string(op) + ": signal value for vertex '" +
                                  graph.vertex_id(i) + "' must be finite and >= 0, got " +
                                  format_double(*v));
    }
  }
}

}  // namespace detail

// Expected value of each vertex from its influencers: the weighted average of
// the predecessors' observed values.
//
// Missing data: a vertex with no predecessors has a missing expectation.
// Predecessors with missing observations are dropped, and the expectation is
// the weighted sum over the defined predecessors divided by their total
// weight; if every predecessor is missing, the expectation is missing. When
// all predecessors are defined the plain weighted sum is used (the graph is
// normalized, so the denominator is already one).
inline GraphSignal predict(const InfluenceGraph& graph, const GraphSignal& x) {
  detail::require_normalized(graph, "predict");
  detail::validate_observation_signal(graph, x, "predict");

  GraphSignal y(graph.vertex_count());
  for (std::size_t t = 0; t < graph.vertex_count(); ++t) {
    const auto edges = graph.in_edges(t);
    if (edges.empty()) continue;  // no influencers: expectation stays missing
    double weighted_sum = 0.0;
    double defined_weight = 0.0;
    bool any_missing = false;
    bool any_defined = false;
    for (const auto& e : edges) {
      const auto xv = x[e.source];
      if (!xv) {
        any_missing = true;
        continue;
      }
      any_defined = true;
      weighted_sum += e.weight * (*xv);
      defined_weight += e.weight;
    }
    if (!any_defined) continue;  // all influencers missing
    y.set(t, any_missing ? weighted_sum / defined_weight : weighted_sum);
  }
  return y;
}

// Graph-Laplacian response: observed minus expected, per vertex. Missing
// wherever the observation or the expectation is missing.
inline GraphSignal laplacian_transform(const InfluenceGraph& graph, const GraphSignal& x) {
  detail::require_normalized(graph, "laplacian_transform");
  detail::validate_observation_signal(graph, x, "laplacian_transform");

  const GraphSignal y = predict(graph, x);
  GraphSignal z(graph.vertex_count());
  for (std::size_t i = 0; i < z.size(); ++i) {
    const auto xv = x[i];
    const auto yv = y[i];
    if (xv && yv) z.set(i, *xv - *yv);
  }
  return z;
}

namespace detail {

inline DiscrepancyValue ratio_value(std::optional<double> observed,
                                    std::optional<double> expected) {
  if (!observed || !expected) return DiscrepancyValue::undefined(observed, expected);
  if (*expected > 0.0) return DiscrepancyValue::finite(*observed / *expected, *observed, *expected);
  if (*observed == 0.0) return DiscrepancyValue::finite(1.0, 0.0, 0.0);
  return DiscrepancyValue::infinite(*observed);
}

}  // namespace detail

// Per-vertex discrepancy: observed over expected, with the conventions that
// 0/0 is 1 (a silent unit in a silent neighborhood is unremarkable) and
// positive/0 is infinite (activity where none was expected).
inline std::vector<DiscrepancyValue> discrepancy(const InfluenceGraph& graph,
                                                 const GraphSignal& x) {
  detail::require_normalized(graph, "discrepancy");
  detail::validate_observation_signal(graph, x, "discrepancy");

  const GraphSignal y = predict(graph, x);
  std::vector<DiscrepancyValue> d;
  d.reserve(graph.vertex_count());
  for (std::size_t i = 0; i < graph.vertex_count(); ++i) {
    d.push_back(detail::ratio_value(x[i], y[i]));
  }
  return d;
}

// Discrepancy of a set of vertices treated as one aggregate unit: the ratio
// of summed observations to summed expectations (a ratio of sums, not an
// average of ratios). Undefined if any member's observation or expectation is
// missing. `group` must be non-empty and duplicate-free.
inline DiscrepancyValue group_discrepancy(const InfluenceGraph& graph, const GraphSignal& x,
                                          std::span<const std::size_t> group) {
  detail::require_normalized(graph, "group_discrepancy");
  detail::validate_observation_signal(graph, x, "group_discrepancy");
  if (group.empty()) {
    throw std::invalid_argument("group_discrepancy: group must be non-empty");
  }

  std::vector<std::size_t> members(group.begin(), group.end());
  std::sort(members.begin(), members.end());
  if (std::adjacent_find(members.begin(), members.end()) != members.end()) {
    throw std::invalid_argument("group_discrepancy: group contains a duplicate vertex");
  }
  if (members.back() >= graph.vertex_count()) {
    throw std::invalid_argument("group_discrepancy: vertex index out of range");
  }

  const GraphSignal y = predict(graph, x);
  double sum_observed = 0.0;
  double sum_expected = 0.0;
  for (const std::size_t i : members) {
    const auto xv = x[i];
    const auto yv = y[i];
    if (!xv || !yv) return DiscrepancyValue::undefined(std::nullopt, std::nullopt);
    sum_observed += *xv;
    sum_expected += *yv;
  }
  return detail::ratio_value(sum_observed, sum_expected);
}

inline DiscrepancyValue group_discrepancy(const InfluenceGraph& graph, const GraphSignal& x,
                                          std::span<const VertexId> group_ids) {
  std::vector<std::size_t> indices;
  indices.reserve(group_ids.size());
  for (const VertexId& id : group_ids) indices.push_back(graph.require_vertex(id));
  return group_discrepancy(graph, x, indices);
}

// Largest deviation, over vertices where both sides are defined and the
// expectation is positive, between the direct ratio and the equivalent form
// (observed - expected) / expected + 1. Useful as an internal consistency
// probe; exactly 0.5 ulp-ish in practice.
inline double discrepancy_identity_residual(const InfluenceGraph& graph, const GraphSignal& x) {
  detail::require_normalized(graph, "discrepancy_identity_residual");
  detail::validate_observation_signal(graph, x, "discrepancy_identity_residual");

  const GraphSignal y = predict(graph, x);
  const GraphSignal z = laplacian_transform(graph, x);
  const std::vector<DiscrepancyValue> d = discrepancy(graph, x);

  double worst = 0.0;
  for (std::size_t i = 0; i < graph.vertex_count(); ++i) {
    const auto yv = y[i];
    const auto zv = z[i];
    if (!yv || !zv || *yv <= 0.0) continue;
    const double via_identity = *zv / *yv + 1.0;
    worst = std::max(worst, std::abs(d[i].value - via_identity));
  }
  return worst;
}

}  // namespace vigil
