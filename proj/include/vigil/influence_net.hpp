// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"
#include "vigil/csv.hpp"
#include "vigil/errors.hpp"
#include "vigil/graph.hpp"

namespace vigil {

// An administrative unit (vertex of the influence network).
struct Municipality {
  VertexId id;
  std::string name;
  std::int64_t population = 0;
};

// A group of municipalities that acts as one pole in the regional-influence
// survey; its members jointly exert and receive influence.
struct UrbanCenter {
  std::string center_id;
  std::vector<VertexId> members;
};

enum class RelationCategory {
  GoodsServices,  // flows of goods and services, surveyed per consumption area
  MetroLink,      // management/infrastructure ties between metropolitan poles
  FullLink,       // total dependence: the influenced center follows the pole entirely
};

inline std::string to_string(RelationCategory category) {
  switch (category) {
    case RelationCategory::GoodsServices:
      return "goods_services";
    case RelationCategory::MetroLink:
      return "metro_link";
    case RelationCategory::FullLink:
      return "full_link";
  }
  throw std::logic_error("unreachable");
}

inline std::optional<RelationCategory> relation_category_from_string(std::string_view text) {
  if (text == "goods_services") return RelationCategory::GoodsServices;
  if (text == "metro_link") return RelationCategory::MetroLink;
  if (text == "full_link") return RelationCategory::FullLink;
  return std::nullopt;
}

// One surveyed answer: center `to_center` named `from_center` as an influence
// pole for `dimension`, with `order` = 1 for the first-named pole, 2 for the
// second, 3 for the third. FullLink rows carry no dimension or order.
struct RelationRecord {
  std::string from_center;
  std::string to_center;
  RelationCategory category = RelationCategory::GoodsServices;
  std::string dimension;
  int order = 0;
};

// Scoring parameters for turning survey answers into influence intensities.
// A first-named pole counts in full, later mentions are discounted; each
// category has a fixed questionnaire size used as the averaging denominator,
// so centers that influence in few dimensions score proportionally low.
struct BuildConfig {
  std::array<double, 3> goods_services_discounts{1.0, 0.95, 0.90};
  std::array<double, 3> metro_discounts{1.0, 0.5, 1.0 / 3.0};
  int goods_services_dimension_count = 10;
  int metro_dimension_count = 4;

  void validate() const {
    for (const auto& discounts :
         {goods_services_discounts, metro_discounts}) {
      for (double d : discounts) {
        if (!std::isfinite(d) || d <= 0.0 || d > 1.0) {
          throw std::invalid_argument("discount factors must lie in (0, 1]");
        }
      }
      if (discounts[0] < discounts[1] || discounts[1] < discounts[2]) {
        throw std::invalid_argument("discount factors must be non-increasing in order");
      }
    }
    if (goods_services_dimension_count < 1 || metro_dimension_count < 1) {
      throw std::invalid_argument("dimension counts must be >= 1");
    }
  }
};

// Center-to-center influence intensity from all survey records for one
// ordered pair of centers. Records are discounted by mention order and
// averaged over the full questionnaire size of their category; a FullLink
// record scores 1 by definition.
inline double center_influence_score(std::span<const RelationRecord> records,
                                     const BuildConfig& config) {
  if (records.empty()) {
    throw std::invalid_argument("center_influence_score: no records");
  }
  const std::string& from = records.front().from_center;
  const std::string& to = records.front().to_center;
  const RelationCategory category = records.front().category;
  for (const RelationRecord& r : records) {
    if (r.from_center != from || r.to_center != to) {
      throw std::invalid_argument("center_influence_score: records span multiple center pairs");
    }
    if (r.category != category) {
      throw ValidationError("relations from '" + from + "' to '" + to +
                            "' mix categories; a center pair must use a single category");
    }
  }

  if (category == RelationCategory::FullLink) {
    if (records.size() != 1) {
      throw ValidationError("duplicate full_link relation from '" + from + "' to '" + to + "'");
    }
    return 1.0;
  }

  const auto& discounts = category == RelationCategory::GoodsServices
                              ? config.goods_services_discounts
                              : config.metro_discounts;
  const int dimension_count = category == RelationCategory::GoodsServices
                                  ? config.goods_services_dimension_count
                                  : config.metro_dimension_count;

  // Canonical summation order: by dimension name.
  std::vector<const RelationRecord*> sorted;
  sorted.reserve(records.size());
  for (const RelationRecord& r : records) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(), [](const RelationRecord* a, const RelationRecord* b) {
    return a->dimension < b->dimension;
  });

  double sum = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const RelationRecord& r = *sorted[i];
    if (r.dimension.empty()) {
      throw ValidationError("relation from '" + from + "' to '" + to +
                            "' has an empty dimension");
    }
    if (i > 0 && sorted[i - 1]->dimension == r.dimension) {
      throw ValidationError("duplicate dimension '" + r.dimension + "' for relations from '" +
                            from + "' to '" + to + "'");
    }
    if (r.order < 1 || r.order > 3) {
      throw ValidationError("relation from '" + from + "' to '" + to + "' dimension '" +
                            r.dimension + "' has order " + std::to_string(r.order) +
                            "; expected 1, 2 or 3");
    }
    sum += discounts[static_cast<std::size_t>(r.order - 1)];
  }
  if (sorted.size() > static_cast<std::size_t>(dimension_count)) {
    throw ValidationError("relations from '" + from + "' to '" + to + "' cover " +
                          std::to_string(sorted.size()) + " dimensions; the questionnaire has " +
                          std::to_string(dimension_count));
  }
  return sum / static_cast<double>(dimension_count);
}

// A municipality-level directed influence contribution.
struct WeightedLink {
  VertexId source;
  VertexId target;
  double weight = 0.0;
};

// Expands a center-to-center score into municipality edges: every member of
// the influenced center receives the full score, split across the members of
// the influencing center in proportion to their populations. Links that would
// connect a municipality to itself (overlapping centers) are skipped and
// counted in *dropped_self_links when provided.
inline std::vector<WeightedLink> distribute_to_municipalities(
    double score, const UrbanCenter& from, const UrbanCenter& to,
    const std::unordered_map<VertexId, Municipality>& municipalities,
    std::size_t* dropped_self_links = nullptr) {
  if (!std::isfinite(score) || score <= 0.0) {
    throw std::invalid_argument("distribute_to_municipalities: score must be finite and > 0");
  }

  std::int64_t total_population = 0;
  for (const VertexId& member : from.members) {
    auto it = municipalities.find(member);
    if (it == municipalities.end()) {
      throw ValidationError("center '" + from.center_id + "' references unknown municipality '" +
                            member + "'");
    }
    total_population += it->second.population;
  }
  if (total_population <= 0) {
    throw ValidationError("center '" + from.center_id + "' has zero total population");
  }

  std::vector<WeightedLink> links;
  links.reserve(from.members.size() * to.members.size());
  for (const VertexId& source : from.members) {
    const double share = static_cast<double>(municipalities.at(source).population) /
                         static_cast<double>(total_population);
    const double weight = score * share;
    for (const VertexId& target : to.members) {
      if (source == target) {
        if (dropped_self_links) ++*dropped_self_links;
        continue;
      }
      links.push_back(WeightedLink{source, target, weight});
    }
  }
  return links;
}

struct BuildDiagnostics {
  std::size_t vertex_count = 0;
  std::size_t edge_count = 0;
  std::vector<VertexId> isolated_vertex_ids;  // vertices with no influencers
  std::size_t dropped_self_links = 0;
  std::vector<std::string> warnings;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["vertices"] = vertex_count;
    j["edges"] = edge_count;
    j["isolated_vertices"] = isolated_vertex_ids.size();
    j["isolated_vertex_ids"] = isolated_vertex_ids;
    j["dropped_self_links"] = dropped_self_links;
    j["warnings"] = warnings;
    return j;
  }
};

struct BuildResult {
  InfluenceGraph graph;
  BuildDiagnostics diagnostics;
};

// Assembles the normalized municipality-level influence network from survey
// data. Fails on referential problems (unknown ids, mixed categories,
// duplicate dimensions, relations that collapse entirely to self-influence);
// tolerates overlapping center memberships with a warning, since the dropped
// self-links and the final normalization absorb them.
inline BuildResult build_graph(std::span<const Municipality> municipalities,
                               std::span<const UrbanCenter> centers,
                               std::span<const RelationRecord> relations,
                               const BuildConfig& config = {}) {
  config.validate();

  std::unordered_map<VertexId, Municipality> muni_by_id;
  std::vector<VertexId> vertex_order;
  vertex_order.reserve(municipalities.size());
  for (const Municipality& m : municipalities) {
    if (m.id.empty()) throw ValidationError("municipality with empty id");
    if (m.population < 1) {
      throw ValidationError("municipality '" + m.id + "' has population " +
                            std::to_string(m.population) + "; expected >= 1");
    }
    if (!muni_by_id.emplace(m.id, m).second) {
      throw ValidationError("duplicate municipality id '" + m.id + "'");
    }
    vertex_order.push_back(m.id);
  }

  BuildDiagnostics diagnostics;

  std::unordered_map<std::string, const UrbanCenter*> center_by_id;
  std::unordered_map<VertexId, std::string> first_center_of;
  for (const UrbanCenter& c : centers) {
    if (c.center_id.empty()) throw ValidationError("urban center with empty id");
    if (!center_by_id.emplace(c.center_id, &c).second) {
      throw ValidationError("duplicate center id '" + c.center_id + "'");
    }
    if (c.members.empty()) {
      throw ValidationError("center '" + c.center_id + "' has no members");
    }
    std::set<VertexId> seen;
    for (const VertexId& member : c.members) {
      if (!muni_by_id.contains(member)) {
        throw ValidationError("center '" + c.center_id + "' references unknown municipality '" +
                              member + "'");
      }
      if (!seen.insert(member).second) {
        throw ValidationError("center '" + c.center_id + "' lists municipality '" + member +
                              "' twice");
      }
      auto [it, inserted] = first_center_of.emplace(member, c.center_id);
      if (!inserted) {
        diagnostics.warnings.push_back("municipality '" + member + "' belongs to centers '" +
                                       it->second + "' and '" + c.center_id + "'");
      }
    }
  }

  // Group survey records by ordered center pair, in canonical pair order.
  std::map<std::pair<std::string, std::string>, std::vector<RelationRecord>> by_pair;
  for (const RelationRecord& r : relations) {
    if (!center_by_id.contains(r.from_center)) {
      throw ValidationError("relation references unknown center '" + r.from_center + "' (from '" +
                            r.from_center + "' to '" + r.to_center + "')");
    }
    if (!center_by_id.contains(r.to_center)) {
      throw ValidationError("relation references unknown center '" + r.to_center + "' (from '" +
                            r.from_center + "' to '" + r.to_center + "')");
    }
    if (r.from_center == r.to_center) {
      throw ValidationError("relation from center '" + r.from_center + "' to itself");
    }
    by_pair[{r.from_center, r.to_center}].push_back(r);
  }

  InfluenceGraph::Builder builder(vertex_order);
  for (const auto& [pair, records] : by_pair) {
    const double score = center_influence_score(records, config);
    const UrbanCenter& from = *center_by_id.at(pair.first);
    const UrbanCenter& to = *center_by_id.at(pair.second);
    const std::vector<WeightedLink> links = distribute_to_municipalities(
        score, from, to, muni_by_id, &diagnostics.dropped_self_links);
    if (links.empty()) {
      throw ValidationError("relation from '" + pair.first + "' to '" + pair.second +
                            "' collapses entirely to self-influence");
    }
    for (const WeightedLink& link : links) {
      builder.add_edge(link.target, link.source, link.weight);
    }
  }

  BuildResult result{builder.build().normalize(), std::move(diagnostics)};
  result.diagnostics.vertex_count = result.graph.vertex_count();
  result.diagnostics.edge_count = result.graph.edge_count();
  for (std::size_t i = 0; i < result.graph.vertex_count(); ++i) {
    if (!result.graph.has_predecessors(i)) {
      result.diagnostics.isolated_vertex_ids.push_back(result.graph.vertex_id(i));
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// CSV input/output for the survey files.
// ---------------------------------------------------------------------------

inline std::vector<Municipality> read_municipalities_csv(std::string_view text,
                                                         const std::string& filename) {
  CsvReader reader(text, filename);
  reader.expect_header({"id", "name", "population"});
  std::vector<Municipality> out;
  std::set<VertexId> seen;
  CsvRow row;
  while (reader.next(row)) {
    if (row.fields.size() != 3) {
      reader.fail(row, "expected 3 fields, got " + std::to_string(row.fields.size()));
    }
    Municipality m;
    m.id = row.fields[0];
    m.name = row.fields[1];
    if (m.id.empty()) reader.fail(row, "empty municipality id");
    if (m.name.empty()) reader.fail(row, "empty municipality name");
    if (!try_parse_int(row.fields[2], m.population) || m.population < 1) {
      reader.fail(row, "population must be an integer >= 1, got '" + row.fields[2] + "'");
    }
    if (!seen.insert(m.id).second) {
      reader.fail(row, "duplicate municipality id '" + m.id + "'");
    }
    out.push_back(std::move(m));
  }
  return out;
}

inline std::string write_municipalities_csv(std::span<const Municipality> municipalities) {
  std::string out = "id,name,population\n";
  for (const Municipality& m : municipalities) {
    out += csv_row({m.id, m.name, format_int(m.population)});
  }
  return out;
}

// Membership file: one row per (center, municipality); centers keep the order
// of their first appearance, members keep file order.
inline std::vector<UrbanCenter> read_centers_csv(std::string_view text,
                                                 const std::string& filename) {
  CsvReader reader(text, filename);
  reader.expect_header({"center_id", "municipality_id"});
  std::vector<UrbanCenter> out;
  std::unordered_map<std::string, std::size_t> index;
  std::set<std::pair<std::string, std::string>> seen;
  CsvRow row;
  while (reader.next(row)) {
    if (row.fields.size() != 2) {
      reader.fail(row, "expected 2 fields, got " + std::to_string(row.fields.size()));
    }
    const std::string& center_id = row.fields[0];
    const std::string& municipality_id = row.fields[1];
    if (center_id.empty()) reader.fail(row, "empty center id");
    if (municipality_id.empty()) reader.fail(row, "empty municipality id");
    if (!seen.emplace(center_id, municipality_id).second) {
      reader.fail(row, "center '" + center_id + "' lists municipality '" + municipality_id +
                           "' twice");
    }
    auto [it, inserted] = index.try_emplace(center_id, out.size());
    if (inserted) out.push_back(UrbanCenter{center_id, {}});
    out[it->second].members.push_back(municipality_id);
  }
  return out;
}

inline std::string write_centers_csv(std::span<const UrbanCenter> centers) {
  std::string out = "center_id,municipality_id\n";
  for (const UrbanCenter& c : centers) {
    for (const VertexId& member : c.members) {
      out += csv_row({c.center_id, member});
    }
  }
  return out;
}

inline std::vector<RelationRecord> read_relations_csv(std::string_view text,
                                                      const std::string& filename) {
  CsvReader reader(text, filename);
  reader.expect_header({"from_center", "to_center", "category", "dimension", "order"});
  std::vector<RelationRecord> out;
  CsvRow row;
  while (reader.next(row)) {
    if (row.fields.size() != 5) {
      reader.fail(row, "expected 5 fields, got " + std::to_string(row.fields.size()));
    }
    RelationRecord r;
    r.from_center = row.fields[0];
    r.to_center = row.fields[1];
    if (r.from_center.empty() || r.to_center.empty()) reader.fail(row, "empty center id");
    const auto category = relation_category_from_string(row.fields[2]);
    if (!category) {
      reader.fail(row, "unknown category '" + row.fields[2] +
                           "'; expected goods_services, metro_link or full_link");
    }
    r.category = *category;
    if (r.category == RelationCategory::FullLink) {
      // Dimension and order carry no meaning for full coverage; ignore them.
      r.dimension.clear();
      r.order = 0;
    } else {
      r.dimension = row.fields[3];
      if (r.dimension.empty()) {
        reader.fail(row, "dimension must be non-empty for category '" + row.fields[2] + "'");
      }
      std::int64_t order = 0;
      if (!try_parse_int(row.fields[4], order) || order < 1 || order > 3) {
        reader.fail(row, "order must be 1, 2 or 3, got '" + row.fields[4] + "'");
      }
      r.order = static_cast<int>(order);
    }
    out.push_back(std::move(r));
  }
  return out;
}

inline std::string write_relations_csv(std::span<const RelationRecord> relations) {
  std::string out = "from_center,to_center,category,dimension,order\n";
  for (const RelationRecord& r : relations) {
    const bool full = r.category == RelationCategory::FullLink;
    out += csv_row({r.from_center, r.to_center, to_string(r.category),
                    full ? std::string() : r.dimension,
                    full ? std::string() : std::to_string(r.order)});
  }
  return out;
}

// Scoring parameters from a JSON object; absent keys keep their defaults.
inline BuildConfig build_config_from_json(const nlohmann::json& j) {
  BuildConfig config;
  if (j.contains("goods_services_discounts")) {
    const auto& arr = j.at("goods_services_discounts");
    if (!arr.is_array() || arr.size() != 3) {
      throw ValidationError("goods_services_discounts must be an array of 3 numbers");
    }
    for (std::size_t i = 0; i < 3; ++i) config.goods_services_discounts[i] = arr[i].get<double>();
  }
  if (j.contains("metro_discounts")) {
    const auto& arr = j.at("metro_discounts");
    if (!arr.is_array() || arr.size() != 3) {
      throw ValidationError("metro_discounts must be an array of 3 numbers");
    }
    for (std::size_t i = 0; i < 3; ++i) config.metro_discounts[i] = arr[i].get<double>();
  }
  if (j.contains("goods_services_dimension_count")) {
    config.goods_services_dimension_count = j.at("goods_services_dimension_count").get<int>();
  }
  if (j.contains("metro_dimension_count")) {
    config.metro_dimension_count = j.at("metro_dimension_count").get<int>();
  }
  config.validate();
  return config;
}

}  // namespace vigil
