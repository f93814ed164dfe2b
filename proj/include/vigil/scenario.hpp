// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "vigil/complaint_pipeline.hpp"
#include "vigil/dates.hpp"
#include "vigil/errors.hpp"
#include "vigil/influence_net.hpp"
#include "vigil/io.hpp"

namespace vigil {

// Synthetic two-region world ("norte" and "sul") for exercising the whole
// pipeline end to end with known ground truth.
//
// Design notes on the baseline data:
//  - Every norte municipality has identical baseline rates per operator, so
//    norte discrepancies sit at 1 and a region-wide shift keeps them there.
//  - Sul baseline rates are deliberately diverse, producing stable structural
//    discrepancies up to 1.1875 — inside the CUSUM dead zone at the default
//    allowance, so an unperturbed world never alarms.
//  - Consumer counts divide the daily complaint tallies so that every
//    baseline rate is numerically exact.

enum class ScenarioKind {
  Flat,             // baseline only
  LocalAnomaly,     // one (municipality, operator) multiplies its complaints
  RegionalAnomaly,  // a whole region multiplies its complaints, all operators
  StepChange,       // one key steps its complaints up by a relative delta
};

inline std::string to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::Flat:
      return "flat";
    case ScenarioKind::LocalAnomaly:
      return "local_anomaly";
    case ScenarioKind::RegionalAnomaly:
      return "regional_anomaly";
    case ScenarioKind::StepChange:
      return "step_change";
  }
  throw std::logic_error("unreachable");
}

inline std::optional<ScenarioKind> scenario_kind_from_string(std::string_view text) {
  if (text == "flat") return ScenarioKind::Flat;
  if (text == "local_anomaly") return ScenarioKind::LocalAnomaly;
  if (text == "regional_anomaly") return ScenarioKind::RegionalAnomaly;
  if (text == "step_change") return ScenarioKind::StepChange;
  return std::nullopt;
}

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::Flat;
  Date start{2024, 1, 1};
  int days = 182;  // through 2024-06-30
  Date onset{2024, 3, 20};
  // Complaint multiplier for the anomaly kinds; for StepChange it is the
  // relative increase (counts scale by 1 + magnitude). Defaults per kind.
  std::optional<double> magnitude;
  VertexId target_municipality = "n04";
  std::string target_operator = "alfa";
  std::string region = "norte";
  int noise = 0;  // uniform integer jitter on daily counts, in [-noise, +noise]
  std::uint64_t seed = 1;

  Date end() const { return start + (days - 1); }
};

struct ScenarioWorld {
  std::vector<Municipality> municipalities;
  std::vector<UrbanCenter> centers;
  std::vector<RelationRecord> relations;
  std::vector<ConsumerCount> consumers;
  std::vector<ComplaintRecord> complaints;
  std::vector<std::pair<VertexId, std::string>> affected;  // (municipality, operator)
  nlohmann::json metadata;
};

namespace scenario_detail {

inline constexpr std::string_view kGoodsAreas[10] = {
    "clothing and footwear",
    "furniture and electronics",
    "low- and medium-complexity healthcare",
    "high-complexity healthcare",
    "higher education",
    "cultural activities",
    "sports activities",
    "airport",
    "newspapers",
    "public transportation",
};

inline constexpr std::string_view kMetroThemes[4] = {
    "public management",
    "business management",
    "road and waterway links",
    "airway links",
};

struct BaselineRow {
  std::string_view id;
  std::string_view name;
  std::string_view region;
  std::int64_t population;
  std::int64_t alfa_consumers;
  std::int64_t alfa_daily;
  std::int64_t beta_consumers;
  std::int64_t beta_daily;
};

// Baseline daily rates (complaints per 100k): norte is uniform (alfa 2.0,
// beta 5.0); sul alfa sits around 15-20.5 and sul beta around 6-8.
inline constexpr BaselineRow kBaseline[18] = {
    {"n01", "Porto Norte", "norte", 1100000, 500000, 10, 400000, 20},
    {"n02", "Vila Norte", "norte", 320000, 150000, 3, 100000, 5},
    {"n03", "Carua", "norte", 620000, 300000, 6, 200000, 10},
    {"n04", "Santa Rita do Norte", "norte", 260000, 100000, 2, 100000, 5},
    {"n05", "Boa Vista do Norte", "norte", 240000, 100000, 2, 200000, 10},
    {"n06", "Alto Norte", "norte", 130000, 100000, 2, 100000, 5},
    {"n07", "Pedra Branca", "norte", 90000, 50000, 1, 40000, 2},
    {"n08", "Sao Joao do Norte", "norte", 210000, 100000, 2, 100000, 5},
    {"s01", "Porto Sul", "sul", 1400000, 700000, 112, 500000, 32},
    {"s02", "Campo Sul", "sul", 700000, 400000, 76, 250000, 19},
    {"s03", "Nova Esperanca", "sul", 380000, 200000, 30, 200000, 12},
    {"s04", "Laguna do Sul", "sul", 230000, 200000, 36, 125000, 9},
    {"s05", "Serra Alta", "sul", 160000, 100000, 16, 125000, 8},
    {"s06", "Ribeirao Sul", "sul", 110000, 100000, 15, 50000, 3},
    {"s07", "Monte Claro", "sul", 540000, 400000, 68, 250000, 17},
    {"s08", "Agua Verde", "sul", 270000, 200000, 34, 250000, 17},
    {"s09", "Costa do Sul", "sul", 300000, 200000, 37, 200000, 15},
    {"s10", "Butia", "sul", 250000, 200000, 41, 200000, 16},
};

struct RelationRow {
  std::string_view from;
  std::string_view to;
  RelationCategory category;
  int order;                     // unused for FullLink
  std::initializer_list<int> dimensions;  // goods-area or metro-theme indices
};

// Survey answers. The two metropolitan poles dominate their regions; the one
// cross-region tie is a weak metropolitan airway link from norte to sul.
inline constexpr RelationRow kRelations[] = {
    {"norte-metro", "c-n03", RelationCategory::GoodsServices, 1, {0, 1, 2, 3, 4, 5, 6, 7}},
    {"c-n03", "norte-metro", RelationCategory::GoodsServices, 3, {3, 7}},
    {"norte-metro", "c-n04", RelationCategory::GoodsServices, 1, {0, 1, 2, 4, 5, 9}},
    {"norte-metro", "c-n05", RelationCategory::GoodsServices, 2, {0, 1, 2, 6, 8}},
    {"c-n03", "c-n06", RelationCategory::GoodsServices, 1, {0, 1, 8}},
    {"norte-metro", "c-n06", RelationCategory::GoodsServices, 2, {4, 7}},
    {"c-n03", "c-n07", RelationCategory::GoodsServices, 1, {0, 2}},
    {"c-n04", "c-n07", RelationCategory::GoodsServices, 1, {1}},
    {"norte-metro", "c-n08", RelationCategory::FullLink, 0, {}},
    {"sul-metro", "c-s02", RelationCategory::GoodsServices, 1, {0, 1, 2, 3, 4, 5, 6, 7, 8, 9}},
    {"c-s02", "sul-metro", RelationCategory::GoodsServices, 3, {3, 7}},
    {"sul-metro", "c-s03", RelationCategory::GoodsServices, 1, {0, 1, 2, 3, 4}},
    {"sul-metro", "c-s04", RelationCategory::GoodsServices, 2, {0, 1, 2, 5}},
    {"sul-metro", "c-s07", RelationCategory::GoodsServices, 1, {0, 1, 2, 4, 5, 6}},
    {"c-s02", "c-s05", RelationCategory::GoodsServices, 2, {0, 1, 8}},
    {"sul-metro", "c-s05", RelationCategory::GoodsServices, 1, {2, 3}},
    {"c-s07", "c-s06", RelationCategory::GoodsServices, 1, {0, 1, 2, 8}},
    {"sul-metro", "c-s09", RelationCategory::GoodsServices, 1, {0, 1, 3}},
    {"c-s02", "c-s10", RelationCategory::GoodsServices, 2, {0, 2}},
    {"sul-metro", "c-s08", RelationCategory::FullLink, 0, {}},
    {"norte-metro", "sul-metro", RelationCategory::MetroLink, 3, {3}},
};

inline const BaselineRow* find_baseline(std::string_view id) {
  for (const BaselineRow& row : kBaseline) {
    if (row.id == id) return &row;
  }
  return nullptr;
}

}  // namespace scenario_detail

inline std::vector<std::string> scenario_operators() { return {"alfa", "beta"}; }

inline std::vector<Municipality> scenario_municipalities() {
  std::vector<Municipality> out;
  for (const auto& row : scenario_detail::kBaseline) {
    out.push_back(Municipality{std::string(row.id), std::string(row.name), row.population});
  }
  return out;
}

inline std::vector<UrbanCenter> scenario_centers() {
  std::vector<UrbanCenter> out;
  out.push_back(UrbanCenter{"norte-metro", {"n01", "n02"}});
  out.push_back(UrbanCenter{"sul-metro", {"s01"}});
  for (const auto& row : scenario_detail::kBaseline) {
    if (row.id == "n01" || row.id == "n02" || row.id == "s01") continue;
    out.push_back(UrbanCenter{"c-" + std::string(row.id), {std::string(row.id)}});
  }
  return out;
}

inline std::vector<RelationRecord> scenario_relations() {
  using namespace scenario_detail;
  std::vector<RelationRecord> out;
  for (const RelationRow& row : kRelations) {
    if (row.category == RelationCategory::FullLink) {
      out.push_back(RelationRecord{std::string(row.from), std::string(row.to), row.category,
                                   std::string(), 0});
      continue;
    }
    for (const int dim : row.dimensions) {
      const std::string_view name = row.category == RelationCategory::MetroLink
                                        ? kMetroThemes[dim]
                                        : kGoodsAreas[dim];
      out.push_back(RelationRecord{std::string(row.from), std::string(row.to), row.category,
                                   std::string(name), row.order});
    }
  }
  return out;
}

// Builds the synthetic world for `config`. Anomalies multiply daily complaint
// counts from the onset day (inclusive) onward; the multiplier must keep
// counts integral. With noise = 0 the output is a pure function of the
// configuration; with noise > 0 a seeded generator adds integer jitter.
inline ScenarioWorld generate_scenario(const ScenarioConfig& config) {
  using namespace scenario_detail;

  if (config.days < 1) throw std::invalid_argument("scenario: days must be >= 1");
  if (config.noise < 0) throw std::invalid_argument("scenario: noise must be >= 0");

  double multiplier = 1.0;
  std::string kind_name = to_string(config.kind);
  if (config.kind != ScenarioKind::Flat) {
    if (config.onset < config.start || config.onset > config.end()) {
      throw std::invalid_argument("scenario: onset " + config.onset.to_string() +
                                  " lies outside the simulated window " +
                                  config.start.to_string() + ".." + config.end().to_string());
    }
    const double magnitude = config.magnitude.value_or(
        config.kind == ScenarioKind::LocalAnomaly      ? 3.0
        : config.kind == ScenarioKind::RegionalAnomaly ? 15.0
                                                       : 1.0);
    if (!std::isfinite(magnitude) || magnitude <= 0.0) {
      throw std::invalid_argument("scenario: magnitude must be finite and > 0");
    }
    multiplier = config.kind == ScenarioKind::StepChange ? 1.0 + magnitude : magnitude;
  }

  std::set<std::pair<VertexId, std::string>> affected;
  if (config.kind == ScenarioKind::LocalAnomaly || config.kind == ScenarioKind::StepChange) {
    if (!find_baseline(config.target_municipality)) {
      throw std::invalid_argument("scenario: unknown municipality '" +
                                  config.target_municipality + "'");
    }
    if (config.target_operator != "alfa" && config.target_operator != "beta") {
      throw std::invalid_argument("scenario: unknown operator '" + config.target_operator +
                                  "'; the world has 'alfa' and 'beta'");
    }
    affected.emplace(config.target_municipality, config.target_operator);
  } else if (config.kind == ScenarioKind::RegionalAnomaly) {
    if (config.region != "norte" && config.region != "sul") {
      throw std::invalid_argument("scenario: unknown region '" + config.region +
                                  "'; the world has 'norte' and 'sul'");
    }
    for (const BaselineRow& row : kBaseline) {
      if (row.region != config.region) continue;
      affected.emplace(std::string(row.id), "alfa");
      affected.emplace(std::string(row.id), "beta");
    }
  }

  ScenarioWorld world;
  world.municipalities = scenario_municipalities();
  world.centers = scenario_centers();
  world.relations = scenario_relations();

  const Date end = config.end();

  for (const BaselineRow& row : kBaseline) {
    for (const auto& [op, consumers] :
         {std::pair{"alfa", row.alfa_consumers}, std::pair{"beta", row.beta_consumers}}) {
      for (YearMonth m = YearMonth::of(config.start); m <= YearMonth::of(end); m = m.next()) {
        world.consumers.push_back(
            ConsumerCount{std::string(row.id), op, m, consumers});
      }
    }
  }

  std::mt19937_64 rng(config.seed);
  std::uniform_int_distribution<int> jitter(-config.noise, config.noise);

  for (const BaselineRow& row : kBaseline) {
    for (const auto& [op, base] :
         {std::pair{"alfa", row.alfa_daily}, std::pair{"beta", row.beta_daily}}) {
      const bool key_affected = affected.contains({std::string(row.id), op});
      for (Date day = config.start; day <= end; day += 1) {
        std::int64_t count = base;
        if (key_affected && day >= config.onset) {
          const double scaled = static_cast<double>(base) * multiplier;
          const double rounded = std::round(scaled);
          if (std::abs(scaled - rounded) > 1e-9) {
            throw ValidationError("scenario: multiplier " + format_double(multiplier) +
                                  " turns a daily count of " + format_int(base) +
                                  " into the non-integer " + format_double(scaled));
          }
          count = static_cast<std::int64_t>(rounded);
        }
        if (config.noise > 0) {
          count = std::max<std::int64_t>(0, count + jitter(rng));
        }
        world.complaints.push_back(ComplaintRecord{std::string(row.id), op, day, count});
      }
    }
  }

  world.affected.assign(affected.begin(), affected.end());

  nlohmann::json meta;
  meta["kind"] = kind_name;
  meta["start"] = config.start.to_string();
  meta["end"] = end.to_string();
  meta["days"] = config.days;
  meta["operators"] = scenario_operators();
  meta["noise"] = config.noise;
  meta["seed"] = config.seed;
  if (config.kind != ScenarioKind::Flat) {
    meta["onset"] = config.onset.to_string();
    meta["multiplier"] = multiplier;
  }
  if (config.kind == ScenarioKind::LocalAnomaly || config.kind == ScenarioKind::StepChange) {
    meta["target_municipality"] = config.target_municipality;
    meta["target_operator"] = config.target_operator;
  }
  if (config.kind == ScenarioKind::RegionalAnomaly) {
    meta["region"] = config.region;
  }
  meta["affected"] = nlohmann::json::array();
  for (const auto& [muni, op] : world.affected) {
    meta["affected"].push_back({{"municipality_id", muni}, {"operator", op}});
  }
  world.metadata = std::move(meta);
  return world;
}

// Writes the world as the five CSV inputs plus a scenario.json description.
inline void write_scenario_files(const ScenarioWorld& world,
                                 const std::filesystem::path& out_dir) {
  write_text_file_atomic(out_dir / "municipalities.csv",
                         write_municipalities_csv(world.municipalities));
  write_text_file_atomic(out_dir / "centers.csv", write_centers_csv(world.centers));
  write_text_file_atomic(out_dir / "relations.csv", write_relations_csv(world.relations));
  write_text_file_atomic(out_dir / "consumers.csv", write_consumers_csv(world.consumers));
  write_text_file_atomic(out_dir / "complaints.csv", write_complaints_csv(world.complaints));
  write_text_file_atomic(out_dir / "scenario.json", world.metadata.dump(2) + "\n");
}

}  // namespace vigil
