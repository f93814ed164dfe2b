// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "vigil/complaint_pipeline.hpp"
#include "vigil/csv.hpp"
#include "vigil/dates.hpp"
#include "vigil/discrepancy.hpp"
#include "vigil/errors.hpp"
#include "vigil/graph.hpp"
#include "vigil/influence_net.hpp"
#include "vigil/signal.hpp"

namespace vigil {

// Population band; lower bound exclusive, upper bound inclusive when present.
struct Stratum {
  std::string name;
  std::int64_t min_population = 0;
  std::optional<std::int64_t> max_population;

  bool contains(std::int64_t population) const {
    return population > min_population &&
           (!max_population || population <= *max_population);
  }

  void validate() const {
    if (name.empty()) throw std::invalid_argument("stratum name must be non-empty");
    if (min_population < 0) throw std::invalid_argument("stratum lower bound must be >= 0");
    if (max_population && *max_population <= min_population) {
      throw std::invalid_argument("stratum '" + name + "' has an empty population range");
    }
  }
};

inline std::vector<Stratum> default_strata() {
  return {
      Stratum{"over-500k", 500000, std::nullopt},
      Stratum{"200k-500k", 200000, 500000},
  };
}

// One (municipality, operator) pair proposed for ranking within a stratum.
struct RankCandidate {
  VertexId municipality;
  std::string municipality_name;
  std::string operator_name;
  DiscrepancyValue discrepancy;
};

struct RankedEntry {
  VertexId municipality;
  std::string municipality_name;
  std::string operator_name;
  DiscrepancyValue discrepancy;
  double rate = 0.0;  // the smoothed observed rate (= discrepancy.observed)
  int rank_by_discrepancy = 0;
  int rank_by_rate = 0;
  bool flagged = false;
};

// A candidate left out of the ranking, with the reason.
struct ExcludedEntry {
  VertexId municipality;
  std::string operator_name;
  std::string reason;
};

struct RankingResult {
  std::vector<RankedEntry> entries;  // sorted worst-discrepancy-first
  std::vector<ExcludedEntry> excluded;
};

namespace detail {

// Worst-first display order: discrepancy desc (infinite above all finite),
// then rate desc, then municipality id asc, then operator asc.
inline bool discrepancy_order(const RankedEntry& a, const RankedEntry& b) {
  const double ka = a.discrepancy.sort_key();
  const double kb = b.discrepancy.sort_key();
  if (ka != kb) return ka > kb;
  if (a.rate != b.rate) return a.rate > b.rate;
  if (a.municipality != b.municipality) return a.municipality < b.municipality;
  return a.operator_name < b.operator_name;
}

inline bool rate_order(const RankedEntry& a, const RankedEntry& b) {
  if (a.rate != b.rate) return a.rate > b.rate;
  if (a.municipality != b.municipality) return a.municipality < b.municipality;
  return a.operator_name < b.operator_name;
}

}  // namespace detail

// Ranks candidates by discrepancy and, independently, by raw smoothed rate.
// Ranks are dense and 1-based: entries with equal values share a rank and the
// next distinct value takes the next rank. An entry is flagged when it sits
// in the discrepancy top-K but not in the rate top-K — the cases the raw-rate
// view would miss. Candidates with an undefined discrepancy are excluded and
// reported separately.
inline RankingResult rank_stratum(std::span<const RankCandidate> candidates, int top_k) {
  if (top_k < 1) throw std::invalid_argument("top_k must be >= 1");

  RankingResult result;
  for (const RankCandidate& c : candidates) {
    if (c.discrepancy.is_undefined()) {
      const bool observation_missing = !c.discrepancy.observed.has_value();
      result.excluded.push_back(ExcludedEntry{
          c.municipality, c.operator_name,
          observation_missing ? "no smoothed rate for this date"
                              : "no expectation (influencers missing or unobserved)"});
      continue;
    }
    RankedEntry e;
    e.municipality = c.municipality;
    e.municipality_name = c.municipality_name;
    e.operator_name = c.operator_name;
    e.discrepancy = c.discrepancy;
    e.rate = c.discrepancy.observed.value();
    result.entries.push_back(std::move(e));
  }

  auto& entries = result.entries;

  std::sort(entries.begin(), entries.end(), detail::rate_order);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (i == 0) {
      entries[i].rank_by_rate = 1;
    } else if (entries[i].rate == entries[i - 1].rate) {
      entries[i].rank_by_rate = entries[i - 1].rank_by_rate;
    } else {
      entries[i].rank_by_rate = entries[i - 1].rank_by_rate + 1;
    }
  }

  std::sort(entries.begin(), entries.end(), detail::discrepancy_order);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (i == 0) {
      entries[i].rank_by_discrepancy = 1;
    } else if (entries[i].discrepancy.sort_key() == entries[i - 1].discrepancy.sort_key()) {
      entries[i].rank_by_discrepancy = entries[i - 1].rank_by_discrepancy;
    } else {
      entries[i].rank_by_discrepancy = entries[i - 1].rank_by_discrepancy + 1;
    }
  }

  for (RankedEntry& e : entries) {
    e.flagged = e.rank_by_discrepancy <= top_k && e.rank_by_rate > top_k;
  }
  return result;
}

enum class RankingMode { Joint, PerOperator };

inline std::string to_string(RankingMode mode) {
  return mode == RankingMode::Joint ? "joint" : "per_operator";
}

inline constexpr const char* kTieBreakPolicy =
    "discrepancy desc, then rate desc, then municipality id asc, then operator asc";

struct StratumSection {
  std::string stratum;
  std::string operator_scope;  // an operator name, or "all" in joint mode
  std::vector<RankedEntry> entries;
  std::vector<ExcludedEntry> excluded;
};

struct InspectionReport {
  Date date;
  int top_k = 0;
  RankingMode mode = RankingMode::Joint;
  std::vector<std::string> operators;
  std::vector<Stratum> strata;
  std::vector<StratumSection> sections;
};

// Builds the inspection report for one day from per-operator smoothed-rate
// signals. `signal_for_operator` must return a signal aligned with `graph`.
// Every graph vertex must appear in `municipalities` (population determines
// its stratum, if any). In joint mode all operators compete in one ranking
// per stratum; in per-operator mode each operator is ranked separately.
inline InspectionReport build_inspection_report(
    const InfluenceGraph& graph,
    const std::function<GraphSignal(const std::string&)>& signal_for_operator,
    std::span<const Municipality> municipalities, std::span<const Stratum> strata,
    std::span<const std::string> operators, int top_k, Date date, RankingMode mode) {
  if (top_k < 1) throw std::invalid_argument("top_k must be >= 1");
  if (operators.empty()) throw std::invalid_argument("no operators to rank");
  for (const Stratum& s : strata) s.validate();

  std::map<VertexId, const Municipality*> muni_by_id;
  for (const Municipality& m : municipalities) muni_by_id.emplace(m.id, &m);
  for (std::size_t i = 0; i < graph.vertex_count(); ++i) {
    if (!muni_by_id.contains(graph.vertex_id(i))) {
      throw ValidationError("graph vertex '" + graph.vertex_id(i) +
                            "' has no municipality record");
    }
  }

  std::vector<std::string> ops(operators.begin(), operators.end());
  std::sort(ops.begin(), ops.end());
  ops.erase(std::unique(ops.begin(), ops.end()), ops.end());

  // One discrepancy pass per operator, shared across strata.
  std::map<std::string, std::vector<DiscrepancyValue>> disc_by_op;
  for (const std::string& op : ops) {
    const GraphSignal x = signal_for_operator(op);
    disc_by_op.emplace(op, discrepancy(graph, x));
  }

  const auto candidates_for = [&](const Stratum& stratum,
                                  const std::string& op) -> std::vector<RankCandidate> {
    std::vector<RankCandidate> out;
    const auto& disc = disc_by_op.at(op);
    for (std::size_t i = 0; i < graph.vertex_count(); ++i) {
      const Municipality& m = *muni_by_id.at(graph.vertex_id(i));
      if (!stratum.contains(m.population)) continue;
      out.push_back(RankCandidate{m.id, m.name, op, disc[i]});
    }
    return out;
  };

  InspectionReport report;
  report.date = date;
  report.top_k = top_k;
  report.mode = mode;
  report.operators = ops;
  report.strata.assign(strata.begin(), strata.end());

  for (const Stratum& stratum : strata) {
    if (mode == RankingMode::Joint) {
      std::vector<RankCandidate> candidates;
      for (const std::string& op : ops) {
        auto per_op = candidates_for(stratum, op);
        candidates.insert(candidates.end(), per_op.begin(), per_op.end());
      }
      RankingResult ranked = rank_stratum(candidates, top_k);
      report.sections.push_back(StratumSection{stratum.name, "all", std::move(ranked.entries),
                                               std::move(ranked.excluded)});
    } else {
      for (const std::string& op : ops) {
        RankingResult ranked = rank_stratum(candidates_for(stratum, op), top_k);
        report.sections.push_back(StratumSection{stratum.name, op, std::move(ranked.entries),
                                                 std::move(ranked.excluded)});
      }
    }
  }
  return report;
}

// Report for the last day of `month` from ingested complaint data. Verifies
// that the smoothing window is complete: the report date must have 28 days of
// data behind it and must not run past the data.
inline InspectionReport month_end_report(const InfluenceGraph& graph, const RateStore& store,
                                         std::span<const Municipality> municipalities,
                                         std::span<const Stratum> strata, int top_k,
                                         YearMonth month, RankingMode mode,
                                         std::span<const std::string> operator_filter = {}) {
  const Date date = month.last_day();
  const auto first = store.first_date();
  const auto last = store.last_date();
  if (!first) throw ValidationError("no rate data; nothing to rank");
  if (date - (kMovingAverageWindow - 1) < *first) {
    throw ValidationError("report window incomplete: first computable report date is " +
                          (*first + (kMovingAverageWindow - 1)).to_string());
  }
  if (date > *last) {
    throw ValidationError("report date " + date.to_string() + " is after the last day of data (" +
                          last->to_string() + ")");
  }

  std::vector<std::string> ops;
  if (operator_filter.empty()) {
    ops = store.operators();
  } else {
    ops.assign(operator_filter.begin(), operator_filter.end());
    for (const std::string& op : ops) {
      if (!store.has_operator(op)) {
        std::string known;
        for (const auto& o : store.operators()) {
          if (!known.empty()) known += ", ";
          known += "'" + o + "'";
        }
        throw ValidationError("unknown operator '" + op + "'; data covers: " + known);
      }
    }
  }

  const auto provider = [&](const std::string& op) { return store.signal_at(graph, op, date); };
  return build_inspection_report(graph, provider, municipalities, strata, ops, top_k, date, mode);
}

// How often the discrepancy view disagrees with the raw-rate view: of the
// discrepancy top-K entries, the fraction the rate ranking would not have
// surfaced. Zero when nothing is flagged.
struct DivergenceSummary {
  struct Item {
    std::string stratum;
    std::string operator_scope;
    std::size_t top_entries = 0;
    std::size_t flagged = 0;
    double fraction = 0.0;
  };
  std::vector<Item> per_section;
  std::size_t top_entries_total = 0;
  std::size_t flagged_total = 0;
  double overall_fraction = 0.0;
};

inline DivergenceSummary divergence_summary(const InspectionReport& report, int top_k) {
  if (top_k != report.top_k) {
    throw std::invalid_argument("divergence_summary: top_k does not match the report");
  }
  DivergenceSummary summary;
  for (const StratumSection& section : report.sections) {
    DivergenceSummary::Item item;
    item.stratum = section.stratum;
    item.operator_scope = section.operator_scope;
    for (const RankedEntry& e : section.entries) {
      if (e.rank_by_discrepancy > top_k) continue;
      ++item.top_entries;
      if (e.flagged) ++item.flagged;
    }
    item.fraction = item.top_entries == 0
                        ? 0.0
                        : static_cast<double>(item.flagged) / static_cast<double>(item.top_entries);
    summary.top_entries_total += item.top_entries;
    summary.flagged_total += item.flagged;
    summary.per_section.push_back(std::move(item));
  }
  summary.overall_fraction = summary.top_entries_total == 0
                                 ? 0.0
                                 : static_cast<double>(summary.flagged_total) /
                                       static_cast<double>(summary.top_entries_total);
  return summary;
}

// ---------------------------------------------------------------------------
// Rendering.
// ---------------------------------------------------------------------------

namespace detail {

inline nlohmann::json discrepancy_to_json(const DiscrepancyValue& d) {
  switch (d.kind) {
    case DiscrepancyValue::Kind::Finite:
      return d.value;
    case DiscrepancyValue::Kind::Infinite:
      return "INF";
    case DiscrepancyValue::Kind::Undefined:
      return "UNDEFINED";
  }
  throw std::logic_error("unreachable");
}

// Short human-facing number: four significant digits.
inline std::string format_compact(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.4g", value);
  return buf;
}

}  // namespace detail

inline nlohmann::json report_to_json(const InspectionReport& report) {
  nlohmann::json j;
  j["date"] = report.date.to_string();
  j["top_k"] = report.top_k;
  j["mode"] = to_string(report.mode);
  j["operators"] = report.operators;
  j["tie_break"] = kTieBreakPolicy;
  j["strata"] = nlohmann::json::array();
  for (const Stratum& s : report.strata) {
    nlohmann::json sj;
    sj["name"] = s.name;
    sj["min_population"] = s.min_population;
    sj["max_population"] = s.max_population ? nlohmann::json(*s.max_population) : nlohmann::json();
    j["strata"].push_back(std::move(sj));
  }
  j["sections"] = nlohmann::json::array();
  for (const StratumSection& section : report.sections) {
    nlohmann::json sj;
    sj["stratum"] = section.stratum;
    sj["operator_scope"] = section.operator_scope;
    sj["entries"] = nlohmann::json::array();
    for (const RankedEntry& e : section.entries) {
      nlohmann::json ej;
      ej["municipality_id"] = e.municipality;
      ej["municipality_name"] = e.municipality_name;
      ej["operator"] = e.operator_name;
      ej["discrepancy"] = detail::discrepancy_to_json(e.discrepancy);
      ej["rate_ma28"] = e.rate;
      if (e.discrepancy.expected) {
        ej["expected_rate"] = *e.discrepancy.expected;
      }
      ej["rank_by_discrepancy"] = e.rank_by_discrepancy;
      ej["rank_by_rate"] = e.rank_by_rate;
      ej["flagged"] = e.flagged;
      sj["entries"].push_back(std::move(ej));
    }
    sj["excluded"] = nlohmann::json::array();
    for (const ExcludedEntry& e : section.excluded) {
      nlohmann::json ej;
      ej["municipality_id"] = e.municipality;
      ej["operator"] = e.operator_name;
      ej["reason"] = e.reason;
      sj["excluded"].push_back(std::move(ej));
    }
    j["sections"].push_back(std::move(sj));
  }
  j["divergence"] = nlohmann::json::object();
  const DivergenceSummary summary = divergence_summary(report, report.top_k);
  j["divergence"]["per_section"] = nlohmann::json::array();
  for (const auto& item : summary.per_section) {
    nlohmann::json ij;
    ij["stratum"] = item.stratum;
    ij["operator_scope"] = item.operator_scope;
    ij["top_entries"] = item.top_entries;
    ij["flagged"] = item.flagged;
    ij["fraction"] = item.fraction;
    j["divergence"]["per_section"].push_back(std::move(ij));
  }
  j["divergence"]["top_entries_total"] = summary.top_entries_total;
  j["divergence"]["flagged_total"] = summary.flagged_total;
  j["divergence"]["overall_fraction"] = summary.overall_fraction;
  return j;
}

// Flat per-entry render of the ranked entries (the excluded appendix lives in
// the JSON form). `ranks` column is "rank_disc-rank_rate" for quick scanning.
inline std::string report_to_csv(const InspectionReport& report) {
  std::string out =
      "stratum,operator,municipality_id,municipality_name,discrepancy,rate_ma28,"
      "rank_disc,rank_rate,flagged,ranks\n";
  for (const StratumSection& section : report.sections) {
    for (const RankedEntry& e : section.entries) {
      out += csv_row({section.stratum, e.operator_name, e.municipality, e.municipality_name,
                      e.discrepancy.to_string(), format_double(e.rate),
                      std::to_string(e.rank_by_discrepancy), std::to_string(e.rank_by_rate),
                      e.flagged ? "true" : "false",
                      std::to_string(e.rank_by_discrepancy) + "-" +
                          std::to_string(e.rank_by_rate)});
    }
  }
  return out;
}

// Console view: top-K of each section plus the divergence summary.
inline std::string report_to_text(const InspectionReport& report) {
  std::string out;
  out += "Inspection report for " + report.date.to_string() + " (top " +
         std::to_string(report.top_k) + ", " + to_string(report.mode) + " mode)\n";
  for (const StratumSection& section : report.sections) {
    out += "\nStratum " + section.stratum + " [" + section.operator_scope + "] — " +
           std::to_string(section.entries.size()) + " ranked, " +
           std::to_string(section.excluded.size()) + " excluded\n";
    for (const RankedEntry& e : section.entries) {
      if (e.rank_by_discrepancy > report.top_k) continue;
      out += "  " + std::to_string(e.rank_by_discrepancy) + ". " + e.municipality + " " +
             e.municipality_name + " (" + e.operator_name + ")  d=" +
             (e.discrepancy.is_infinite() ? "INF" : detail::format_compact(e.discrepancy.value)) +
             "  rate=" + detail::format_compact(e.rate) + "  ranks=" +
             std::to_string(e.rank_by_discrepancy) + "-" + std::to_string(e.rank_by_rate) +
             (e.flagged ? "  FLAGGED" : "") + "\n";
    }
  }
  const DivergenceSummary summary = divergence_summary(report, report.top_k);
  out += "\nDivergence: " + std::to_string(summary.flagged_total) + "/" +
         std::to_string(summary.top_entries_total) + " top entries flagged (" +
         detail::format_compact(summary.overall_fraction) + ")\n";
  return out;
}

// Strata from a JSON array of {name, min_population, max_population|null}.
inline std::vector<Stratum> strata_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) {
    throw ValidationError("strata must be a non-empty array");
  }
  std::vector<Stratum> out;
  for (const auto& sj : j) {
    Stratum s;
    s.name = sj.at("name").get<std::string>();
    s.min_population = sj.at("min_population").get<std::int64_t>();
    if (sj.contains("max_population") && !sj.at("max_population").is_null()) {
      s.max_population = sj.at("max_population").get<std::int64_t>();
    }
    s.validate();
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace vigil
