// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <limits>
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

namespace vigil {

// One-sided (upper) CUSUM parameters for monitoring a discrepancy series
// around its in-control level.
struct CusumConfig {
  double target_mean = 1.0;   // in-control level of the monitored series
  double allowance = 0.25;    // slack per step; drifts below this never accumulate
  double threshold = 5.0;     // alarm when the cumulative statistic reaches this
  bool reset_on_alarm = true; // restart accumulation after each alarm

  void validate() const {
    if (!std::isfinite(target_mean) || target_mean < 0.0) {
      throw std::invalid_argument("target_mean must be finite and >= 0");
    }
    if (!std::isfinite(allowance) || allowance < 0.0) {
      throw std::invalid_argument("allowance must be finite and >= 0");
    }
    if (!std::isfinite(threshold) || threshold <= 0.0) {
      throw std::invalid_argument("threshold must be finite and > 0");
    }
  }
};

struct CusumPoint {
  Date date;
  std::optional<double> input;  // the monitored value; nullopt when missing
  double statistic = 0.0;       // cumulative statistic after this step
  bool alarm = false;
};

struct CusumTrace {
  std::vector<CusumPoint> points;

  bool any_alarm() const {
    for (const CusumPoint& p : points) {
      if (p.alarm) return true;
    }
    return false;
  }

  std::vector<Date> alarm_dates() const {
    std::vector<Date> out;
    for (const CusumPoint& p : points) {
      if (p.alarm) out.push_back(p.date);
    }
    return out;
  }

  std::optional<Date> first_alarm() const {
    for (const CusumPoint& p : points) {
      if (p.alarm) return p.date;
    }
    return std::nullopt;
  }
};

// One-sided upper CUSUM over a dated series.
//
// Recursion: S <- max(0, S + (value - target_mean - allowance)), starting at
// 0; a step alarms when S reaches the threshold. Missing values leave S
// untouched (recorded, no alarm). An infinite value drives S to infinity and
// alarms immediately. Values at or below target_mean + allowance can never
// raise S, so they never alarm — improvements are ignored by design.
// Dates must be strictly increasing.
inline CusumTrace cusum(std::span<const std::pair<Date, std::optional<double>>> series,
                        const CusumConfig& config = {}) {
  config.validate();
  CusumTrace trace;
  trace.points.reserve(series.size());
  double s = 0.0;
  const Date* prev_date = nullptr;
  for (const auto& [date, value] : series) {
    if (prev_date && !(*prev_date < date)) {
      throw std::invalid_argument("cusum: dates must be strictly increasing (" +
                                  prev_date->to_string() + " then " + date.to_string() + ")");
    }
    prev_date = &date;
    if (!value) {
      trace.points.push_back(CusumPoint{date, std::nullopt, s, false});
      continue;
    }
    if (std::isnan(*value)) {
      throw std::invalid_argument("cusum: value on " + date.to_string() + " is NaN");
    }
    s = std::max(0.0, s + (*value - config.target_mean - config.allowance));
    const bool alarm = s >= config.threshold;
    trace.points.push_back(CusumPoint{date, *value, s, alarm});
    if (alarm && config.reset_on_alarm) s = 0.0;
  }
  return trace;
}

// Discrepancy adapter: undefined days are missing, infinite discrepancies
// alarm immediately.
inline CusumTrace cusum(std::span<const std::pair<Date, DiscrepancyValue>> series,
                        const CusumConfig& config = {}) {
  std::vector<std::pair<Date, std::optional<double>>> mapped;
  mapped.reserve(series.size());
  for (const auto& [date, d] : series) {
    if (d.is_undefined()) {
      mapped.emplace_back(date, std::nullopt);
    } else {
      mapped.emplace_back(date, d.value);  // +infinity for Kind::Infinite
    }
  }
  return cusum(mapped, config);
}

using MonitoredKey = std::pair<VertexId, std::string>;  // (municipality, operator)
using DiscrepancySeries = std::vector<std::pair<Date, DiscrepancyValue>>;
using DiscrepancyHistory = std::map<MonitoredKey, DiscrepancySeries>;

// Daily discrepancy series for every (municipality, operator) with rate data,
// over [from, to] inclusive. One discrepancy pass per (operator, day); keys
// without a rate series for an operator are omitted.
inline DiscrepancyHistory discrepancy_history(const InfluenceGraph& graph, const RateStore& store,
                                              Date from, Date to,
                                              std::span<const std::string> operators) {
  if (to < from) throw std::invalid_argument("discrepancy_history: empty date range");
  if (operators.empty()) throw std::invalid_argument("discrepancy_history: no operators");

  DiscrepancyHistory history;
  for (const std::string& op : operators) {
    std::vector<std::size_t> tracked;
    for (std::size_t i = 0; i < graph.vertex_count(); ++i) {
      if (store.has_series(graph.vertex_id(i), op)) tracked.push_back(i);
    }
    for (Date day = from; day <= to; day += 1) {
      const std::vector<DiscrepancyValue> d = discrepancy(graph, store.signal_at(graph, op, day));
      for (const std::size_t i : tracked) {
        history[{graph.vertex_id(i), op}].emplace_back(day, d[i]);
      }
    }
  }
  return history;
}

struct KeyedTrace {
  VertexId municipality;
  std::string operator_name;
  CusumTrace trace;
};

inline std::vector<KeyedTrace> scan_traces(const DiscrepancyHistory& history,
                                           const CusumConfig& config = {}) {
  std::vector<KeyedTrace> out;
  out.reserve(history.size());
  for (const auto& [key, series] : history) {
    out.push_back(KeyedTrace{key.first, key.second, cusum(series, config)});
  }
  return out;
}

struct AlarmSummary {
  VertexId municipality;
  std::string operator_name;
  std::vector<Date> alarm_dates;
};

// Keys whose traces raised at least one alarm, in key order.
inline std::vector<AlarmSummary> scan_all(const DiscrepancyHistory& history,
                                          const CusumConfig& config = {}) {
  std::vector<AlarmSummary> out;
  for (const KeyedTrace& kt : scan_traces(history, config)) {
    if (!kt.trace.any_alarm()) continue;
    out.push_back(AlarmSummary{kt.municipality, kt.operator_name, kt.trace.alarm_dates()});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Rendering.
// ---------------------------------------------------------------------------

// Long-form trace table; `d` is empty on missing days, "inf" on infinite
// discrepancies.
inline std::string traces_to_csv(std::span<const KeyedTrace> traces) {
  std::string out = "municipality_id,operator,date,d,S,alarm\n";
  for (const KeyedTrace& kt : traces) {
    for (const CusumPoint& p : kt.trace.points) {
      out += csv_row({kt.municipality, kt.operator_name, p.date.to_string(),
                      p.input ? format_double(*p.input) : std::string(),
                      format_double(p.statistic), p.alarm ? "true" : "false"});
    }
  }
  return out;
}

inline nlohmann::json cusum_config_to_json(const CusumConfig& config) {
  nlohmann::json j;
  j["target_mean"] = config.target_mean;
  j["allowance"] = config.allowance;
  j["threshold"] = config.threshold;
  j["reset_on_alarm"] = config.reset_on_alarm;
  return j;
}

inline nlohmann::json alarms_to_json(std::span<const AlarmSummary> alarms,
                                     const CusumConfig& config) {
  nlohmann::json j;
  j["config"] = cusum_config_to_json(config);
  j["alarms"] = nlohmann::json::array();
  for (const AlarmSummary& a : alarms) {
    nlohmann::json aj;
    aj["municipality_id"] = a.municipality;
    aj["operator"] = a.operator_name;
    aj["alarm_dates"] = nlohmann::json::array();
    for (const Date& d : a.alarm_dates) aj["alarm_dates"].push_back(d.to_string());
    j["alarms"].push_back(std::move(aj));
  }
  return j;
}

// CUSUM parameters from a JSON object; absent keys keep their defaults.
inline CusumConfig cusum_config_from_json(const nlohmann::json& j) {
  CusumConfig config;
  if (j.contains("target_mean")) config.target_mean = j.at("target_mean").get<double>();
  if (j.contains("allowance")) config.allowance = j.at("allowance").get<double>();
  if (j.contains("threshold")) config.threshold = j.at("threshold").get<double>();
  if (j.contains("reset_on_alarm")) config.reset_on_alarm = j.at("reset_on_alarm").get<bool>();
  config.validate();
  return config;
}

}  // namespace vigil
