// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vigil/csv.hpp"
#include "vigil/dates.hpp"
#include "vigil/errors.hpp"
#include "vigil/graph.hpp"
#include "vigil/signal.hpp"

namespace vigil {

// Length of the smoothing window applied to daily complaint rates.
inline constexpr int kMovingAverageWindow = 28;

// Monthly subscriber count for one (municipality, operator) pair.
struct ConsumerCount {
  VertexId municipality;
  std::string operator_name;
  YearMonth month;
  std::int64_t consumers = 0;
};

// Complaints filed against an operator in a municipality on one day.
struct ComplaintRecord {
  VertexId municipality;
  std::string operator_name;
  Date date;
  std::int64_t count = 0;
};

// Complaints per 100,000 consumers. Missing (not zero, not infinite) when
// there is no consumer base to normalize by.
inline std::optional<double> daily_rate(std::int64_t complaints, std::int64_t consumers) {
  if (complaints < 0) throw std::invalid_argument("complaint count must be >= 0");
  if (consumers < 0) throw std::invalid_argument("consumer count must be >= 0");
  if (consumers == 0) return std::nullopt;
  return static_cast<double>(complaints) * 100000.0 / static_cast<double>(consumers);
}

// Daily complaint-rate series per (municipality, operator) key, derived from
// monthly consumer counts and daily complaint tallies.
//
// Rules: a day's rate exists only for months with a positive consumer count;
// in such a month, a day with no complaint record counts as zero complaints.
// Months with a zero consumer count, or gaps between reported months, yield
// missing days. The smoothed value at a date is the arithmetic mean of the
// trailing 28 calendar days and exists only when all 28 are defined.
class RateStore {
 public:
  using Key = std::pair<VertexId, std::string>;

  static RateStore ingest(std::span<const ConsumerCount> consumers,
                          std::span<const ComplaintRecord> complaints) {
    RateStore store;

    std::map<Key, std::map<YearMonth, std::int64_t>> months;
    for (const ConsumerCount& c : consumers) {
      if (c.municipality.empty()) throw ValidationError("consumer record with empty municipality");
      if (c.operator_name.empty()) throw ValidationError("consumer record with empty operator");
      if (c.consumers < 0) {
        throw ValidationError("consumer count for ('" + c.municipality + "', '" +
                              c.operator_name + "', " + c.month.to_string() + ") is negative");
      }
      auto& per_key = months[{c.municipality, c.operator_name}];
      if (!per_key.emplace(c.month, c.consumers).second) {
        throw ValidationError("duplicate consumer record for ('" + c.municipality + "', '" +
                              c.operator_name + "', " + c.month.to_string() + ")");
      }
    }

    std::map<Key, std::map<Date, std::int64_t>> tallies;
    for (const ComplaintRecord& r : complaints) {
      if (r.count < 0) {
        throw ValidationError("complaint count for ('" + r.municipality + "', '" +
                              r.operator_name + "', " + r.date.to_string() + ") is negative");
      }
      tallies[{r.municipality, r.operator_name}][r.date] += r.count;
    }

    for (const auto& [key, by_month] : months) {
      Series series;
      series.start = by_month.begin()->first.first_day();
      series.end = by_month.rbegin()->first.last_day();
      series.daily.resize(static_cast<std::size_t>(series.end - series.start) + 1);

      const auto tally_it = tallies.find(key);
      const std::map<Date, std::int64_t>* tally =
          tally_it == tallies.end() ? nullptr : &tally_it->second;

      for (Date day = series.start; day <= series.end; day += 1) {
        const auto month_it = by_month.find(YearMonth::of(day));
        if (month_it == by_month.end() || month_it->second == 0) continue;
        std::int64_t count = 0;
        if (tally) {
          const auto it = tally->find(day);
          if (it != tally->end()) count = it->second;
        }
        series.daily[static_cast<std::size_t>(day - series.start)] =
            daily_rate(count, month_it->second);
      }
      store.operators_.insert(key.second);
      store.series_.emplace(key, std::move(series));
    }

    // Complaints that no consumer month can normalize are unusable; surface
    // them instead of silently dropping.
    for (const auto& [key, by_date] : tallies) {
      const auto series_it = store.series_.find(key);
      std::size_t orphaned = 0;
      for (const auto& [date, count] : by_date) {
        if (series_it == store.series_.end()) {
          ++orphaned;
          continue;
        }
        const auto& by_month = months.at(key);
        if (!by_month.contains(YearMonth::of(date))) ++orphaned;
      }
      if (orphaned > 0) {
        store.warnings_.push_back(std::to_string(orphaned) + " complaint record(s) for ('" +
                                  key.first + "', '" + key.second +
                                  "') fall in months without consumer data");
      }
    }
    return store;
  }

  // Operators present in the consumer data, sorted.
  std::vector<std::string> operators() const {
    return {operators_.begin(), operators_.end()};
  }

  bool has_operator(const std::string& op) const { return operators_.contains(op); }

  std::vector<Key> keys() const {
    std::vector<Key> out;
    out.reserve(series_.size());
    for (const auto& [key, _] : series_) out.push_back(key);
    return out;
  }

  bool has_series(const VertexId& municipality, const std::string& op) const {
    return series_.contains({municipality, op});
  }

  // Earliest/latest day covered by any series; nullopt when the store is empty.
  std::optional<Date> first_date() const {
    std::optional<Date> first;
    for (const auto& [_, s] : series_) {
      if (!first || s.start < *first) first = s.start;
    }
    return first;
  }

  std::optional<Date> last_date() const {
    std::optional<Date> last;
    for (const auto& [_, s] : series_) {
      if (!last || s.end > *last) last = s.end;
    }
    return last;
  }

  std::optional<double> rate(const VertexId& municipality, const std::string& op,
                             Date date) const {
    const Series* s = find_series(municipality, op);
    if (!s || date < s->start || date > s->end) return std::nullopt;
    return s->daily[static_cast<std::size_t>(date - s->start)];
  }

  // Trailing 28-day mean ending at `date`; missing unless all 28 days exist.
  // Summed oldest-to-newest.
  std::optional<double> moving_average(const VertexId& municipality, const std::string& op,
                                       Date date) const {
    const Series* s = find_series(municipality, op);
    if (!s || date - (kMovingAverageWindow - 1) < s->start || date > s->end) return std::nullopt;
    const std::size_t last = static_cast<std::size_t>(date - s->start);
    double sum = 0.0;
    for (int k = kMovingAverageWindow - 1; k >= 0; --k) {
      const auto v = s->daily[last - static_cast<std::size_t>(k)];
      if (!v) return std::nullopt;
      sum += *v;
    }
    return sum / static_cast<double>(kMovingAverageWindow);
  }

  // Smoothed rates of every graph vertex for one operator on one day.
  GraphSignal signal_at(const InfluenceGraph& graph, const std::string& op, Date date) const {
    if (!has_operator(op)) {
      std::string known;
      for (const auto& o : operators_) {
        if (!known.empty()) known += ", ";
        known += "'" + o + "'";
      }
      throw std::invalid_argument("unknown operator '" + op + "'; data covers: " +
                                  (known.empty() ? "(none)" : known));
    }
    GraphSignal x(graph.vertex_count());
    for (std::size_t i = 0; i < graph.vertex_count(); ++i) {
      const auto ma = moving_average(graph.vertex_id(i), op, date);
      if (ma) x.set(i, *ma);
    }
    return x;
  }

  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  struct Series {
    Date start;
    Date end;
    std::vector<std::optional<double>> daily;
  };

  const Series* find_series(const VertexId& municipality, const std::string& op) const {
    const auto it = series_.find({municipality, op});
    return it == series_.end() ? nullptr : &it->second;
  }

  std::map<Key, Series> series_;
  std::set<std::string> operators_;
  std::vector<std::string> warnings_;
};

// ---------------------------------------------------------------------------
// CSV input/output.
// ---------------------------------------------------------------------------

inline std::vector<ConsumerCount> read_consumers_csv(std::string_view text,
                                                     const std::string& filename) {
  CsvReader reader(text, filename);
  reader.expect_header({"municipality_id", "operator", "year_month", "consumers"});
  std::vector<ConsumerCount> out;
  CsvRow row;
  while (reader.next(row)) {
    if (row.fields.size() != 4) {
      reader.fail(row, "expected 4 fields, got " + std::to_string(row.fields.size()));
    }
    ConsumerCount c;
    c.municipality = row.fields[0];
    c.operator_name = row.fields[1];
    if (c.municipality.empty()) reader.fail(row, "empty municipality id");
    if (c.operator_name.empty()) reader.fail(row, "empty operator");
    const auto month = YearMonth::parse(row.fields[2]);
    if (!month) reader.fail(row, "malformed year_month '" + row.fields[2] + "'; expected YYYY-MM");
    c.month = *month;
    if (!try_parse_int(row.fields[3], c.consumers) || c.consumers < 0) {
      reader.fail(row, "consumers must be an integer >= 0, got '" + row.fields[3] + "'");
    }
    out.push_back(std::move(c));
  }
  return out;
}

inline std::string write_consumers_csv(std::span<const ConsumerCount> records) {
  std::string out = "municipality_id,operator,year_month,consumers\n";
  for (const ConsumerCount& c : records) {
    out += csv_row({c.municipality, c.operator_name, c.month.to_string(), format_int(c.consumers)});
  }
  return out;
}

inline std::vector<ComplaintRecord> read_complaints_csv(std::string_view text,
                                                        const std::string& filename) {
  CsvReader reader(text, filename);
  reader.expect_header({"municipality_id", "operator", "date", "count"});
  std::vector<ComplaintRecord> out;
  CsvRow row;
  while (reader.next(row)) {
    if (row.fields.size() != 4) {
      reader.fail(row, "expected 4 fields, got " + std::to_string(row.fields.size()));
    }
    ComplaintRecord r;
    r.municipality = row.fields[0];
    r.operator_name = row.fields[1];
    if (r.municipality.empty()) reader.fail(row, "empty municipality id");
    if (r.operator_name.empty()) reader.fail(row, "empty operator");
    const auto date = Date::parse(row.fields[2]);
    if (!date) reader.fail(row, "malformed date '" + row.fields[2] + "'; expected YYYY-MM-DD");
    r.date = *date;
    if (!try_parse_int(row.fields[3], r.count) || r.count < 0) {
      reader.fail(row, "count must be an integer >= 0, got '" + row.fields[3] + "'");
    }
    out.push_back(std::move(r));
  }
  return out;
}

inline std::string write_complaints_csv(std::span<const ComplaintRecord> records) {
  std::string out = "municipality_id,operator,date,count\n";
  for (const ComplaintRecord& r : records) {
    out += csv_row({r.municipality, r.operator_name, r.date.to_string(), format_int(r.count)});
  }
  return out;
}

}  // namespace vigil
