// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <charconv>
#include <chrono>
#include <compare>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace vigil {

namespace detail {

inline bool parse_uint_field(std::string_view text, unsigned& out) {
  if (text.empty()) return false;
  unsigned value = 0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) return false;
  out = value;
  return true;
}

}  // namespace detail

// A calendar day with no time-of-day and no time zone. Backed by a count of
// days since the Unix epoch so arithmetic and ordering are exact.
class Date {
 public:
  Date() = default;

  Date(int year, unsigned month, unsigned day) {
    const std::chrono::year_month_day ymd{std::chrono::year{year},
                                          std::chrono::month{month},
                                          std::chrono::day{day}};
    if (!ymd.ok()) {
      throw std::invalid_argument("invalid calendar date: " + std::to_string(year) + "-" +
                                  std::to_string(month) + "-" + std::to_string(day));
    }
    days_ = std::chrono::sys_days{ymd};
  }

  // Parses strict ISO "YYYY-MM-DD". Returns nullopt on any malformation,
  // including out-of-range components such as February 30th.
  static std::optional<Date> parse(std::string_view iso) {
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') return std::nullopt;
    unsigned year = 0;
    unsigned month = 0;
    unsigned day = 0;
    if (!detail::parse_uint_field(iso.substr(0, 4), year) ||
        !detail::parse_uint_field(iso.substr(5, 2), month) ||
        !detail::parse_uint_field(iso.substr(8, 2), day)) {
      return std::nullopt;
    }
    const std::chrono::year_month_day ymd{std::chrono::year{static_cast<int>(year)},
                                          std::chrono::month{month}, std::chrono::day{day}};
    if (!ymd.ok()) return std::nullopt;
    Date result;
    result.days_ = std::chrono::sys_days{ymd};
    return result;
  }

  int year() const { return static_cast<int>(ymd().year()); }
  unsigned month() const { return static_cast<unsigned>(ymd().month()); }
  unsigned day() const { return static_cast<unsigned>(ymd().day()); }

  std::string to_string() const {
    char buf[11];
    const int y = year();
    const unsigned m = month();
    const unsigned d = day();
    buf[0] = static_cast<char>('0' + y / 1000 % 10);
    buf[1] = static_cast<char>('0' + y / 100 % 10);
    buf[2] = static_cast<char>('0' + y / 10 % 10);
    buf[3] = static_cast<char>('0' + y % 10);
    buf[4] = '-';
    buf[5] = static_cast<char>('0' + m / 10);
    buf[6] = static_cast<char>('0' + m % 10);
    buf[7] = '-';
    buf[8] = static_cast<char>('0' + d / 10);
    buf[9] = static_cast<char>('0' + d % 10);
    buf[10] = '\0';
    return std::string(buf, 10);
  }

  Date& operator+=(int days) {
    days_ += std::chrono::days{days};
    return *this;
  }
  Date& operator-=(int days) { return *this += -days; }
  friend Date operator+(Date d, int days) { return d += days; }
  friend Date operator-(Date d, int days) { return d -= days; }
  // Signed difference in whole days.
  friend int operator-(Date a, Date b) {
    return static_cast<int>((a.days_ - b.days_).count());
  }

  auto operator<=>(const Date&) const = default;

  std::chrono::sys_days to_sys_days() const { return days_; }

 private:
  std::chrono::year_month_day ymd() const { return std::chrono::year_month_day{days_}; }

  std::chrono::sys_days days_{};
};

// A calendar month, e.g. billing period "2024-03".
class YearMonth {
 public:
  YearMonth() = default;

  YearMonth(int year, unsigned month) : year_(year), month_(month) {
    if (month < 1 || month > 12) {
      throw std::invalid_argument("invalid month: " + std::to_string(month));
    }
  }

  // Parses strict "YYYY-MM".
  static std::optional<YearMonth> parse(std::string_view text) {
    if (text.size() != 7 || text[4] != '-') return std::nullopt;
    unsigned year = 0;
    unsigned month = 0;
    if (!detail::parse_uint_field(text.substr(0, 4), year) ||
        !detail::parse_uint_field(text.substr(5, 2), month)) {
      return std::nullopt;
    }
    if (month < 1 || month > 12) return std::nullopt;
    return YearMonth(static_cast<int>(year), month);
  }

  static YearMonth of(Date date) { return YearMonth(date.year(), date.month()); }

  int year() const { return year_; }
  unsigned month() const { return month_; }

  Date first_day() const { return Date(year_, month_, 1); }

  Date last_day() const {
    const std::chrono::year_month_day_last last{std::chrono::year{year_},
                                                std::chrono::month_day_last{std::chrono::month{month_}}};
    return Date(year_, month_, static_cast<unsigned>(last.day()));
  }

  unsigned day_count() const { return last_day().day(); }

  YearMonth next() const {
    return month_ == 12 ? YearMonth(year_ + 1, 1) : YearMonth(year_, month_ + 1);
  }

  std::string to_string() const {
    std::string s = first_day().to_string();
    s.resize(7);
    return s;
  }

  auto operator<=>(const YearMonth&) const = default;

 private:
  int year_ = 1970;
  unsigned month_ = 1;
};

}  // namespace vigil
