#ifndef WIKIREL_DATES_H_
#define WIKIREL_DATES_H_

#include <chrono>
#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace wikirel {

// All instants are UTC.
using Timestamp = std::chrono::sys_seconds;

struct YearMonth {
  int year = 1970;
  unsigned month = 1;

  auto operator<=>(const YearMonth&) const = default;

  // "YYYY-MM"
  std::string to_string() const;
  static std::optional<YearMonth> parse(std::string_view s);
};

// A UTC calendar day.
class Date {
 public:
  Date() = default;
  explicit Date(std::chrono::sys_days days) : days_(days) {}

  static Date from_ymd(int year, unsigned month, unsigned day);
  // Accepts "YYYY-MM-DD" and "YYYYMMDD".
  static std::optional<Date> parse(std::string_view s);

  std::chrono::sys_days days() const { return days_; }
  int year() const;
  unsigned month() const;
  unsigned day() const;
  YearMonth year_month() const { return {year(), month()}; }

  Date next() const { return Date(days_ + std::chrono::days{1}); }
  Date prev() const { return Date(days_ - std::chrono::days{1}); }

  // "YYYY-MM-DD"
  std::string to_string() const;
  // "YYYYMMDD"
  std::string compact() const;

  auto operator<=>(const Date&) const = default;

 private:
  std::chrono::sys_days days_{};
};

// Inclusive range of days.
struct DateRange {
  Date from;
  Date to;

  bool valid() const { return from <= to; }
  bool contains(Date d) const { return from <= d && d <= to; }
  long long size() const { return (to.days() - from.days()).count() + 1; }
};

// ISO-8601 "YYYY-MM-DDTHH:MM:SSZ" (the format used by dumps and the API).
std::optional<Timestamp> parse_timestamp(std::string_view s);
std::string format_timestamp(Timestamp t);

Date date_of(Timestamp t);
Timestamp start_of_day(Date d);
// 23:59:59 of the given day.
Timestamp end_of_day(Date d);

}  // namespace wikirel

#endif  // WIKIREL_DATES_H_
