#include "wikirel/dates.h"

#include <cstdio>

namespace wikirel {

namespace {

bool parse_digits(std::string_view s, std::size_t pos, std::size_t n, int* out) {
  if (pos + n > s.size()) return false;
  int v = 0;
  for (std::size_t i = pos; i < pos + n; ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
    v = v * 10 + (s[i] - '0');
  }
  *out = v;
  return true;
}

}  // namespace

std::string YearMonth::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u", year, month);
  return buf;
}

std::optional<YearMonth> YearMonth::parse(std::string_view s) {
  int y = 0, m = 0;
  if (s.size() != 7 || s[4] != '-' || !parse_digits(s, 0, 4, &y) ||
      !parse_digits(s, 5, 2, &m) || m < 1 || m > 12) {
    return std::nullopt;
  }
  return YearMonth{y, static_cast<unsigned>(m)};
}

Date Date::from_ymd(int year, unsigned month, unsigned day) {
  using namespace std::chrono;
  return Date(sys_days{std::chrono::year{year} / std::chrono::month{month} /
                       std::chrono::day{day}});
}

std::optional<Date> Date::parse(std::string_view s) {
  int y = 0, m = 0, d = 0;
  bool ok = false;
  if (s.size() == 10 && s[4] == '-' && s[7] == '-') {
    ok = parse_digits(s, 0, 4, &y) && parse_digits(s, 5, 2, &m) &&
         parse_digits(s, 8, 2, &d);
  } else if (s.size() == 8) {
    ok = parse_digits(s, 0, 4, &y) && parse_digits(s, 4, 2, &m) &&
         parse_digits(s, 6, 2, &d);
  }
  if (!ok) return std::nullopt;
  std::chrono::year_month_day ymd{std::chrono::year{y},
                                  std::chrono::month{static_cast<unsigned>(m)},
                                  std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  return Date(std::chrono::sys_days{ymd});
}

int Date::year() const {
  return static_cast<int>(std::chrono::year_month_day{days_}.year());
}

unsigned Date::month() const {
  return static_cast<unsigned>(std::chrono::year_month_day{days_}.month());
}

unsigned Date::day() const {
  return static_cast<unsigned>(std::chrono::year_month_day{days_}.day());
}

std::string Date::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", year(), month(), day());
  return buf;
}

std::string Date::compact() const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d%02u%02u", year(), month(), day());
  return buf;
}

std::optional<Timestamp> parse_timestamp(std::string_view s) {
  // 2020-03-01T12:34:56Z
  if (s.size() < 19 || s[10] != 'T' || s[13] != ':' || s[16] != ':') {
    return std::nullopt;
  }
  auto date = Date::parse(s.substr(0, 10));
  int hh = 0, mm = 0, ss = 0;
  if (!date || !parse_digits(s, 11, 2, &hh) || !parse_digits(s, 14, 2, &mm) ||
      !parse_digits(s, 17, 2, &ss) || hh > 23 || mm > 59 || ss > 60) {
    return std::nullopt;
  }
  auto rest = s.substr(19);
  if (!(rest.empty() || rest == "Z")) return std::nullopt;
  return Timestamp{date->days()} + std::chrono::hours{hh} +
         std::chrono::minutes{mm} + std::chrono::seconds{ss};
}

std::string format_timestamp(Timestamp t) {
  auto day = std::chrono::floor<std::chrono::days>(t);
  auto secs = (t - day).count();
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%sT%02lld:%02lld:%02lldZ",
                Date(day).to_string().c_str(), static_cast<long long>(secs / 3600),
                static_cast<long long>((secs / 60) % 60),
                static_cast<long long>(secs % 60));
  return buf;
}

Date date_of(Timestamp t) {
  return Date(std::chrono::floor<std::chrono::days>(t));
}

Timestamp start_of_day(Date d) { return Timestamp{d.days()}; }

Timestamp end_of_day(Date d) {
  return Timestamp{d.days()} + std::chrono::seconds{86399};
}

}  // namespace wikirel
