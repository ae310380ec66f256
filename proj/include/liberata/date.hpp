#pragma once

#include <cstdint>
#include <cstdio>
#include <string>

#include "liberata/errors.hpp"

namespace liberata {

/* Calendar dates at day resolution, stored as days since 1970-01-01.
   Time spans in years always use the 365.25-day year. */
class Date {
public:
  Date() = default;
  explicit Date(std::int64_t days) : days_(days) {}

  static constexpr double days_per_year = 365.25;

  static bool leap_year(int y) {
    return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
  }

  static int days_in_month(int y, int m) {
    static const int lengths[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2 && leap_year(y)) return 29;
    return lengths[m - 1];
  }

  static std::int64_t civil_to_days(int y, int m, int d) {
    // Howard Hinnant's days_from_civil.
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
  }

  static void days_to_civil(std::int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = static_cast<int>(yy + (m <= 2));
  }

  static Date from_civil(int y, int m, int d) { return Date(civil_to_days(y, m, d)); }

  static Date parse(const std::string& text) {
    int y = 0, m = 0, d = 0;
    char tail = 0;
    if (std::sscanf(text.c_str(), "%d-%d-%d%c", &y, &m, &d, &tail) != 3)
      throw Error("bad_date", "not an ISO-8601 calendar date: " + text);
    if (text.size() != 10 || text[4] != '-' || text[7] != '-')
      throw Error("bad_date", "not an ISO-8601 calendar date: " + text);
    if (m < 1 || m > 12 || d < 1 || d > days_in_month(y, m))
      throw Error("bad_date", "calendar date out of range: " + text);
    return from_civil(y, m, d);
  }

  std::string to_string() const {
    int y, m, d;
    days_to_civil(days_, y, m, d);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", y, m, d);
    return buf;
  }

  int year() const {
    int y, m, d;
    days_to_civil(days_, y, m, d);
    return y;
  }

  std::int64_t days() const { return days_; }

  friend bool operator==(Date a, Date b) { return a.days_ == b.days_; }
  friend bool operator!=(Date a, Date b) { return a.days_ != b.days_; }
  friend bool operator<(Date a, Date b) { return a.days_ < b.days_; }
  friend bool operator<=(Date a, Date b) { return a.days_ <= b.days_; }
  friend bool operator>(Date a, Date b) { return a.days_ > b.days_; }
  friend bool operator>=(Date a, Date b) { return a.days_ >= b.days_; }

  Date plus_days(std::int64_t n) const { return Date(days_ + n); }

private:
  std::int64_t days_ = 0;
};

inline double years_between(Date from, Date to) {
  return static_cast<double>(to.days() - from.days()) / Date::days_per_year;
}

inline Date year_end(int year) { return Date::from_civil(year, 12, 31); }

}  // namespace liberata
