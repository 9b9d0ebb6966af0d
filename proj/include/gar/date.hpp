#pragma once

#include <cstdio>
#include <string>

#include "gar/errors.hpp"

namespace gar {

// Calendar date at monthly resolution (day kept only for round-tripping
// input files). Ordering and arithmetic work on the month serial.
struct Date {
  int year = 1970;
  int month = 1;  // 1..12
  int day = 1;

  int serial() const { return year * 12 + (month - 1); }

  Date plus_months(int k) const {
    int s = serial() + k;
    int y = s / 12;
    int m = s % 12;
    if (m < 0) {
      m += 12;
      y -= 1;
    }
    return Date{y, m + 1, day};
  }

  bool operator==(const Date& o) const { return serial() == o.serial(); }
  bool operator!=(const Date& o) const { return !(*this == o); }
  bool operator<(const Date& o) const { return serial() < o.serial(); }

  std::string to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
    return buf;
  }
};

// Accepts YYYY-MM-DD and M/D/YYYY.
inline Date parse_date(const std::string& text) {
  int a = 0, b = 0, c = 0;
  if (std::sscanf(text.c_str(), "%d-%d-%d", &a, &b, &c) == 3) {
    if (b < 1 || b > 12) throw MalformedCsv("bad month in date '" + text + "'");
    return Date{a, b, c};
  }
  if (std::sscanf(text.c_str(), "%d/%d/%d", &a, &b, &c) == 3) {
    if (a < 1 || a > 12) throw MalformedCsv("bad month in date '" + text + "'");
    return Date{c, a, b};
  }
  throw MalformedCsv("unparsable date '" + text + "'");
}

}  // namespace gar
