#ifndef RSCEV_CSV_HPP
#define RSCEV_CSV_HPP

#include <cstdio>
#include <string>

namespace rscev::csv {

/// 17 significant digits, '.' separator: round-trips every double.
inline std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace rscev::csv

#endif  // RSCEV_CSV_HPP
