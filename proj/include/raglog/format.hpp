#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <string>
#include <system_error>

namespace raglog {

/// Shortest decimal text that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, end);
}

/// Rounds the shortest decimal form of v to two places, ties to even.
/// 0.885 -> "0.88", 0.895 -> "0.90", 0.8948 -> "0.89".
inline std::string format_2dp_half_even(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed);
  if (ec != std::errc{}) return "nan";
  std::string s(buf, end);
  bool negative = false;
  if (!s.empty() && s[0] == '-') {
    negative = true;
    s.erase(0, 1);
  }
  auto dot = s.find('.');
  std::string int_part = dot == std::string::npos ? s : s.substr(0, dot);
  std::string frac = dot == std::string::npos ? "" : s.substr(dot + 1);
  frac.resize(std::max<std::size_t>(frac.size(), 3), '0');

  // Work on the integer number of hundredths.
  std::string digits = int_part + frac.substr(0, 2);
  const char next = frac[2];
  const bool rest_nonzero = frac.find_first_not_of('0', 3) != std::string::npos;
  const bool last_odd = (digits.back() - '0') % 2 == 1;
  const bool round_up = next > '5' || (next == '5' && (rest_nonzero || last_odd));
  if (round_up) {
    int i = static_cast<int>(digits.size()) - 1;
    while (i >= 0 && digits[static_cast<std::size_t>(i)] == '9') digits[static_cast<std::size_t>(i--)] = '0';
    if (i < 0) {
      digits.insert(digits.begin(), '1');
    } else {
      ++digits[static_cast<std::size_t>(i)];
    }
  }
  while (digits.size() < 3) digits.insert(digits.begin(), '0');
  std::string out = digits.substr(0, digits.size() - 2) + "." + digits.substr(digits.size() - 2);
  if (negative && out.find_first_not_of("0.") != std::string::npos) out.insert(out.begin(), '-');
  return out;
}

}  // namespace raglog
