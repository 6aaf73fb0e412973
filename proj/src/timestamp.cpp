#include "metaphor/timestamp.hpp"

#include <array>
#include <charconv>
#include <cstdio>

#include "metaphor/text.hpp"

namespace metaphor {
namespace {

using namespace std::chrono;

bool read_int(std::string_view s, std::size_t pos, std::size_t width, int& out) {
  if (pos + width > s.size()) return false;
  for (std::size_t i = pos; i < pos + width; ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
  }
  auto res = std::from_chars(s.data() + pos, s.data() + pos + width, out);
  return res.ec == std::errc();
}

std::optional<TimePoint> build(int y, int mo, int d, int h, int mi, int sec) {
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h < 0 || h > 23 || mi < 0 || mi > 59 || sec < 0 || sec > 60) return std::nullopt;
  return sys_days{ymd} + hours{h} + minutes{mi} + seconds{sec};
}

std::optional<TimePoint> parse_iso(std::string_view s) {
  int y = 0, mo = 0, d = 1, h = 0, mi = 0, sec = 0;
  if (!read_int(s, 0, 4, y) || s.size() < 7 || s[4] != '-' || !read_int(s, 5, 2, mo)) return std::nullopt;
  if (s.size() == 7) return build(y, mo, 1, 0, 0, 0);
  if (s.size() < 10 || s[7] != '-' || !read_int(s, 8, 2, d)) return std::nullopt;
  if (s.size() == 10) return build(y, mo, d, 0, 0, 0);
  if (s[10] != 'T' && s[10] != ' ') return std::nullopt;
  if (s.size() < 19 || !read_int(s, 11, 2, h) || s[13] != ':' || !read_int(s, 14, 2, mi) || s[16] != ':' ||
      !read_int(s, 17, 2, sec)) {
    return std::nullopt;
  }
  std::size_t pos = 19;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
  }
  int offset_minutes = 0;
  if (pos == s.size()) {
    // naive times are taken as UTC
  } else if (s[pos] == 'Z' && pos + 1 == s.size()) {
  } else if ((s[pos] == '+' || s[pos] == '-') && s.size() - pos == 6 && s[pos + 3] == ':') {
    int oh = 0, om = 0;
    if (!read_int(s, pos + 1, 2, oh) || !read_int(s, pos + 4, 2, om)) return std::nullopt;
    offset_minutes = (s[pos] == '-' ? -1 : 1) * (oh * 60 + om);
  } else {
    return std::nullopt;
  }
  auto t = build(y, mo, d, h, mi, sec);
  if (!t) return std::nullopt;
  return *t - minutes{offset_minutes};
}

// "Thu May 03 12:34:56 +0000 2018"
std::optional<TimePoint> parse_legacy(std::string_view s) {
  static constexpr std::array<std::string_view, 12> kMonths = {"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                                               "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
  auto parts = split_whitespace(s);
  if (parts.size() != 6) return std::nullopt;
  int mo = 0;
  for (std::size_t i = 0; i < kMonths.size(); ++i) {
    if (parts[1] == kMonths[i]) mo = static_cast<int>(i) + 1;
  }
  int d = 0, y = 0, h = 0, mi = 0, sec = 0;
  if (mo == 0 || !read_int(parts[2], 0, parts[2].size(), d) || parts[3].size() != 8 ||
      !read_int(parts[3], 0, 2, h) || !read_int(parts[3], 3, 2, mi) || !read_int(parts[3], 6, 2, sec) ||
      parts[4].size() != 5 || !read_int(parts[5], 0, parts[5].size(), y)) {
    return std::nullopt;
  }
  int oh = 0, om = 0;
  if ((parts[4][0] != '+' && parts[4][0] != '-') || !read_int(parts[4], 1, 2, oh) || !read_int(parts[4], 3, 2, om)) {
    return std::nullopt;
  }
  auto t = build(y, mo, d, h, mi, sec);
  if (!t) return std::nullopt;
  return *t - minutes{(parts[4][0] == '-' ? -1 : 1) * (oh * 60 + om)};
}

}  // namespace

std::optional<TimePoint> parse_timestamp(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s[0] >= '0' && s[0] <= '9') return parse_iso(s);
  return parse_legacy(s);
}

std::string format_timestamp(TimePoint t) {
  const auto day_point = floor<days>(t);
  const year_month_day ymd{day_point};
  const hh_mm_ss hms{t - day_point};
  char buf[96];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02ldZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<long>(hms.hours().count()), static_cast<long>(hms.minutes().count()),
                static_cast<long>(hms.seconds().count()));
  return buf;
}

YearMonth year_month_of(TimePoint t) {
  const year_month_day ymd{floor<days>(t)};
  return {static_cast<int>(ymd.year()), static_cast<int>(static_cast<unsigned>(ymd.month()))};
}

}  // namespace metaphor
