#include "listchurn/calendar.hpp"

#include <charconv>
#include <cstdio>

#include "listchurn/errors.hpp"

namespace listchurn {

namespace {

int parse_digits(std::string_view text, std::size_t pos, std::size_t len,
                 std::string_view whole) {
  if (pos + len > text.size()) {
    throw ParseError("truncated date/time: " + std::string(whole));
  }
  int value = 0;
  const char* first = text.data() + pos;
  const char* last = first + len;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) {
    throw ParseError("bad digits in date/time: " + std::string(whole));
  }
  return value;
}

Date checked_date(int y, int m, int d, std::string_view whole) {
  std::chrono::year_month_day ymd{std::chrono::year{y},
                                  std::chrono::month{static_cast<unsigned>(m)},
                                  std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) {
    throw ParseError("invalid calendar date: " + std::string(whole));
  }
  return Date{ymd};
}

Timestamp checked_time(Date day, int hh, int mm, int ss, std::string_view whole) {
  if (hh > 23 || mm > 59 || ss > 60) {
    throw ParseError("invalid time of day: " + std::string(whole));
  }
  return Timestamp{day} + std::chrono::hours{hh} + std::chrono::minutes{mm} +
         std::chrono::seconds{ss};
}

}  // namespace

Date make_date(int year, unsigned month, unsigned day) {
  std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                                  std::chrono::day{day}};
  if (!ymd.ok()) {
    throw PreconditionError("invalid calendar date");
  }
  return Date{ymd};
}

Date parse_iso_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    throw ParseError("expected YYYY-MM-DD: " + std::string(text));
  }
  return checked_date(parse_digits(text, 0, 4, text), parse_digits(text, 5, 2, text),
                      parse_digits(text, 8, 2, text), text);
}

std::string format_iso_date(Date d) {
  std::chrono::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

Timestamp parse_iso_timestamp(std::string_view text) {
  if (text.size() == 10) {
    return Timestamp{parse_iso_date(text)};
  }
  if (text.size() != 20 || text[10] != 'T' || text[13] != ':' || text[16] != ':' ||
      text[19] != 'Z') {
    throw ParseError("expected YYYY-MM-DDTHH:MM:SSZ: " + std::string(text));
  }
  Date day = parse_iso_date(text.substr(0, 10));
  return checked_time(day, parse_digits(text, 11, 2, text), parse_digits(text, 14, 2, text),
                      parse_digits(text, 17, 2, text), text);
}

std::string format_iso_timestamp(Timestamp t) {
  Date day = std::chrono::floor<std::chrono::days>(t);
  std::chrono::hh_mm_ss hms{t - day};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%sT%02d:%02d:%02dZ", format_iso_date(day).c_str(),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

Timestamp parse_archive_timestamp(std::string_view digits) {
  if (digits.empty() || digits.size() > 14 || digits.size() < 4) {
    throw ParseError("archive timestamp must have 4..14 digits: " + std::string(digits));
  }
  for (char c : digits) {
    if (c < '0' || c > '9') {
      throw ParseError("archive timestamp must be numeric: " + std::string(digits));
    }
  }
  std::string padded(digits);
  // Pad month/day with 01 and time fields with 00.
  static constexpr std::string_view kDefaults = "00000101000000";
  for (std::size_t i = padded.size(); i < 14; ++i) {
    padded.push_back(kDefaults[i]);
  }
  std::string_view p = padded;
  Date day = checked_date(parse_digits(p, 0, 4, digits), parse_digits(p, 4, 2, digits),
                          parse_digits(p, 6, 2, digits), digits);
  return checked_time(day, parse_digits(p, 8, 2, digits), parse_digits(p, 10, 2, digits),
                      parse_digits(p, 12, 2, digits), digits);
}

std::string format_archive_timestamp(Timestamp t) {
  std::string iso = format_iso_timestamp(t);
  std::string out;
  for (char c : iso) {
    if (c >= '0' && c <= '9') out.push_back(c);
  }
  return out;
}

Date date_of(Timestamp t) { return std::chrono::floor<std::chrono::days>(t); }

int year_of(Date d) { return static_cast<int>(std::chrono::year_month_day{d}.year()); }

int year_of(Timestamp t) { return year_of(date_of(t)); }

long days_between(Date from, Date to) {
  return static_cast<long>((to - from).count());
}

Date add_months(Date first_of_month, int months) {
  std::chrono::year_month_day ymd{first_of_month};
  auto ym = std::chrono::year_month{ymd.year(), ymd.month()} + std::chrono::months{months};
  return Date{ym / std::chrono::day{1}};
}

}  // namespace listchurn
