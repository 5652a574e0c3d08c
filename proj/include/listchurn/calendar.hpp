#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace listchurn {

using Date = std::chrono::sys_days;
using Timestamp = std::chrono::sys_seconds;

// "YYYY-MM-DD"
Date parse_iso_date(std::string_view text);
std::string format_iso_date(Date d);

// "YYYY-MM-DDTHH:MM:SSZ"; a bare date is accepted as midnight UTC.
Timestamp parse_iso_timestamp(std::string_view text);
std::string format_iso_timestamp(Timestamp t);

// Archive path timestamps: 1 to 14 digits, "YYYY[MM[DD[hh[mm[ss]]]]]",
// missing trailing fields default to their minimum.
Timestamp parse_archive_timestamp(std::string_view digits);
std::string format_archive_timestamp(Timestamp t);

Date make_date(int year, unsigned month, unsigned day);
Date date_of(Timestamp t);
int year_of(Date d);
int year_of(Timestamp t);

// Whole days from `from` to `to` (positive when `to` is later).
long days_between(Date from, Date to);

// Adds calendar months to the first day of a month.
Date add_months(Date first_of_month, int months);

}  // namespace listchurn
