#include "listchurn/archive.hpp"

#include <algorithm>
#include <cstdlib>

#include "listchurn/errors.hpp"

namespace listchurn {

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_lower(char c) { return c >= 'a' && c <= 'z'; }

// Locates "/web/<digits>[modifier]/" in `url`. Returns the offset of the
// leading slash and sets `payload` to the first character after the segment.
std::optional<std::size_t> find_rewrite_segment(std::string_view url, std::size_t& digits_begin,
                                                std::size_t& digits_end, std::size_t& payload) {
  std::size_t search = 0;
  while (true) {
    auto at = url.find("/web/", search);
    if (at == std::string_view::npos) return std::nullopt;
    std::size_t i = at + 5;
    std::size_t d0 = i;
    while (i < url.size() && is_digit(url[i])) ++i;
    std::size_t d1 = i;
    while (i < url.size() && (is_lower(url[i]) || url[i] == '_')) ++i;
    if (d1 > d0 && d1 - d0 <= 14 && i < url.size() && url[i] == '/') {
      digits_begin = d0;
      digits_end = d1;
      payload = i + 1;
      return at;
    }
    search = at + 1;
  }
}

// True when `prefix` is empty or an origin: "scheme://host" or "//host".
bool is_origin(std::string_view prefix) {
  if (prefix.empty()) return true;
  auto sep = prefix.find("//");
  if (sep == std::string_view::npos) return false;
  std::string_view scheme = prefix.substr(0, sep);
  if (!scheme.empty() && scheme.back() != ':') return false;
  std::string_view host = prefix.substr(sep + 2);
  return !host.empty() && host.find('/') == std::string_view::npos;
}

std::string_view trim(std::string_view s) {
  constexpr std::string_view kWs = " \t\r\n";
  auto first = s.find_first_not_of(kWs);
  if (first == std::string_view::npos) return {};
  return s.substr(first, s.find_last_not_of(kWs) - first + 1);
}

bool rel_names_memento(std::string_view rel) {
  std::size_t pos = 0;
  while (pos < rel.size()) {
    auto end = rel.find(' ', pos);
    if (rel.substr(pos, end - pos) == "memento") return true;
    if (end == std::string_view::npos) break;
    pos = end + 1;
  }
  return false;
}

}  // namespace

TargetDate TargetDate::make(int year, int quarter, int interval_months) {
  if (interval_months <= 0 || 12 % interval_months != 0) {
    throw PreconditionError("interval_months must divide 12");
  }
  if (quarter < 1 || quarter > 12 / interval_months) {
    throw PreconditionError("interval index out of range");
  }
  TargetDate t;
  t.year = year;
  t.quarter = quarter;
  t.interval_months = interval_months;
  t.nominal_date = make_date(year, static_cast<unsigned>(1 + (quarter - 1) * interval_months), 1);
  return t;
}

bool TargetDate::contains(Timestamp t) const {
  return t >= Timestamp{nominal_date} && t < Timestamp{interval_end()};
}

std::vector<TargetDate> schedule_intervals(int from_year, int to_year, int interval_months) {
  if (from_year > to_year) throw PreconditionError("from_year must not exceed to_year");
  if (interval_months <= 0 || 12 % interval_months != 0) {
    throw PreconditionError("interval_months must divide 12");
  }
  std::vector<TargetDate> out;
  const int per_year = 12 / interval_months;
  out.reserve(static_cast<std::size_t>((to_year - from_year + 1) * per_year));
  for (int y = from_year; y <= to_year; ++y) {
    for (int q = 1; q <= per_year; ++q) out.push_back(TargetDate::make(y, q, interval_months));
  }
  return out;
}

std::string_view to_string(SkipReason::Kind kind) {
  switch (kind) {
    case SkipReason::Kind::kIntervalExhausted:
      return "interval-exhausted";
    case SkipReason::Kind::kNoMemento:
      return "no-memento";
    case SkipReason::Kind::kTransportFailed:
      return "transport-failed";
  }
  return "unknown";
}

std::optional<Timestamp> archive_timestamp_of(std::string_view memento_url) {
  std::size_t d0 = 0, d1 = 0, payload = 0;
  auto at = find_rewrite_segment(memento_url, d0, d1, payload);
  if (!at || d1 - d0 < 4) return std::nullopt;
  try {
    return parse_archive_timestamp(memento_url.substr(d0, d1 - d0));
  } catch (const ParseError&) {
    return std::nullopt;
  }
}

std::string strip_archive_rewrite(std::string_view url) {
  std::size_t d0 = 0, d1 = 0, payload = 0;
  auto at = find_rewrite_segment(url, d0, d1, payload);
  if (!at || !is_origin(url.substr(0, *at))) return std::string(url);
  return std::string(url.substr(payload));
}

std::vector<Memento> parse_timemap(std::string_view text) {
  std::vector<Memento> out;
  std::size_t pos = 0;
  while (true) {
    auto open = text.find('<', pos);
    if (open == std::string_view::npos) break;
    auto close = text.find('>', open);
    if (close == std::string_view::npos) break;
    std::string_view url = trim(text.substr(open + 1, close - open - 1));

    // Parameters run until the next ",<" link separator.
    std::size_t end = close + 1;
    while (true) {
      auto comma = text.find(',', end);
      if (comma == std::string_view::npos) {
        end = text.size();
        break;
      }
      auto next = text.find_first_not_of(" \t\r\n", comma + 1);
      if (next == std::string_view::npos || text[next] == '<') {
        end = comma;
        break;
      }
      end = comma + 1;
    }
    std::string_view params = text.substr(close + 1, end - close - 1);

    std::string rel;
    std::size_t p = 0;
    while (p < params.size()) {
      auto semi = params.find(';', p);
      std::string_view param = trim(params.substr(p, semi - p));
      if (param.starts_with("rel=")) {
        std::string_view v = trim(param.substr(4));
        if (v.size() >= 2 && v.front() == '"' && v.back() == '"') v = v.substr(1, v.size() - 2);
        rel = std::string(v);
      }
      if (semi == std::string_view::npos) break;
      p = semi + 1;
    }
    if (rel_names_memento(rel)) {
      if (auto ts = archive_timestamp_of(url)) out.push_back({std::string(url), *ts});
    }
    pos = end;
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Memento& a, const Memento& b) { return a.timestamp < b.timestamp; });
  out.erase(std::unique(out.begin(), out.end(),
                        [](const Memento& a, const Memento& b) { return a.url == b.url; }),
            out.end());
  return out;
}

namespace {

std::chrono::seconds distance(const Memento& m, const TargetDate& target) {
  auto d = m.timestamp - Timestamp{target.nominal_date};
  return d < d.zero() ? -d : d;
}

bool nearer(const Memento& a, const Memento& b, const TargetDate& target) {
  auto da = distance(a, target), db = distance(b, target);
  if (da != db) return da < db;
  return a.timestamp < b.timestamp;
}

MementoRef make_ref(const std::string& original_url, const Memento& m, const TargetDate& target) {
  MementoRef ref;
  ref.original_url = original_url;
  ref.memento_url = m.url;
  ref.memento_timestamp = m.timestamp;
  ref.delta_days = days_between(target.nominal_date, date_of(m.timestamp));
  ref.over_gap = std::labs(ref.delta_days) > kOverGapDays;
  return ref;
}

}  // namespace

MementoRef nearest_memento(const std::string& original_url, const std::vector<Memento>& mementos,
                           const TargetDate& target) {
  if (mementos.empty()) throw NoMemento("no captures of " + original_url);
  auto best = std::min_element(mementos.begin(), mementos.end(),
                               [&](const Memento& a, const Memento& b) {
                                 return nearer(a, b, target);
                               });
  return make_ref(original_url, *best, target);
}

std::vector<Memento> interval_candidates(const std::vector<Memento>& mementos,
                                         const TargetDate& target) {
  std::vector<Memento> out;
  std::copy_if(mementos.begin(), mementos.end(), std::back_inserter(out),
               [&](const Memento& m) { return target.contains(m.timestamp); });
  std::stable_sort(out.begin(), out.end(),
                   [&](const Memento& a, const Memento& b) { return nearer(a, b, target); });
  return out;
}

bool is_redirect_status(int status) {
  return status == 301 || status == 302 || status == 303 || status == 307 || status == 308;
}

ArchiveClient::ArchiveClient(Transport& transport, std::string archive_base)
    : transport_(transport), base_(std::move(archive_base)) {
  while (!base_.empty() && base_.back() == '/') base_.pop_back();
}

std::string ArchiveClient::timemap_url(const std::string& original_url) const {
  return base_ + "/web/timemap/link/" + original_url;
}

std::vector<Memento> ArchiveClient::timemap(const std::string& original_url) {
  {
    std::lock_guard lock(mutex_);
    if (auto it = timemaps_.find(original_url); it != timemaps_.end()) {
      if (it->second.empty()) throw NoMemento("no captures of " + original_url);
      return it->second;
    }
  }
  HttpResponse response = transport_.get(timemap_url(original_url));
  std::vector<Memento> mementos;
  if (response.status == 200) {
    mementos = parse_timemap(response.body);
  } else if (response.status != 404) {
    throw ArchiveUnreachable("timemap for " + original_url + " returned status " +
                             std::to_string(response.status));
  }
  {
    std::lock_guard lock(mutex_);
    timemaps_.emplace(original_url, mementos);
  }
  if (mementos.empty()) throw NoMemento("no captures of " + original_url);
  return mementos;
}

MementoRef ArchiveClient::resolve_memento(const std::string& original_url,
                                          const TargetDate& target) {
  return nearest_memento(original_url, timemap(original_url), target);
}

FetchResult ArchiveClient::fetch_snapshot(const MementoRef& ref, const TargetDate& target,
                                          const RetryPolicy& policy) {
  if (policy.max_tries_per_interval < 1) {
    throw PreconditionError("max_tries_per_interval must be at least 1");
  }
  std::vector<Memento> candidates;
  try {
    candidates = interval_candidates(timemap(ref.original_url), target);
  } catch (const NoMemento& e) {
    return SkipReason{SkipReason::Kind::kNoMemento, 0, e.what()};
  } catch (const ArchiveUnreachable& e) {
    return SkipReason{SkipReason::Kind::kTransportFailed, 0, e.what()};
  }
  // The resolved memento goes first when it lies inside the interval.
  auto it = std::find_if(candidates.begin(), candidates.end(),
                         [&](const Memento& m) { return m.url == ref.memento_url; });
  if (it != candidates.end()) std::rotate(candidates.begin(), it, it + 1);
  if (candidates.empty()) {
    return SkipReason{SkipReason::Kind::kNoMemento, 0, "no captures inside the interval"};
  }

  int attempts = 0;
  int transport_failures = 0;
  std::string last_detail;
  for (const Memento& m : candidates) {
    if (attempts >= policy.max_tries_per_interval) break;
    ++attempts;
    HttpResponse response;
    try {
      response = transport_.get(m.url);
    } catch (const ArchiveUnreachable& e) {
      ++transport_failures;
      last_detail = e.what();
      continue;
    }
    if (is_redirect_status(response.status)) {
      last_detail = "redirect " + std::to_string(response.status) + " at " + m.url;
      continue;
    }
    if (response.status >= 200 && response.status < 300 && !response.body.empty()) {
      FetchedSnapshot snap;
      snap.memento = make_ref(ref.original_url, m, target);
      snap.body = std::move(response.body);
      snap.fetch_status = response.status;
      snap.attempts = attempts;
      return snap;
    }
    last_detail = "status " + std::to_string(response.status) + " at " + m.url;
  }
  auto kind = transport_failures == attempts ? SkipReason::Kind::kTransportFailed
                                             : SkipReason::Kind::kIntervalExhausted;
  return SkipReason{kind, attempts, last_detail};
}

FetchResult ArchiveClient::capture(const std::string& original_url, const TargetDate& target,
                                   const RetryPolicy& policy) {
  MementoRef ref;
  try {
    ref = resolve_memento(original_url, target);
  } catch (const NoMemento& e) {
    return SkipReason{SkipReason::Kind::kNoMemento, 0, e.what()};
  } catch (const ArchiveUnreachable& e) {
    return SkipReason{SkipReason::Kind::kTransportFailed, 0, e.what()};
  }
  return fetch_snapshot(ref, target, policy);
}

}  // namespace listchurn
