#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "listchurn/archive.hpp"
#include "listchurn/domain.hpp"

namespace listchurn {

// Hosts whose scripts are archive artifacts (toolbar, playback bundles).
// A source is dropped when its host equals one of these or is a subdomain.
inline const std::vector<std::string>& default_archive_hosts() {
  static const std::vector<std::string> hosts = {"archive.org"};
  return hosts;
}

// `src` of every external script element in document order, with archive
// rewrite prefixes removed. Scripts inside comments, noscript, and the
// archive toolbar block are ignored.
std::vector<std::string> extract_script_sources(
    std::string_view html,
    const std::vector<std::string>& archive_hosts = default_archive_hosts());

struct PageCapture {
  RegistrableDomain site;
  TargetDate target;
  MementoRef memento;
  std::string body;
  int fetch_status = 200;
};

struct PageObservation {
  RegistrableDomain site;
  int year = 0;
  int quarter = 0;
  Timestamp memento_timestamp;
  DomainSet third_party_domains;
};

// Script sources reduced to registrable domains, minus the site itself.
// Host-less, malformed, IP-literal and underspecified sources are skipped.
PageObservation observe_page(
    const PageCapture& capture, const SuffixTable& table, PslMode mode = PslMode::kSuffixAware,
    const std::vector<std::string>& archive_hosts = default_archive_hosts());

enum class Scope { kSite, kCountry, kGlobal, kBlacklistDetections };

std::string_view to_string(Scope scope);

struct YearlyDomainSet {
  Scope scope = Scope::kSite;
  std::string scope_id;
  int year = 0;
  DomainSet domains;
};

// Union of the observations' domain sets. Throws EmptyYear when there are
// none, PreconditionError when an observation belongs to another year.
YearlyDomainSet yearly_union(std::span<const PageObservation> observations, Scope scope,
                             std::string scope_id, int year);

}  // namespace listchurn
