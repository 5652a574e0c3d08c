#include "listchurn/transport.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "listchurn/archive.hpp"
#include "listchurn/errors.hpp"

#include "httplib.h"

namespace listchurn {

namespace fs = std::filesystem;

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(length * 2);
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

HttpTransport::HttpTransport(std::chrono::seconds timeout, std::string user_agent)
    : timeout_(timeout), user_agent_(std::move(user_agent)) {}

HttpResponse HttpTransport::get(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ArchiveUnreachable("not an absolute URL: " + url);
  auto path_start = url.find('/', scheme_end + 3);
  std::string origin = url.substr(0, path_start);
  std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

  httplib::Client client(origin);
  client.set_follow_location(false);
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  client.set_default_headers({{"User-Agent", user_agent_}});

  auto result = client.Get(path);
  if (!result) {
    throw ArchiveUnreachable("GET " + url + " failed: " + httplib::to_string(result.error()));
  }
  HttpResponse response;
  response.status = result->status;
  response.body = std::move(result->body);
  if (result->has_header("Location")) response.location = result->get_header_value("Location");
  return response;
}

PacedTransport::PacedTransport(Transport& inner, std::chrono::milliseconds min_gap)
    : inner_(inner), min_gap_(min_gap) {}

HttpResponse PacedTransport::get(const std::string& url) {
  std::chrono::steady_clock::time_point slot;
  {
    std::lock_guard lock(mutex_);
    auto now = std::chrono::steady_clock::now();
    slot = next_slot_ && *next_slot_ > now ? *next_slot_ : now;
    next_slot_ = slot + min_gap_;
  }
  std::this_thread::sleep_until(slot);
  return inner_.get(url);
}

CachingTransport::CachingTransport(fs::path dir, Transport* upstream)
    : dir_(std::move(dir)), upstream_(upstream) {
  fs::create_directories(dir_ / "objects");
  load_index();
}

void CachingTransport::load_index() {
  std::ifstream in(dir_ / "index.jsonl");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      Entry e{j.at("status").get<int>(), j.value("location", ""),
              j.at("digest").get<std::string>()};
      index_.insert_or_assign(j.at("url").get<std::string>(), std::move(e));
    } catch (const nlohmann::json::exception& ex) {
      throw ParseError("cache index line " + std::to_string(line_no) + ": " + ex.what());
    }
  }
}

fs::path CachingTransport::object_path(const std::string& digest) const {
  return dir_ / "objects" / digest.substr(0, 2) / digest.substr(2);
}

void CachingTransport::record(const std::string& url, const HttpResponse& response) {
  // Caller holds mutex_.
  Entry e{response.status, response.location, sha256_hex(response.body)};
  fs::path object = object_path(e.digest);
  if (!fs::exists(object)) {
    fs::create_directories(object.parent_path());
    fs::path tmp = object;
    tmp += ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary);
      out.write(response.body.data(), static_cast<std::streamsize>(response.body.size()));
    }
    fs::rename(tmp, object);
  }
  nlohmann::json j = {{"url", url},
                      {"timestamp", ""},
                      {"status", e.status},
                      {"location", e.location},
                      {"digest", e.digest}};
  if (auto ts = archive_timestamp_of(url)) j["timestamp"] = format_archive_timestamp(*ts);
  std::ofstream index(dir_ / "index.jsonl", std::ios::app);
  index << j.dump() << '\n';
  index_.insert_or_assign(url, std::move(e));
}

HttpResponse CachingTransport::get(const std::string& url) {
  {
    std::lock_guard lock(mutex_);
    if (auto it = index_.find(url); it != index_.end()) {
      HttpResponse response;
      response.status = it->second.status;
      response.location = it->second.location;
      std::ifstream in(object_path(it->second.digest), std::ios::binary);
      if (!in) throw ParseError("cache object missing for " + url);
      std::ostringstream buf;
      buf << in.rdbuf();
      response.body = buf.str();
      return response;
    }
    if (upstream_ == nullptr) throw ArchiveUnreachable("offline cache miss: " + url);
    ++upstream_requests_;
  }
  HttpResponse response = upstream_->get(url);
  std::lock_guard lock(mutex_);
  if (!index_.count(url)) record(url, response);
  return response;
}

void CachingTransport::put(const std::string& url, const HttpResponse& response) {
  std::lock_guard lock(mutex_);
  record(url, response);
}

bool CachingTransport::contains(const std::string& url) const {
  std::lock_guard lock(mutex_);
  return index_.count(url) > 0;
}

std::size_t CachingTransport::size() const {
  std::lock_guard lock(mutex_);
  return index_.size();
}

std::size_t CachingTransport::upstream_requests() const {
  std::lock_guard lock(mutex_);
  return upstream_requests_;
}

}  // namespace listchurn
