#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

namespace listchurn {

struct HttpResponse {
  int status = 0;
  std::string body;
  std::string location;  // redirect target, if any
};

// Blocking GET. Implementations throw ArchiveUnreachable for transport
// failures; HTTP error statuses are returned, not thrown.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResponse get(const std::string& url) = 0;
};

// Plain HTTP(S) client. Redirects are returned to the caller, never followed.
class HttpTransport : public Transport {
 public:
  explicit HttpTransport(std::chrono::seconds timeout = std::chrono::seconds{30},
                         std::string user_agent = "listchurn/1.0");
  HttpResponse get(const std::string& url) override;

 private:
  std::chrono::seconds timeout_;
  std::string user_agent_;
};

// Enforces a minimum gap between consecutive upstream requests. Thread-safe:
// concurrent callers are serialized onto distinct time slots.
class PacedTransport : public Transport {
 public:
  PacedTransport(Transport& inner, std::chrono::milliseconds min_gap);
  HttpResponse get(const std::string& url) override;

 private:
  Transport& inner_;
  std::chrono::milliseconds min_gap_;
  std::mutex mutex_;
  std::optional<std::chrono::steady_clock::time_point> next_slot_;
};

// Content-addressed on-disk record of responses:
//   <dir>/index.jsonl          one {"url","timestamp","status","location","digest"} per line
//   <dir>/objects/ab/cdef...   response bodies named by SHA-256
// With no upstream the cache is replay-only and a miss throws
// ArchiveUnreachable.
class CachingTransport : public Transport {
 public:
  CachingTransport(std::filesystem::path dir, Transport* upstream);
  HttpResponse get(const std::string& url) override;

  // Stores a response as if it had been fetched (used to build replay
  // archives).
  void put(const std::string& url, const HttpResponse& response);

  bool contains(const std::string& url) const;
  std::size_t size() const;
  std::size_t upstream_requests() const;

 private:
  struct Entry {
    int status = 0;
    std::string location;
    std::string digest;
  };

  void load_index();
  void record(const std::string& url, const HttpResponse& response);
  std::filesystem::path object_path(const std::string& digest) const;

  std::filesystem::path dir_;
  Transport* upstream_;
  mutable std::mutex mutex_;
  std::map<std::string, Entry> index_;
  std::size_t upstream_requests_ = 0;
};

std::string sha256_hex(std::string_view data);

}  // namespace listchurn
