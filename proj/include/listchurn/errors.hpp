#pragma once

#include <stdexcept>
#include <string>

namespace listchurn {

// Base for every error the library raises. `kind()` is the stable,
// machine-readable name used in CLI error records.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define LISTCHURN_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                          \
   public:                                                             \
    explicit Name(const std::string& message) : Error(#Name, message) {} \
  }

LISTCHURN_DEFINE_ERROR(MalformedUrl);
LISTCHURN_DEFINE_ERROR(InvalidHost);
LISTCHURN_DEFINE_ERROR(UnderspecifiedHost);
LISTCHURN_DEFINE_ERROR(PreconditionError);
LISTCHURN_DEFINE_ERROR(NoMemento);
LISTCHURN_DEFINE_ERROR(ArchiveUnreachable);
LISTCHURN_DEFINE_ERROR(EmptyYear);
LISTCHURN_DEFINE_ERROR(ConflictingRecord);
LISTCHURN_DEFINE_ERROR(UnknownList);
LISTCHURN_DEFINE_ERROR(UnrealizableTarget);
LISTCHURN_DEFINE_ERROR(ConfigError);
LISTCHURN_DEFINE_ERROR(MissingStage);
LISTCHURN_DEFINE_ERROR(ParseError);

#undef LISTCHURN_DEFINE_ERROR

}  // namespace listchurn
