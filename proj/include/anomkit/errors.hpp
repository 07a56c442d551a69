#pragma once

#include <stdexcept>
#include <string>

namespace anomkit {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define ANOMKIT_DEFINE_ERROR(NAME)              \
  class NAME : public Error {                   \
   public:                                      \
    using Error::Error;                         \
  }

ANOMKIT_DEFINE_ERROR(IoError);
ANOMKIT_DEFINE_ERROR(ConfigError);
ANOMKIT_DEFINE_ERROR(MissingColumnError);
ANOMKIT_DEFINE_ERROR(DuplicateIdError);
ANOMKIT_DEFINE_ERROR(EmptyResultError);
ANOMKIT_DEFINE_ERROR(NonPositiveHeightError);
ANOMKIT_DEFINE_ERROR(SchemaMismatchError);
ANOMKIT_DEFINE_ERROR(KTooLargeError);
ANOMKIT_DEFINE_ERROR(SampleTooSmallError);
ANOMKIT_DEFINE_ERROR(TooFewClustersError);
ANOMKIT_DEFINE_ERROR(CurveTooShortError);
ANOMKIT_DEFINE_ERROR(NoValidConfigError);
ANOMKIT_DEFINE_ERROR(UnknownIdError);
ANOMKIT_DEFINE_ERROR(DivergedLossError);
ANOMKIT_DEFINE_ERROR(TimeoutError);

#undef ANOMKIT_DEFINE_ERROR

}  // namespace anomkit
