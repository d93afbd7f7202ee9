#include "patchgate/errors.hpp"

#include <fmt/format.h>

namespace patchgate {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
    case ErrorKind::kUndefinedStatistic: return "UndefinedStatistic";
    case ErrorKind::kNotFound: return "NotFound";
    case ErrorKind::kParse: return "ParseError";
    case ErrorKind::kValidation: return "ValidationError";
    case ErrorKind::kEmptyCorpus: return "EmptyCorpus";
    case ErrorKind::kTemplate: return "TemplateError";
    case ErrorKind::kCassetteMiss: return "CassetteMiss";
    case ErrorKind::kCassetteConflict: return "CassetteConflict";
    case ErrorKind::kProvider: return "ProviderError";
    case ErrorKind::kExecutionEnvironment: return "ExecutionEnvironmentError";
    case ErrorKind::kProtocol: return "ProtocolError";
    case ErrorKind::kConfig: return "ConfigError";
    case ErrorKind::kIO: return "IOError";
  }
  return "Error";
}

bool Error::is_infrastructure() const noexcept {
  switch (kind_) {
    case ErrorKind::kCassetteMiss:
    case ErrorKind::kCassetteConflict:
    case ErrorKind::kProvider:
    case ErrorKind::kExecutionEnvironment:
    case ErrorKind::kProtocol:
    case ErrorKind::kIO:
    case ErrorKind::kNotFound:
      return true;
    default:
      return false;
  }
}

CassetteMissError::CassetteMissError(std::string key, std::string problem, double temperature,
                                     int trial_index)
    : Error(ErrorKind::kCassetteMiss,
            fmt::format("CassetteMiss: no recorded response for problem '{}' at temperature {} "
                        "trial {} (key {})",
                        problem, temperature, trial_index, key)),
      key_(std::move(key)),
      problem_(std::move(problem)),
      temperature_(temperature),
      trial_index_(trial_index) {}

}  // namespace patchgate
