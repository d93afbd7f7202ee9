#pragma once

#include <stdexcept>
#include <string>

namespace patchgate {

// Failure classes surfaced by the library. The CLI maps "infrastructure"
// errors to exit code 2; everything that describes a candidate program's
// behaviour is data (CaseOutcome), never an exception.
enum class ErrorKind {
  kInvalidArgument,
  kUndefinedStatistic,
  kNotFound,
  kParse,
  kValidation,
  kEmptyCorpus,
  kTemplate,
  kCassetteMiss,
  kCassetteConflict,
  kProvider,
  kExecutionEnvironment,
  kProtocol,
  kConfig,
  kIO,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// True for errors that abort a run rather than describe a result.
  bool is_infrastructure() const noexcept;

 private:
  ErrorKind kind_;
};

#define PATCHGATE_DEFINE_ERROR(Name, Kind)                                  \
  class Name : public Error {                                               \
   public:                                                                  \
    explicit Name(const std::string& message) : Error(Kind, message) {}     \
  }

PATCHGATE_DEFINE_ERROR(InvalidArgumentError, ErrorKind::kInvalidArgument);
PATCHGATE_DEFINE_ERROR(UndefinedStatisticError, ErrorKind::kUndefinedStatistic);
PATCHGATE_DEFINE_ERROR(NotFoundError, ErrorKind::kNotFound);
PATCHGATE_DEFINE_ERROR(ParseError, ErrorKind::kParse);
PATCHGATE_DEFINE_ERROR(ValidationError, ErrorKind::kValidation);
PATCHGATE_DEFINE_ERROR(EmptyCorpusError, ErrorKind::kEmptyCorpus);
PATCHGATE_DEFINE_ERROR(TemplateError, ErrorKind::kTemplate);
PATCHGATE_DEFINE_ERROR(CassetteConflictError, ErrorKind::kCassetteConflict);
PATCHGATE_DEFINE_ERROR(ProviderError, ErrorKind::kProvider);
PATCHGATE_DEFINE_ERROR(ExecutionEnvironmentError, ErrorKind::kExecutionEnvironment);
PATCHGATE_DEFINE_ERROR(ProtocolError, ErrorKind::kProtocol);
PATCHGATE_DEFINE_ERROR(ConfigError, ErrorKind::kConfig);
PATCHGATE_DEFINE_ERROR(IOError, ErrorKind::kIO);

#undef PATCHGATE_DEFINE_ERROR

class CassetteMissError : public Error {
 public:
  CassetteMissError(std::string key, std::string problem, double temperature,
                    int trial_index);

  const std::string& key() const noexcept { return key_; }
  const std::string& problem() const noexcept { return problem_; }
  double temperature() const noexcept { return temperature_; }
  int trial_index() const noexcept { return trial_index_; }

 private:
  std::string key_;
  std::string problem_;
  double temperature_;
  int trial_index_;
};

}  // namespace patchgate
