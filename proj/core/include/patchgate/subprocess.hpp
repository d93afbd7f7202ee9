#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace patchgate {

/// A child process with stdin/stdout pipes; stderr goes to /dev/null.
/// The child leads its own process group and the whole group is killed on
/// destruction if it is still running.
class Subprocess {
 public:
  /// Throws ExecutionEnvironmentError if the program cannot be launched.
  Subprocess(const std::vector<std::string>& argv,
             const std::vector<std::pair<std::string, std::string>>& extra_env = {});
  ~Subprocess();

  Subprocess(const Subprocess&) = delete;
  Subprocess& operator=(const Subprocess&) = delete;

  /// Writes all of `data` to the child's stdin and closes it. Returns false
  /// if the child closed its end first.
  bool write_and_close_stdin(std::string_view data);

  enum class ReadStatus { kLine, kTimeout, kEof, kTooLong };

  struct ReadResult {
    ReadStatus status;
    std::string line;  // without the trailing LF
  };

  /// Reads one LF-terminated line, waiting at most `timeout`. Lines longer
  /// than `max_bytes` yield kTooLong (the remainder is not consumed).
  ReadResult read_line(std::chrono::milliseconds timeout, std::size_t max_bytes);

  /// SIGKILL to the process group, then reap.
  void kill();

  /// Waits for exit and returns the exit status (-signal when killed).
  int wait();

 private:
  int pid_ = -1;
  int stdin_fd_ = -1;
  int stdout_fd_ = -1;
  bool reaped_ = false;
  int exit_status_ = 0;
  std::string buffer_;
};

}  // namespace patchgate
