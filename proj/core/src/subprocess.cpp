#include "patchgate/subprocess.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <map>
#include <mutex>

#include <fmt/format.h>

#include "patchgate/errors.hpp"

extern char** environ;

namespace patchgate {

namespace {

void ignore_sigpipe_once() {
  static std::once_flag flag;
  std::call_once(flag, [] { ::signal(SIGPIPE, SIG_IGN); });
}

void close_fd(int& fd) {
  if (fd >= 0) {
    ::close(fd);
    fd = -1;
  }
}

class SpawnResources {
 public:
  SpawnResources() {
    posix_spawn_file_actions_init(&actions);
    posix_spawnattr_init(&attr);
  }
  ~SpawnResources() {
    posix_spawn_file_actions_destroy(&actions);
    posix_spawnattr_destroy(&attr);
  }
  posix_spawn_file_actions_t actions;
  posix_spawnattr_t attr;
};

}  // namespace

Subprocess::Subprocess(const std::vector<std::string>& argv,
                       const std::vector<std::pair<std::string, std::string>>& extra_env) {
  if (argv.empty()) throw ExecutionEnvironmentError("empty command line");
  ignore_sigpipe_once();

  int in_pipe[2];
  int out_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) != 0) {
    throw ExecutionEnvironmentError(fmt::format("pipe: {}", std::strerror(errno)));
  }
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw ExecutionEnvironmentError(fmt::format("pipe: {}", std::strerror(errno)));
  }

  SpawnResources res;
  posix_spawn_file_actions_adddup2(&res.actions, in_pipe[0], STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&res.actions, out_pipe[1], STDOUT_FILENO);
  posix_spawn_file_actions_addopen(&res.actions, STDERR_FILENO, "/dev/null", O_WRONLY, 0);

  sigset_t defaults;
  sigemptyset(&defaults);
  sigaddset(&defaults, SIGPIPE);
  sigset_t empty;
  sigemptyset(&empty);
  posix_spawnattr_setsigdefault(&res.attr, &defaults);
  posix_spawnattr_setsigmask(&res.attr, &empty);
  posix_spawnattr_setpgroup(&res.attr, 0);
  posix_spawnattr_setflags(&res.attr, POSIX_SPAWN_SETPGROUP | POSIX_SPAWN_SETSIGDEF | POSIX_SPAWN_SETSIGMASK);

  std::map<std::string, std::string> env;
  for (char** e = environ; e != nullptr && *e != nullptr; ++e) {
    std::string_view kv(*e);
    const auto eq = kv.find('=');
    if (eq == std::string_view::npos) continue;
    env.emplace(std::string(kv.substr(0, eq)), std::string(kv.substr(eq + 1)));
  }
  for (const auto& [k, v] : extra_env) env[k] = v;
  std::vector<std::string> env_strings;
  env_strings.reserve(env.size());
  for (const auto& [k, v] : env) env_strings.push_back(k + "=" + v);
  std::vector<char*> envp;
  for (auto& s : env_strings) envp.push_back(s.data());
  envp.push_back(nullptr);

  std::vector<std::string> args = argv;
  std::vector<char*> argp;
  for (auto& a : args) argp.push_back(a.data());
  argp.push_back(nullptr);

  const int rc = ::posix_spawnp(&pid_, argp[0], &res.actions, &res.attr, argp.data(), envp.data());
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  if (rc != 0) {
    ::close(in_pipe[1]);
    ::close(out_pipe[0]);
    pid_ = -1;
    throw ExecutionEnvironmentError(fmt::format("cannot launch '{}': {}", argv[0], std::strerror(rc)));
  }
  stdin_fd_ = in_pipe[1];
  stdout_fd_ = out_pipe[0];
}

Subprocess::~Subprocess() {
  close_fd(stdin_fd_);
  if (pid_ > 0 && !reaped_) kill();
  close_fd(stdout_fd_);
}

bool Subprocess::write_and_close_stdin(std::string_view data) {
  bool ok = true;
  while (!data.empty()) {
    const ssize_t n = ::write(stdin_fd_, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      ok = false;  // EPIPE: the child is gone
      break;
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
  close_fd(stdin_fd_);
  return ok;
}

Subprocess::ReadResult Subprocess::read_line(std::chrono::milliseconds timeout, std::size_t max_bytes) {
  using Clock = std::chrono::steady_clock;
  const auto deadline = Clock::now() + timeout;
  while (true) {
    if (const auto nl = buffer_.find('\n'); nl != std::string::npos) {
      if (nl > max_bytes) return {ReadStatus::kTooLong, {}};
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return {ReadStatus::kLine, std::move(line)};
    }
    if (buffer_.size() > max_bytes) return {ReadStatus::kTooLong, {}};
    if (stdout_fd_ < 0) return {ReadStatus::kEof, {}};

    const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
    if (remaining.count() <= 0) return {ReadStatus::kTimeout, {}};
    pollfd pfd{stdout_fd_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(remaining.count()));
    if (ready < 0) {
      if (errno == EINTR) continue;
      throw ExecutionEnvironmentError(fmt::format("poll: {}", std::strerror(errno)));
    }
    if (ready == 0) return {ReadStatus::kTimeout, {}};

    char chunk[8192];
    const ssize_t n = ::read(stdout_fd_, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      throw ExecutionEnvironmentError(fmt::format("read: {}", std::strerror(errno)));
    }
    if (n == 0) {
      close_fd(stdout_fd_);
      if (buffer_.empty()) return {ReadStatus::kEof, {}};
      // Unterminated final line.
      std::string line = std::move(buffer_);
      buffer_.clear();
      if (line.size() > max_bytes) return {ReadStatus::kTooLong, {}};
      return {ReadStatus::kLine, std::move(line)};
    }
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

void Subprocess::kill() {
  if (pid_ <= 0 || reaped_) return;
  ::kill(-pid_, SIGKILL);
  ::kill(pid_, SIGKILL);
  wait();
}

int Subprocess::wait() {
  if (pid_ <= 0) return -1;
  if (reaped_) return exit_status_;
  close_fd(stdin_fd_);
  int status = 0;
  while (::waitpid(pid_, &status, 0) < 0) {
    if (errno != EINTR) {
      reaped_ = true;
      exit_status_ = -1;
      return exit_status_;
    }
  }
  reaped_ = true;
  if (WIFEXITED(status)) {
    exit_status_ = WEXITSTATUS(status);
  } else if (WIFSIGNALED(status)) {
    exit_status_ = -WTERMSIG(status);
  }
  return exit_status_;
}

}  // namespace patchgate
