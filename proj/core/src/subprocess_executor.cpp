#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/resource.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>

#include "dio/error.hpp"
#include "dio/executor.hpp"

namespace dio {

namespace {

using Clock = std::chrono::steady_clock;

class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  Fd(Fd&& o) noexcept : fd_(o.release()) {}
  Fd& operator=(Fd&& o) noexcept {
    reset(o.release());
    return *this;
  }
  ~Fd() { reset(); }

  int get() const noexcept { return fd_; }
  int release() noexcept { return std::exchange(fd_, -1); }
  void reset(int fd = -1) noexcept {
    if (fd_ >= 0) ::close(fd_);
    fd_ = fd;
  }
  explicit operator bool() const noexcept { return fd_ >= 0; }

 private:
  int fd_ = -1;
};

struct Pipe {
  Fd read, write;
};

Pipe make_pipe() {
  int fds[2];
  if (::pipe2(fds, O_CLOEXEC) != 0) throw BackendUnavailable(std::string("pipe: ") + std::strerror(errno));
  return {Fd(fds[0]), Fd(fds[1])};
}

void set_nonblocking(int fd) { ::fcntl(fd, F_SETFL, ::fcntl(fd, F_GETFL) | O_NONBLOCK); }

std::vector<CaseOutcome> all(std::size_t n, const CaseOutcome& o) { return std::vector<CaseOutcome>(n, o); }

}  // namespace

SubprocessExecutor::SubprocessExecutor(SubprocessOptions opts) : opts_(std::move(opts)) {
  if (opts_.argv.empty()) throw BackendUnavailable("empty runner command");
}

ExecResult SubprocessExecutor::execute(const ExecJob& job) {
  const auto started = Clock::now();
  const auto request = encode_request(job) + "\n";

  // stdin is a socket so that writes to a dead child fail with EPIPE instead
  // of raising SIGPIPE in the engine.
  int sv[2];
  if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, sv) != 0) {
    throw BackendUnavailable(std::string("socketpair: ") + std::strerror(errno));
  }
  Fd in_parent(sv[0]), in_child(sv[1]);
  auto out = make_pipe();
  auto err = make_pipe();
  auto exec_status = make_pipe();

  std::vector<char*> argv;
  for (const auto& a : opts_.argv) argv.push_back(const_cast<char*>(a.c_str()));
  argv.push_back(nullptr);

  const pid_t pid = ::fork();
  if (pid < 0) throw BackendUnavailable(std::string("fork: ") + std::strerror(errno));
  if (pid == 0) {
    ::dup2(in_child.get(), STDIN_FILENO);
    ::dup2(out.write.get(), STDOUT_FILENO);
    ::dup2(err.write.get(), STDERR_FILENO);
    if (job.memory_cap_mb > 0) {
      // Best effort: some platforms ignore RLIMIT_AS.
      const rlim_t bytes = static_cast<rlim_t>(job.memory_cap_mb) * 1024 * 1024;
      rlimit lim{bytes, bytes};
      ::setrlimit(RLIMIT_AS, &lim);
    }
    ::execvp(argv[0], argv.data());
    const int e = errno;
    [[maybe_unused]] auto n = ::write(exec_status.write.get(), &e, sizeof e);
    ::_exit(127);
  }

  in_child.reset();
  out.write.reset();
  err.write.reset();
  exec_status.write.reset();

  int exec_errno = 0;
  if (::read(exec_status.read.get(), &exec_errno, sizeof exec_errno) == sizeof exec_errno) {
    ::waitpid(pid, nullptr, 0);
    throw BackendUnavailable("cannot start runner '" + opts_.argv[0] + "': " + std::strerror(exec_errno));
  }

  set_nonblocking(in_parent.get());
  set_nonblocking(out.read.get());
  set_nonblocking(err.read.get());

  const auto budget = std::chrono::milliseconds(static_cast<std::int64_t>(job.timeout_ms) *
                                                    static_cast<std::int64_t>(std::max<std::size_t>(1, job.cases.size())) +
                                                opts_.grace_ms);
  const auto deadline = started + budget;

  std::string stdout_buf, stderr_buf;
  std::size_t written = 0;
  bool killed = false;
  char chunk[4096];

  while (out.read || err.read) {
    const auto now = Clock::now();
    if (now >= deadline) {
      ::kill(pid, SIGKILL);
      killed = true;
      break;
    }
    pollfd fds[3];
    int nfds = 0;
    int i_in = -1, i_out = -1, i_err = -1;
    if (in_parent) {
      fds[nfds] = {in_parent.get(), POLLOUT, 0};
      i_in = nfds++;
    }
    if (out.read) {
      fds[nfds] = {out.read.get(), POLLIN, 0};
      i_out = nfds++;
    }
    if (err.read) {
      fds[nfds] = {err.read.get(), POLLIN, 0};
      i_err = nfds++;
    }
    const auto wait_ms = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
    const int rc = ::poll(fds, static_cast<nfds_t>(nfds), static_cast<int>(std::max<std::int64_t>(1, wait_ms)));
    if (rc < 0) {
      if (errno == EINTR) continue;
      ::kill(pid, SIGKILL);
      ::waitpid(pid, nullptr, 0);
      throw BackendUnavailable(std::string("poll: ") + std::strerror(errno));
    }
    if (i_in >= 0 && fds[i_in].revents) {
      const auto n = ::send(in_parent.get(), request.data() + written, request.size() - written, MSG_NOSIGNAL);
      if (n > 0) written += static_cast<std::size_t>(n);
      if (n < 0 && errno != EAGAIN && errno != EINTR) written = request.size();
      if (written == request.size()) {
        ::shutdown(in_parent.get(), SHUT_WR);
        in_parent.reset();
      }
    }
    auto drain = [&](int idx, Fd& fd, std::string& buf) {
      if (idx < 0 || !fds[idx].revents) return;
      const auto n = ::read(fd.get(), chunk, sizeof chunk);
      if (n > 0) {
        if (buf.size() < (1u << 24)) buf.append(chunk, static_cast<std::size_t>(n));
      } else if (n == 0 || (errno != EAGAIN && errno != EINTR)) {
        fd.reset();
      }
    };
    drain(i_out, out.read, stdout_buf);
    drain(i_err, err.read, stderr_buf);
  }

  int status = 0;
  ::waitpid(pid, &status, 0);

  ExecResult result;
  const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - started).count();
  const auto n = job.cases.size();
  if (killed) {
    result.per_case = all(n, CaseOutcome::timeout());
    result.wall_time_ms = elapsed;
    return result;
  }
  const auto eol = stdout_buf.find('\n');
  const auto line = stdout_buf.substr(0, eol);
  try {
    result = decode_response(line, n);
  } catch (const std::invalid_argument& e) {
    std::string why = line.empty() ? "runner produced no response" : std::string("runner protocol error: ") + e.what();
    if (WIFSIGNALED(status)) why += " (killed by signal " + std::to_string(WTERMSIG(status)) + ")";
    if (!stderr_buf.empty()) why += "; stderr: " + stderr_buf;
    result.per_case = all(n, CaseOutcome::error(truncate_guest_text(why)));
  }
  result.wall_time_ms = elapsed;
  return result;
}

}  // namespace dio
