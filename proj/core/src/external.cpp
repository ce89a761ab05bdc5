#include "predex/external.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

namespace predex {

namespace {

void close_fd(int& fd) {
  if (fd >= 0) {
    ::close(fd);
    fd = -1;
  }
}

}  // namespace

ExternalProcess::ExternalProcess(std::string command, double timeout_s)
    : command_(std::move(command)), timeout_s_(timeout_s) {
  int to_child[2] = {-1, -1};
  int from_child[2] = {-1, -1};
  if (::pipe(to_child) != 0 || ::pipe(from_child) != 0) {
    if (to_child[0] >= 0) ::close(to_child[0]);
    if (to_child[1] >= 0) ::close(to_child[1]);
    throw std::runtime_error("external: pipe() failed: " + std::string(std::strerror(errno)));
  }
  pid_t pid = ::fork();
  if (pid < 0) {
    ::close(to_child[0]);
    ::close(to_child[1]);
    ::close(from_child[0]);
    ::close(from_child[1]);
    throw std::runtime_error("external: fork() failed: " + std::string(std::strerror(errno)));
  }
  if (pid == 0) {
    ::dup2(to_child[0], STDIN_FILENO);
    ::dup2(from_child[1], STDOUT_FILENO);
    ::close(to_child[0]);
    ::close(to_child[1]);
    ::close(from_child[0]);
    ::close(from_child[1]);
    ::execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  pid_ = pid;
  to_child_ = to_child[1];
  from_child_ = from_child[0];
  ::close(to_child[0]);
  ::close(from_child[1]);
}

ExternalProcess::~ExternalProcess() { shutdown(); }

void ExternalProcess::shutdown() noexcept {
  if (pid_ <= 0) return;
  if (to_child_ >= 0) {
    const char msg[] = "{\"shutdown\":true}\n";
    ssize_t ignored = ::write(to_child_, msg, sizeof(msg) - 1);
    (void)ignored;
  }
  close_fd(to_child_);
  close_fd(from_child_);
  // Grace period, then SIGKILL.
  for (int i = 0; i < 50; ++i) {
    int status = 0;
    pid_t r = ::waitpid(pid_, &status, WNOHANG);
    if (r == pid_ || (r < 0 && errno == ECHILD)) {
      pid_ = -1;
      return;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  ::kill(pid_, SIGKILL);
  ::waitpid(pid_, nullptr, 0);
  pid_ = -1;
}

bool ExternalProcess::read_line(std::string& line) {
  auto deadline = std::chrono::steady_clock::now() +
                  std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                      std::chrono::duration<double>(timeout_s_));
  for (;;) {
    auto nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return true;
    }
    auto now = std::chrono::steady_clock::now();
    if (now >= deadline) {
      last_error_ = "timeout after " + std::to_string(timeout_s_) + " s";
      return false;
    }
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
    struct pollfd pfd{from_child_, POLLIN, 0};
    int pr = ::poll(&pfd, 1, static_cast<int>(std::min<long long>(left, 60000)));
    if (pr < 0) {
      if (errno == EINTR) continue;
      last_error_ = std::string("poll failed: ") + std::strerror(errno);
      return false;
    }
    if (pr == 0) continue;
    char chunk[4096];
    ssize_t n = ::read(from_child_, chunk, sizeof(chunk));
    if (n < 0) {
      if (errno == EINTR) continue;
      last_error_ = std::string("read failed: ") + std::strerror(errno);
      return false;
    }
    if (n == 0) {
      last_error_ = "child closed its stdout";
      return false;
    }
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

std::optional<double> ExternalProcess::request(const std::string& data_path, std::size_t n_rows) {
  if (pid_ <= 0) {
    if (last_error_.empty()) last_error_ = "child is not running";
    return std::nullopt;
  }
  nlohmann::json req{{"id", next_id_}, {"data_path", data_path}, {"n_rows", n_rows}};
  std::int64_t id = next_id_++;
  std::string line = req.dump();
  line.push_back('\n');
  std::size_t off = 0;
  while (off < line.size()) {
    ssize_t n = ::write(to_child_, line.data() + off, line.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      last_error_ = std::string("write failed: ") + std::strerror(errno);
      shutdown();
      return std::nullopt;
    }
    off += static_cast<std::size_t>(n);
  }
  std::string resp;
  if (!read_line(resp)) {
    shutdown();
    return std::nullopt;
  }
  nlohmann::json j = nlohmann::json::parse(resp, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    last_error_ = "malformed response: " + resp;
    shutdown();
    return std::nullopt;
  }
  if (!j.contains("id") || j["id"].get<std::int64_t>() != id) {
    last_error_ = "response id mismatch: " + resp;
    shutdown();
    return std::nullopt;
  }
  if (j.contains("error")) {
    // Evaluator-reported failure: the protocol stays in sync, later
    // requests are fine.
    last_error_ = j["error"].is_string() ? j["error"].get<std::string>() : j["error"].dump();
    return std::nullopt;
  }
  if (!j.contains("value") || !j["value"].is_number()) {
    last_error_ = "response has no numeric value: " + resp;
    shutdown();
    return std::nullopt;
  }
  return j["value"].get<double>();
}

}  // namespace predex
