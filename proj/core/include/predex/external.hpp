#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

namespace predex {

// One child process speaking newline-delimited JSON on stdin/stdout:
//   request  {"id": k, "data_path": "/tmp/....csv", "n_rows": m}
//   response {"id": k, "value": v}  or  {"id": k, "error": "message"}
// One request is outstanding at a time. {"shutdown": true} is sent on
// destruction. A timeout or protocol error kills the child and fails every
// later request.
class ExternalProcess {
 public:
  // Spawns `command` via /bin/sh -c. Throws std::runtime_error when the
  // process cannot be started.
  ExternalProcess(std::string command, double timeout_s = 300.0);
  ~ExternalProcess();

  ExternalProcess(const ExternalProcess&) = delete;
  ExternalProcess& operator=(const ExternalProcess&) = delete;

  // Sends one request and waits for the matching response. nullopt on
  // evaluator error, timeout, mismatched id, or a dead child. The error
  // text of the last failure is kept for diagnostics.
  std::optional<double> request(const std::string& data_path, std::size_t n_rows);

  bool alive() const { return pid_ > 0; }
  const std::string& last_error() const { return last_error_; }

 private:
  void shutdown() noexcept;
  bool read_line(std::string& line);

  std::string command_;
  double timeout_s_;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::int64_t next_id_ = 1;
  std::string buffer_;
  std::string last_error_;
};

}  // namespace predex
