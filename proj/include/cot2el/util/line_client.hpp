#pragma once

#include <fcntl.h>
#include <signal.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <memory>
#include <mutex>
#include <string>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "cot2el/core/error.hpp"

namespace cot2el {

using json = nlohmann::json;

/// Request/response transport for JSON adapters (segmenters, embedders, taggers).
class JsonClient {
 public:
  virtual ~JsonClient() = default;
  virtual json request(const json& message) = 0;
};

/// Speaks newline-delimited JSON with a long-lived child process over
/// stdin/stdout. One request in flight at a time.
class SubprocessJsonClient : public JsonClient {
 public:
  explicit SubprocessJsonClient(std::string command) : command_(std::move(command)) {}

  ~SubprocessJsonClient() override { stop(); }

  SubprocessJsonClient(const SubprocessJsonClient&) = delete;
  SubprocessJsonClient& operator=(const SubprocessJsonClient&) = delete;

  json request(const json& message) override {
    std::lock_guard lock(mutex_);
    if (pid_ <= 0) start();
    std::string line = message.dump();
    line.push_back('\n');
    if (!write_all(line)) {
      stop();
      throw AdapterError("adapter unreachable: write to '" + command_ + "' failed");
    }
    std::string reply;
    if (!read_line(reply)) {
      stop();
      throw AdapterError("adapter unreachable: '" + command_ + "' closed its output");
    }
    try {
      return json::parse(reply);
    } catch (const json::exception& e) {
      throw AdapterError(std::string("adapter protocol violation: reply is not JSON: ") + e.what());
    }
  }

 private:
  void start() {
    int to_child[2];
    int from_child[2];
    if (pipe(to_child) != 0 || pipe(from_child) != 0) throw AdapterError("adapter unreachable: pipe failed");
    // exec failure is detected through a close-on-exec status pipe
    int status_pipe[2];
    if (pipe(status_pipe) != 0) throw AdapterError("adapter unreachable: pipe failed");
    fcntl(status_pipe[1], F_SETFD, FD_CLOEXEC);
    pid_t pid = fork();
    if (pid < 0) throw AdapterError("adapter unreachable: fork failed");
    if (pid == 0) {
      dup2(to_child[0], STDIN_FILENO);
      dup2(from_child[1], STDOUT_FILENO);
      close(to_child[0]);
      close(to_child[1]);
      close(from_child[0]);
      close(from_child[1]);
      close(status_pipe[0]);
      execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
      int err = errno;
      ssize_t ignored = write(status_pipe[1], &err, sizeof err);
      (void)ignored;
      _exit(127);
    }
    close(to_child[0]);
    close(from_child[1]);
    close(status_pipe[1]);
    int err = 0;
    if (read(status_pipe[0], &err, sizeof err) > 0) {
      close(status_pipe[0]);
      close(to_child[1]);
      close(from_child[0]);
      waitpid(pid, nullptr, 0);
      throw AdapterError("adapter unreachable: cannot exec '" + command_ + "': " + std::strerror(err));
    }
    close(status_pipe[0]);
    pid_ = pid;
    write_fd_ = to_child[1];
    read_fd_ = from_child[0];
    buffer_.clear();
  }

  void stop() {
    if (write_fd_ >= 0) close(write_fd_);
    if (read_fd_ >= 0) close(read_fd_);
    write_fd_ = read_fd_ = -1;
    if (pid_ > 0) {
      kill(pid_, SIGTERM);
      waitpid(pid_, nullptr, 0);
    }
    pid_ = -1;
  }

  bool write_all(const std::string& s) {
    // a dead child must not kill us with SIGPIPE
    struct sigaction ignore {};
    struct sigaction old {};
    ignore.sa_handler = SIG_IGN;
    sigaction(SIGPIPE, &ignore, &old);
    std::size_t done = 0;
    bool ok = true;
    while (done < s.size()) {
      ssize_t n = write(write_fd_, s.data() + done, s.size() - done);
      if (n <= 0) {
        if (n < 0 && errno == EINTR) continue;
        ok = false;
        break;
      }
      done += static_cast<std::size_t>(n);
    }
    sigaction(SIGPIPE, &old, nullptr);
    return ok;
  }

  bool read_line(std::string& line) {
    for (;;) {
      if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
        line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        return true;
      }
      char chunk[4096];
      ssize_t n = read(read_fd_, chunk, sizeof chunk);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) return false;
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

  std::string command_;
  std::mutex mutex_;
  pid_t pid_ = -1;
  int write_fd_ = -1;
  int read_fd_ = -1;
  std::string buffer_;
};

/// POSTs each request as a JSON body to a fixed URL.
class HttpJsonClient : public JsonClient {
 public:
  explicit HttpJsonClient(const std::string& url, int timeout_seconds = 60) : timeout_(timeout_seconds) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw AdapterError("adapter URL needs a scheme: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    origin_ = url.substr(0, path_start);
    path_ = path_start == std::string::npos ? "/" : url.substr(path_start);
  }

  json request(const json& message) override {
    httplib::Client cli(origin_);
    cli.set_connection_timeout(5);
    cli.set_read_timeout(timeout_);
    auto res = cli.Post(path_, message.dump(), "application/json");
    if (!res) throw AdapterError("adapter unreachable: " + origin_ + path_ + ": " + httplib::to_string(res.error()));
    if (res->status != 200) throw AdapterError("adapter returned HTTP " + std::to_string(res->status));
    try {
      return json::parse(res->body);
    } catch (const json::exception& e) {
      throw AdapterError(std::string("adapter protocol violation: reply is not JSON: ") + e.what());
    }
  }

 private:
  std::string origin_;
  std::string path_;
  int timeout_;
};

/// "http://..." / "https://..." -> HTTP client, anything else is a shell command.
inline std::unique_ptr<JsonClient> make_json_client(const std::string& target) {
  if (target.starts_with("http://") || target.starts_with("https://")) return std::make_unique<HttpJsonClient>(target);
  return std::make_unique<SubprocessJsonClient>(target);
}

}  // namespace cot2el
