#include "setgap/transport.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <fstream>
#include <mutex>
#include <thread>
#include <utility>

#include "setgap/errors.hpp"

namespace setgap {

nlohmann::json to_json(const Handshake& h) {
  return nlohmann::json{{"d", h.d}, {"n", h.n}, {"protocol", h.protocol}};
}

Handshake handshake_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("d") || !j.contains("n") ||
      !j.contains("protocol") || !j["d"].is_number_integer() ||
      !j["n"].is_number_integer() || !j["protocol"].is_number_integer())
    throw ProtocolError("handshake line is not {\"d\", \"n\", \"protocol\"}");
  Handshake h;
  h.d = j["d"].get<int>();
  h.n = j["n"].get<int>();
  h.protocol = j["protocol"].get<int>();
  if (h.protocol != 1)
    throw ProtocolError("unsupported protocol version " +
                        std::to_string(h.protocol));
  if (h.d < 2 || h.n < 2)
    throw ProtocolError("handshake declares d or n below 2");
  return h;
}

namespace {

void ignore_sigpipe_once() {
  static std::once_flag flag;
  std::call_once(flag, [] { ::signal(SIGPIPE, SIG_IGN); });
}

nlohmann::json parse_line(const std::string& line, const char* what) {
  nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded())
    throw ProtocolError(std::string(what) + " is not valid JSON: " +
                        (line.size() > 200 ? line.substr(0, 200) + "..." : line));
  return j;
}

using Clock = std::chrono::steady_clock;

double remaining_seconds(Clock::time_point deadline) {
  return std::chrono::duration<double>(deadline - Clock::now()).count();
}

}  // namespace

SubprocessTransport::SubprocessTransport(std::vector<std::string> argv,
                                         double timeout_s)
    : argv_(std::move(argv)), timeout_s_(timeout_s) {
  if (argv_.empty()) throw ConstructionError("adapter command is empty");
  ignore_sigpipe_once();

  int to_child[2] = {-1, -1};
  int from_child[2] = {-1, -1};
  if (::pipe(to_child) != 0 || ::pipe(from_child) != 0)
    throw TransportError("pipe() failed: " + std::string(strerror(errno)));

  const int pid = ::fork();
  if (pid < 0) throw TransportError("fork() failed");
  if (pid == 0) {
    ::dup2(to_child[0], STDIN_FILENO);
    ::dup2(from_child[1], STDOUT_FILENO);
    ::close(to_child[0]);
    ::close(to_child[1]);
    ::close(from_child[0]);
    ::close(from_child[1]);
    std::vector<char*> args;
    args.reserve(argv_.size() + 1);
    for (auto& a : argv_) args.push_back(a.data());
    args.push_back(nullptr);
    ::execvp(args[0], args.data());
    _exit(127);
  }
  pid_ = pid;
  to_child_ = to_child[1];
  from_child_ = from_child[0];
  ::close(to_child[0]);
  ::close(from_child[1]);
}

SubprocessTransport::~SubprocessTransport() {
  try {
    shutdown();
  } catch (...) {
  }
}

std::string SubprocessTransport::identity() const {
  std::string id = "subprocess:";
  for (size_t i = 0; i < argv_.size(); ++i) {
    if (i) id += ' ';
    id += argv_[i];
  }
  return id;
}

void SubprocessTransport::write_line(const std::string& line) {
  if (to_child_ < 0) throw TransportError("transport already shut down");
  std::string framed = line;
  framed += '\n';
  size_t off = 0;
  while (off < framed.size()) {
    const ssize_t n =
        ::write(to_child_, framed.data() + off, framed.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw TransportError("adapter stdin closed: " +
                           std::string(strerror(errno)));
    }
    off += static_cast<size_t>(n);
  }
}

std::string SubprocessTransport::read_line() {
  const auto deadline =
      Clock::now() + std::chrono::duration_cast<Clock::duration>(
                         std::chrono::duration<double>(timeout_s_));
  for (;;) {
    const auto nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return line;
    }
    const double left = remaining_seconds(deadline);
    if (left <= 0.0)
      throw TransportError("timed out after " + std::to_string(timeout_s_) +
                           "s waiting for the adapter");
    struct pollfd pfd {};
    pfd.fd = from_child_;
    pfd.events = POLLIN;
    const int rc = ::poll(&pfd, 1, static_cast<int>(left * 1000.0) + 1);
    if (rc < 0) {
      if (errno == EINTR) continue;
      throw TransportError("poll() failed: " + std::string(strerror(errno)));
    }
    if (rc == 0) continue;
    char chunk[4096];
    const ssize_t n = ::read(from_child_, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw TransportError("read() failed: " + std::string(strerror(errno)));
    }
    if (n == 0)
      throw TransportError("adapter closed its output stream (" + identity() +
                           ")");
    buffer_.append(chunk, static_cast<size_t>(n));
  }
}

Handshake SubprocessTransport::handshake() {
  if (handshook_) throw TransportError("handshake already performed");
  handshook_ = true;
  return handshake_from_json(parse_line(read_line(), "handshake"));
}

nlohmann::json SubprocessTransport::roundtrip(const nlohmann::json& request) {
  write_line(request.dump());
  return parse_line(read_line(), "response");
}

void SubprocessTransport::shutdown() {
  if (to_child_ >= 0) {
    ::close(to_child_);
    to_child_ = -1;
  }
  if (from_child_ >= 0) {
    ::close(from_child_);
    from_child_ = -1;
  }
  if (pid_ > 0) {
    int status = 0;
    for (int i = 0; i < 100; ++i) {
      const int rc = ::waitpid(pid_, &status, WNOHANG);
      if (rc == pid_ || rc < 0) {
        pid_ = -1;
        return;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, &status, 0);
    pid_ = -1;
  }
}

FilePairTransport::FilePairTransport(std::string request_path,
                                     std::string response_path,
                                     double timeout_s)
    : request_path_(std::move(request_path)),
      response_path_(std::move(response_path)),
      timeout_s_(timeout_s) {
  std::ofstream touch(request_path_, std::ios::app);
  if (!touch)
    throw TransportError("cannot open request file " + request_path_);
}

FilePairTransport::~FilePairTransport() {
  try {
    shutdown();
  } catch (...) {
  }
}

std::string FilePairTransport::identity() const {
  return "files:" + request_path_ + "," + response_path_;
}

void FilePairTransport::append_line(const std::string& line) {
  if (!open_) throw TransportError("transport already shut down");
  std::ofstream out(request_path_, std::ios::app);
  if (!out)
    throw TransportError("cannot append to request file " + request_path_);
  out << line << '\n';
  out.flush();
  if (!out)
    throw TransportError("write to request file failed: " + request_path_);
}

std::string FilePairTransport::next_response_line() {
  const auto deadline =
      Clock::now() + std::chrono::duration_cast<Clock::duration>(
                         std::chrono::duration<double>(timeout_s_));
  for (;;) {
    {
      std::ifstream in(response_path_, std::ios::binary);
      if (in) {
        in.seekg(offset_);
        std::string rest((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
        const auto nl = rest.find('\n');
        if (nl != std::string::npos) {
          offset_ += static_cast<std::streamoff>(nl + 1);
          return rest.substr(0, nl);
        }
      }
    }
    if (remaining_seconds(deadline) <= 0.0)
      throw TransportError("timed out after " + std::to_string(timeout_s_) +
                           "s waiting for " + response_path_);
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }
}

Handshake FilePairTransport::handshake() {
  return handshake_from_json(parse_line(next_response_line(), "handshake"));
}

nlohmann::json FilePairTransport::roundtrip(const nlohmann::json& request) {
  append_line(request.dump());
  return parse_line(next_response_line(), "response");
}

void FilePairTransport::shutdown() {
  if (!open_) return;
  open_ = false;
  std::ofstream out(request_path_, std::ios::app);
  if (out) out << nlohmann::json{{"shutdown", true}}.dump() << '\n';
}

std::vector<std::string> split_command(const std::string& command) {
  std::vector<std::string> out;
  std::string cur;
  bool in_single = false, in_double = false, have = false;
  for (const char ch : command) {
    if (in_single) {
      if (ch == '\'')
        in_single = false;
      else
        cur += ch;
    } else if (in_double) {
      if (ch == '"')
        in_double = false;
      else
        cur += ch;
    } else if (ch == '\'') {
      in_single = true;
      have = true;
    } else if (ch == '"') {
      in_double = true;
      have = true;
    } else if (ch == ' ' || ch == '\t') {
      if (have || !cur.empty()) {
        out.push_back(cur);
        cur.clear();
        have = false;
      }
    } else {
      cur += ch;
    }
  }
  if (in_single || in_double)
    throw ConstructionError("unterminated quote in command: " + command);
  if (have || !cur.empty()) out.push_back(cur);
  return out;
}

}  // namespace setgap
