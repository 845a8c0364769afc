#pragma once

#include <cstdint>
#include <memory>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

namespace setgap {

/// Line-delimited JSON protocol, version 1. The adapter speaks first with
///   {"d": int, "n": int, "protocol": 1}
/// then answers each request {"id": int, "points": [[...]]} with either
/// {"id": int, "matrix": [[...]]} or {"id": int, "error": "..."}, one JSON
/// object per line, ids echoed verbatim. Requests are strictly sequential:
/// one in flight per transport.
struct Handshake {
  int d = 0;
  int n = 0;
  int protocol = 0;
};

nlohmann::json to_json(const Handshake& h);
Handshake handshake_from_json(const nlohmann::json& j);

class Transport {
 public:
  virtual ~Transport() = default;

  /// Reads and validates the adapter's opening line. Called once, before any
  /// roundtrip.
  virtual Handshake handshake() = 0;

  /// Writes one request line and blocks for the matching response line.
  virtual nlohmann::json roundtrip(const nlohmann::json& request) = 0;

  virtual std::string identity() const = 0;

  /// Idempotent, also invoked by the destructor.
  virtual void shutdown() = 0;
};

/// Spawns the adapter and speaks over its stdin/stdout. Timeouts and closed
/// streams surface as TransportError; malformed lines as ProtocolError.
class SubprocessTransport final : public Transport {
 public:
  explicit SubprocessTransport(std::vector<std::string> argv,
                               double timeout_s = 10.0);
  ~SubprocessTransport() override;

  Handshake handshake() override;
  nlohmann::json roundtrip(const nlohmann::json& request) override;
  std::string identity() const override;
  void shutdown() override;

 private:
  void write_line(const std::string& line);
  std::string read_line();

  std::vector<std::string> argv_;
  double timeout_s_;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
  bool handshook_ = false;
};

/// Speaks over a pair of files: requests appended one per line to the request
/// file, responses read from the response file as the adapter appends them.
/// The adapter's handshake is the first line of the response file. On
/// shutdown a final {"shutdown": true} line is appended to the request file
/// so a watching adapter can exit.
class FilePairTransport final : public Transport {
 public:
  FilePairTransport(std::string request_path, std::string response_path,
                    double timeout_s = 10.0);
  ~FilePairTransport() override;

  Handshake handshake() override;
  nlohmann::json roundtrip(const nlohmann::json& request) override;
  std::string identity() const override;
  void shutdown() override;

 private:
  void append_line(const std::string& line);
  std::string next_response_line();

  std::string request_path_;
  std::string response_path_;
  double timeout_s_;
  std::streamoff offset_ = 0;
  bool open_ = true;
};

/// Splits a shell-ish command string on whitespace, honoring single and
/// double quotes. No variable expansion.
std::vector<std::string> split_command(const std::string& command);

}  // namespace setgap
