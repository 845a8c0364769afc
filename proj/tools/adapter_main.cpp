// Reference adapter: serves a set map over the line protocol, on
// stdin/stdout or a request/response file pair. Also provides two
// deliberately broken maps (avg-rows, constant) and failure-injection
// switches used to exercise the certifier's rejection paths.

#include <chrono>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "setgap/errors.hpp"
#include "setgap/order.hpp"
#include "setgap/serialize.hpp"
#include "setgap/sets.hpp"
#include "setgap/transport.hpp"

namespace {

using setgap::Json;
using setgap::Mat;
using setgap::OrderSpec;
using setgap::OutputMatrix;
using setgap::PointSet;
using setgap::SetMap;
using setgap::SortMap;
using setgap::Vec;

/// Sorts, then replaces the first two rows by their average. Emits rows that
/// are not input elements, so it sits outside the map family.
class AvgRowsMap final : public SetMap {
 public:
  explicit AvgRowsMap(OrderSpec ord) : sort_(std::move(ord)) {}
  OutputMatrix apply(const PointSet& s) const override {
    Mat m = sort_.apply(s).matrix();
    const Vec avg = 0.5 * (m.row(0) + m.row(1));
    m.row(0) = avg.transpose();
    m.row(1) = avg.transpose();
    return OutputMatrix(std::move(m));
  }
  int dim() const override { return sort_.dim(); }
  std::string describe() const override { return "avg-rows"; }

 private:
  SortMap sort_;
};

/// Ignores the input entirely.
class ConstantMap final : public SetMap {
 public:
  ConstantMap(int d, int n) : d_(d), n_(n) {}
  OutputMatrix apply(const PointSet&) const override {
    Mat m(n_, d_);
    for (int r = 0; r < n_; ++r)
      for (int c = 0; c < d_; ++c)
        m(r, c) = 0.125 * static_cast<double>(r + 1) +
                  0.001 * static_cast<double>(c);
    return OutputMatrix(std::move(m));
  }
  int dim() const override { return d_; }
  std::string describe() const override { return "constant"; }

 private:
  int d_;
  int n_;
};

Json handle_request(const Json& request, const SetMap& map, int d, int n) {
  Json id = request.contains("id") ? request["id"] : Json(-1);
  try {
    PointSet s = setgap::point_set_from_json(request);
    if (s.dim() != d || s.size() != n)
      return Json{{"id", id},
                  {"error", "expected " + std::to_string(n) + " points of "
                                                              "dimension " +
                                std::to_string(d)}};
    OutputMatrix m = map.apply(s);
    return Json{{"id", id}, {"matrix", setgap::to_json(m)["matrix"]}};
  } catch (const std::exception& e) {
    return Json{{"id", id}, {"error", e.what()}};
  }
}

struct Options {
  std::string map_kind = "sort";
  int d = 2;
  int n = 3;
  double boundary = 0.0;
  std::string order_json;
  std::string transport = "stdio";
  std::string request_file;
  std::string response_file;
  std::string misbehave = "none";
  int fail_after = -1;
  double idle_timeout_s = 120.0;
};

int serve_stdio(const Options& opt, const SetMap& map) {
  std::ios::sync_with_stdio(false);
  if (opt.misbehave == "silent") {
    std::this_thread::sleep_for(std::chrono::seconds(3600));
    return 0;
  }
  if (opt.misbehave == "bad-handshake")
    std::cout << "this is not a handshake" << std::endl;
  else
    std::cout << Json{{"d", opt.d}, {"n", opt.n}, {"protocol", 1}}.dump()
              << std::endl;

  int served = 0;
  std::string line;
  while (std::getline(std::cin, line)) {
    if (line.empty()) continue;
    Json request = Json::parse(line, nullptr, false);
    if (request.is_discarded()) {
      std::cout << Json{{"id", -1}, {"error", "malformed JSON"}}.dump()
                << std::endl;
      continue;
    }
    if (request.contains("shutdown")) break;
    if (opt.fail_after >= 0 && served >= opt.fail_after) return 0;
    std::cout << handle_request(request, map, opt.d, opt.n).dump()
              << std::endl;
    ++served;
  }
  return 0;
}

int serve_files(const Options& opt, const SetMap& map) {
  {
    std::ofstream out(opt.response_file, std::ios::trunc);
    if (!out) {
      std::cerr << "cannot open response file " << opt.response_file << "\n";
      return 3;
    }
    if (opt.misbehave == "bad-handshake")
      out << "this is not a handshake\n";
    else if (opt.misbehave != "silent")
      out << Json{{"d", opt.d}, {"n", opt.n}, {"protocol", 1}}.dump() << "\n";
  }
  if (opt.misbehave == "silent") {
    std::this_thread::sleep_for(std::chrono::seconds(3600));
    return 0;
  }

  std::streamoff offset = 0;
  int served = 0;
  auto last_activity = std::chrono::steady_clock::now();
  for (;;) {
    std::string pending;
    {
      std::ifstream in(opt.request_file, std::ios::binary);
      if (in) {
        in.seekg(offset);
        pending.assign(std::istreambuf_iterator<char>(in),
                       std::istreambuf_iterator<char>());
      }
    }
    size_t consumed = 0;
    for (;;) {
      const auto nl = pending.find('\n', consumed);
      if (nl == std::string::npos) break;
      const std::string line = pending.substr(consumed, nl - consumed);
      consumed = nl + 1;
      last_activity = std::chrono::steady_clock::now();
      if (line.empty()) continue;
      Json request = Json::parse(line, nullptr, false);
      Json response;
      if (request.is_discarded())
        response = Json{{"id", -1}, {"error", "malformed JSON"}};
      else if (request.contains("shutdown")) {
        offset += static_cast<std::streamoff>(consumed);
        return 0;
      } else if (opt.fail_after >= 0 && served >= opt.fail_after)
        return 0;
      else {
        response = handle_request(request, map, opt.d, opt.n);
        ++served;
      }
      std::ofstream out(opt.response_file, std::ios::app);
      out << response.dump() << "\n";
    }
    offset += static_cast<std::streamoff>(consumed);
    if (consumed == 0) {
      const double idle = std::chrono::duration<double>(
                              std::chrono::steady_clock::now() - last_activity)
                              .count();
      if (idle > opt.idle_timeout_s) return 0;
      std::this_thread::sleep_for(std::chrono::milliseconds(2));
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  Options opt;
  CLI::App app{"setgap reference adapter: serves a set map over the line "
               "protocol"};
  app.add_option("--map", opt.map_kind, "sort | region-swap | avg-rows | constant")
      ->check(CLI::IsMember({"sort", "region-swap", "avg-rows", "constant"}));
  app.add_option("--d", opt.d, "point dimension")->check(CLI::Range(2, 64));
  app.add_option("--n", opt.n, "set size")->check(CLI::Range(2, 4096));
  app.add_option("--boundary", opt.boundary,
                 "region-swap boundary on the coordinate sum");
  app.add_option("--order-json", opt.order_json,
                 "JSON file with {\"d\", \"basis\"} for a custom order");
  app.add_option("--transport", opt.transport, "stdio | files")
      ->check(CLI::IsMember({"stdio", "files"}));
  app.add_option("--request-file", opt.request_file, "files mode: request path");
  app.add_option("--response-file", opt.response_file,
                 "files mode: response path");
  app.add_option("--misbehave", opt.misbehave,
                 "failure injection: none | bad-handshake | silent")
      ->check(CLI::IsMember({"none", "bad-handshake", "silent"}));
  app.add_option("--fail-after", opt.fail_after,
                 "exit without replying after this many requests");
  app.add_option("--idle-timeout", opt.idle_timeout_s,
                 "files mode: exit after this many idle seconds");
  CLI11_PARSE(app, argc, argv);

  try {
    OrderSpec ord = [&] {
      if (opt.order_json.empty()) return OrderSpec::canonical(opt.d);
      std::ifstream in(opt.order_json);
      if (!in) throw setgap::ConstructionError("cannot read " + opt.order_json);
      Json j = Json::parse(in);
      OrderSpec parsed = setgap::order_from_json(j);
      if (parsed.dim() != opt.d)
        throw setgap::ConstructionError("order dimension does not match --d");
      return parsed;
    }();

    std::unique_ptr<SetMap> map;
    if (opt.map_kind == "sort")
      map = std::make_unique<SortMap>(std::move(ord));
    else if (opt.map_kind == "region-swap")
      map = std::make_unique<setgap::RegionSwapMap>(std::move(ord),
                                                    opt.boundary);
    else if (opt.map_kind == "avg-rows")
      map = std::make_unique<AvgRowsMap>(std::move(ord));
    else
      map = std::make_unique<ConstantMap>(opt.d, opt.n);

    if (opt.transport == "stdio") return serve_stdio(opt, *map);
    if (opt.request_file.empty() || opt.response_file.empty()) {
      std::cerr << "files transport needs --request-file and --response-file\n";
      return 1;
    }
    return serve_files(opt, *map);
  } catch (const std::exception& e) {
    std::cerr << "adapter error: " << e.what() << "\n";
    return 1;
  }
}
