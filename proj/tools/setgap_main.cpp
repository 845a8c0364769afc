// setgap command line: builds discontinuity witness certificates for
// set-to-matrix maps and certifies external maps over the line protocol.
//
// Exit codes: 0 success, 1 usage error, 2 verification failure,
// 3 transport/handshake failure.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "setgap/certify.hpp"
#include "setgap/errors.hpp"
#include "setgap/metric.hpp"
#include "setgap/order.hpp"
#include "setgap/random.hpp"
#include "setgap/serialize.hpp"
#include "setgap/sets.hpp"
#include "setgap/transport.hpp"
#include "setgap/witness.hpp"

namespace {

using setgap::Json;

struct RunConfig {
  std::uint64_t seed = 0;
  std::string out;
  std::string format = "json";
  int threads = 1;
};

std::vector<double> parse_csv_doubles(const std::string& text,
                                      const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      size_t used = 0;
      out.push_back(std::stod(item, &used));
      while (used < item.size() && std::isspace(item[used])) ++used;
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw setgap::ConstructionError(std::string(what) +
                                      ": cannot parse number '" + item + "'");
    }
  }
  if (out.empty())
    throw setgap::ConstructionError(std::string(what) + ": empty list");
  return out;
}

setgap::Vec parse_vec(const std::string& text, const char* what) {
  const auto vals = parse_csv_doubles(text, what);
  setgap::Vec v(static_cast<Eigen::Index>(vals.size()));
  for (size_t i = 0; i < vals.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = vals[i];
  return v;
}

std::vector<setgap::Vec> parse_points(const std::string& text) {
  std::vector<setgap::Vec> pts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    if (!item.empty()) pts.push_back(parse_vec(item, "points"));
  }
  if (pts.empty()) throw setgap::ConstructionError("points: empty list");
  return pts;
}

Json load_json_file(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in)
    throw setgap::ConstructionError(std::string(what) + ": cannot read " +
                                    path);
  Json j = Json::parse(in, nullptr, false);
  if (j.is_discarded())
    throw setgap::ConstructionError(std::string(what) + ": " + path +
                                    " is not valid JSON");
  return j;
}

void emit(const RunConfig& run, const std::string& text) {
  if (run.out.empty()) {
    std::cout << text;
    if (text.empty() || text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(run.out);
  if (!out)
    throw setgap::ConstructionError("cannot write output file " + run.out);
  out << text;
  if (text.empty() || text.back() != '\n') out << '\n';
}

std::string certificate_csv(const std::vector<setgap::WitnessCertificate>& cs) {
  std::string out = "kind,delta,epsilon,achieved_gap,ratio\n";
  for (const auto& c : cs) {
    out += c.kind == setgap::WitnessKind::Sorting ? "sorting" : "nonsorting";
    out += ',';
    out += Json(c.delta).dump();
    out += ',';
    out += Json(c.epsilon).dump();
    out += ',';
    out += Json(c.achieved_gap).dump();
    out += ',';
    out += Json(setgap::certificate_ratio(c)).dump();
    out += '\n';
  }
  return out;
}

struct MetricFlags {
  std::string metric_file;
  std::string encoder = "identity";
  std::string p = "2";
  int moments_degree = 2;
  int features_k = 16;
  std::uint64_t features_seed = 1;
};

void add_metric_flags(CLI::App* cmd, MetricFlags& mf) {
  cmd->add_option("--metric", mf.metric_file,
                  "metric spec JSON file {\"encoder\", \"p\"}");
  cmd->add_option("--encoder", mf.encoder,
                  "identity | moments | random-features")
      ->check(CLI::IsMember({"identity", "moments", "random-features"}));
  cmd->add_option("--p", mf.p, "norm exponent: 1, 2, or inf")
      ->check(CLI::IsMember({"1", "2", "inf"}));
  cmd->add_option("--moments-degree", mf.moments_degree,
                  "max degree for the moments encoder");
  cmd->add_option("--features-k", mf.features_k,
                  "feature count for the random-features encoder");
  cmd->add_option("--features-seed", mf.features_seed,
                  "weight seed for the random-features encoder");
}

setgap::MetricSpec resolve_metric(const MetricFlags& mf, int d) {
  if (!mf.metric_file.empty())
    return setgap::metric_from_json(load_json_file(mf.metric_file, "metric"));
  const double p = mf.p == "inf" ? std::numeric_limits<double>::infinity()
                                 : std::stod(mf.p);
  if (mf.encoder == "moments")
    return setgap::MetricSpec{setgap::Encoder::moments(d, mf.moments_degree),
                              p};
  if (mf.encoder == "random-features")
    return setgap::MetricSpec{
        setgap::Encoder::random_features(d, mf.features_k, mf.features_seed),
        p};
  return setgap::MetricSpec{setgap::Encoder::identity(d), p};
}

setgap::OrderSpec resolve_order(const std::string& order_file, int d) {
  if (order_file.empty()) return setgap::OrderSpec::canonical(d);
  setgap::OrderSpec ord =
      setgap::order_from_json(load_json_file(order_file, "order"));
  if (ord.dim() != d)
    throw setgap::ConstructionError(
        "order file has d = " + std::to_string(ord.dim()) +
        " but --d is " + std::to_string(d));
  return ord;
}

std::string sibling_adapter_path(const char* argv0) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::path self = fs::canonical("/proc/self/exe", ec);
  if (ec) self = fs::path(argv0);
  return (self.parent_path() / "setgap-adapter").string();
}

// Prepends key/value pairs from a JSON config file as synthetic flags so the
// command line keeps the last word. Values become --key=value tokens.
std::vector<std::string> config_tokens(const Json& cfg) {
  if (!cfg.is_object())
    throw setgap::ConstructionError("config file must hold a JSON object");
  std::vector<std::string> tokens;
  for (const auto& [key, value] : cfg.items()) {
    if (value.is_boolean()) {
      tokens.push_back("--" + key + "=" + (value.get<bool>() ? "true" : "false"));
    } else if (value.is_string()) {
      tokens.push_back("--" + key + "=" + value.get<std::string>());
    } else if (value.is_number()) {
      tokens.push_back("--" + key + "=" + value.dump());
    } else {
      throw setgap::ConstructionError(
          "config key '" + key + "' must be a scalar (flat keys only)");
    }
  }
  return tokens;
}

std::vector<std::string> rebuild_args(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string config_path;
  for (size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size())
        throw setgap::ConstructionError("--config needs a file path");
      config_path = args[i + 1];
      args.erase(args.begin() + static_cast<long>(i),
                 args.begin() + static_cast<long>(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
      args.erase(args.begin() + static_cast<long>(i));
      break;
    }
  }
  if (config_path.empty()) return args;
  const auto tokens = config_tokens(load_json_file(config_path, "config"));
  // Insert after the leading subcommand words so they bind to the invoked
  // subcommand; explicit flags that follow override them.
  size_t at = 0;
  while (at < args.size() && !args[at].empty() && args[at][0] != '-') ++at;
  args.insert(args.begin() + static_cast<long>(at), tokens.begin(),
              tokens.end());
  return args;
}

int run_selftest(const RunConfig& run, const std::string& adapter_path) {
  using namespace setgap;
  int failures = 0;
  auto check = [&](bool ok, const std::string& name) {
    std::cout << (ok ? "[ok]   " : "[fail] ") << name << "\n";
    if (!ok) ++failures;
  };

  {
    const OrderSpec ord = OrderSpec::canonical(2);
    SortingWitnessRequest req;
    req.anchor = Vec::Zero(2);
    req.epsilon_in = 1.0;
    req.j = 2;
    req.tau = 1e-2;
    const auto cert = sorting_witness(ord, req, MetricSpec::identity(2));
    check(std::abs(cert.delta - 1e-2) <= 1e-9 &&
              std::abs(cert.epsilon - 1.0) <= 1e-9 &&
              std::abs(cert.achieved_gap - std::sqrt(2.0 + 1e-4)) <= 1e-9,
          "sorting witness worked example");
  }
  {
    const OrderSpec ord = OrderSpec::canonical(2);
    RegionSwapMap map(ord, 0.0);
    std::vector<Vec> pts{Vec(2), Vec(2), Vec(2)};
    pts[0] << -10.0, 0.0;
    pts[1] << -9.0, 0.0;
    pts[2] << 0.0, 0.0;
    Vec start(2), end(2);
    start << 0.0, 0.0;
    end << 10.0, 10.0;
    LinePath path(PointSet(pts), 2, start, end, 0.0, 10.0);
    const auto cert =
        nonsorting_witness(map, path, 0.0, 10.0, 1e-6, MetricSpec::identity(2));
    check(cert.converged && cert.delta < 1e-6 &&
              cert.achieved_gap + 1e-9 >= cert.epsilon &&
              cert.epsilon * cert.epsilon >= 2.0 - 1e-9,
          "region-swap path bisection");
  }
  {
    const auto sweep_a = witness_sweep(OrderSpec::canonical(2), 5,
                                       run.seed + 42, 1e-4);
    const auto sweep_b = witness_sweep(OrderSpec::canonical(2), 5,
                                       run.seed + 42, 1e-4);
    check(to_json(sweep_a).dump() == to_json(sweep_b).dump(),
          "sweep determinism");
  }
  {
    ExternalMapConfig cfg;
    cfg.command = {adapter_path, "--map", "sort", "--d", "2", "--n", "2"};
    ExternalSetMap ext(cfg);
    const auto membership = probe_membership(ext, 8, 7);
    SortingWitnessRequest req;
    req.anchor = Vec::Zero(2);
    req.tau = 1e-3;
    const auto local = sorting_witness(OrderSpec::canonical(2), req,
                                       MetricSpec::identity(2));
    const auto remote = sorting_witness_for_map(
        ext, OrderSpec::canonical(2), req, MetricSpec::identity(2));
    ext.shutdown();
    check(membership.in_family &&
              to_json(local).dump() == to_json(remote).dump(),
          "adapter round trip matches in-process");
  }

  std::cout << (failures == 0 ? "selftest passed" : "selftest FAILED") << "\n";
  return failures == 0 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig run;
  CLI::App app{"discontinuity witnesses for set-to-matrix maps"};
  app.require_subcommand(1);
  app.fallthrough();
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  app.add_option("--seed", run.seed, "base RNG seed");
  app.add_option("--out", run.out, "write the main artifact here instead of stdout");
  app.add_option("--format", run.format, "json | csv")
      ->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--threads", run.threads, "worker threads for sweeps")
      ->check(CLI::Range(1, 256));

  // witness
  auto* witness = app.add_subcommand("witness", "construct witness pairs");
  witness->require_subcommand(1);
  witness->fallthrough();

  struct {
    int d = 2;
    std::string order_file;
    std::string anchor = "0,0";
    double epsilon_in = 1.0;
    int j = 2;
    double tau = 1e-4;
    int n = 2;
    MetricFlags metric;
  } sort_opt;
  auto* wsort = witness->add_subcommand("sort", "adjacent-swap witness for a "
                                                "sorting map");
  wsort->add_option("--d", sort_opt.d, "dimension")->check(CLI::Range(2, 64));
  wsort->add_option("--order", sort_opt.order_file,
                    "order JSON file (canonical order when omitted)");
  wsort->add_option("--anchor", sort_opt.anchor, "anchor point, comma separated");
  wsort->add_option("--eps", sort_opt.epsilon_in, "offset along v_j");
  wsort->add_option("--j", sort_opt.j, "basis index of the offset, 1-based");
  wsort->add_option("--tau", sort_opt.tau, "undercut along v_1");
  wsort->add_option("--n", sort_opt.n, "set size (fillers added beyond 2)")
      ->check(CLI::Range(2, 4096));
  add_metric_flags(wsort, sort_opt.metric);

  struct {
    int d = 2;
    std::string order_file;
    double boundary = 0.0;
    std::string points;
    int moving_index = -1;
    std::string start;
    std::string end;
    double t_lo = 0.0;
    double t_hi = 1.0;
    double tol = 1e-6;
    int max_iterations = 200;
    MetricFlags metric;
  } nonsort_opt;
  auto* wnonsort = witness->add_subcommand(
      "nonsort", "bisection witness along a path, region-swap map");
  wnonsort->add_option("--d", nonsort_opt.d, "dimension")
      ->check(CLI::Range(2, 64));
  wnonsort->add_option("--order", nonsort_opt.order_file, "order JSON file");
  wnonsort->add_option("--boundary", nonsort_opt.boundary,
                       "region-swap boundary on the coordinate sum");
  wnonsort->add_option("--points", nonsort_opt.points,
                       "base set, e.g. \"-10,0;-9,0;0,0\"")
      ->required();
  wnonsort->add_option("--moving-index", nonsort_opt.moving_index,
                       "index of the element that travels")
      ->required();
  wnonsort->add_option("--start", nonsort_opt.start, "moving element at t_lo")
      ->required();
  wnonsort->add_option("--end", nonsort_opt.end, "moving element at t_hi")
      ->required();
  wnonsort->add_option("--t-lo", nonsort_opt.t_lo, "path parameter start");
  wnonsort->add_option("--t-hi", nonsort_opt.t_hi, "path parameter end");
  wnonsort->add_option("--tol", nonsort_opt.tol,
                       "bisection stops once d_theta drops below this");
  wnonsort->add_option("--max-iterations", nonsort_opt.max_iterations,
                       "bisection budget");
  add_metric_flags(wnonsort, nonsort_opt.metric);

  struct {
    int d = 2;
    std::string order_file;
    int count = 100;
    double tau = 1e-4;
    int n = 2;
    int j = 2;
    double epsilon_in = 1.0;
    MetricFlags metric;
  } sweep_opt;
  auto* wsweep = witness->add_subcommand("sweep",
                                         "one witness per sampled anchor");
  wsweep->add_option("--d", sweep_opt.d, "dimension")->check(CLI::Range(2, 64));
  wsweep->add_option("--order", sweep_opt.order_file, "order JSON file");
  wsweep->add_option("--count", sweep_opt.count, "number of anchors")
      ->check(CLI::Range(1, 10000000));
  wsweep->add_option("--tau", sweep_opt.tau, "undercut along v_1");
  wsweep->add_option("--n", sweep_opt.n, "set size")->check(CLI::Range(2, 4096));
  wsweep->add_option("--j", sweep_opt.j, "basis index of the offset");
  wsweep->add_option("--eps", sweep_opt.epsilon_in, "offset along v_j");
  add_metric_flags(wsweep, sweep_opt.metric);

  // certify
  struct {
    std::string adapter;
    std::string self_map;
    std::string request_file;
    std::string response_file;
    int d = 2;
    int n = 3;
    int anchors = 20;
    std::string tau_ladder = "1e-2,1e-3,1e-4";
    double timeout = 10.0;
    double boundary = 0.0;
    std::string adapter_path;
    std::string csv;
    MetricFlags metric;
  } cert_opt;
  auto* certify = app.add_subcommand(
      "certify", "black-box discontinuity certification over the line protocol");
  certify->add_option("--adapter", cert_opt.adapter,
                      "adapter command line to spawn");
  certify->add_option("--self", cert_opt.self_map,
                      "spawn the bundled adapter: sort | region-swap | "
                      "avg-rows | constant")
      ->check(CLI::IsMember({"sort", "region-swap", "avg-rows", "constant"}));
  certify->add_option("--request-file", cert_opt.request_file,
                      "file-pair mode: request path");
  certify->add_option("--response-file", cert_opt.response_file,
                      "file-pair mode: response path");
  certify->add_option("--d", cert_opt.d, "dimension for --self")
      ->check(CLI::Range(2, 64));
  certify->add_option("--n", cert_opt.n, "set size for --self")
      ->check(CLI::Range(2, 4096));
  certify->add_option("--anchors", cert_opt.anchors,
                      "witnesses per rung of the ladder")
      ->check(CLI::Range(1, 1000000));
  certify->add_option("--tau-ladder", cert_opt.tau_ladder,
                      "comma separated taus, e.g. 1e-2,1e-3,1e-4");
  certify->add_option("--timeout", cert_opt.timeout,
                      "seconds to wait for each adapter line");
  certify->add_option("--boundary", cert_opt.boundary,
                      "boundary for --self region-swap");
  certify->add_option("--adapter-path", cert_opt.adapter_path,
                      "bundled adapter binary (default: next to setgap)");
  certify->add_option("--csv", cert_opt.csv,
                      "also write the tau/ratio table to this CSV file");
  add_metric_flags(certify, cert_opt.metric);

  auto* selftest = app.add_subcommand("selftest", "run the built-in checks");
  struct {
    std::string adapter_path;
  } selftest_opt;
  selftest->add_option("--adapter-path", selftest_opt.adapter_path,
                       "bundled adapter binary");

  std::vector<std::string> args;
  try {
    args = rebuild_args(argc, argv);
  } catch (const setgap::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (wsort->parsed()) {
      const auto ord = resolve_order(sort_opt.order_file, sort_opt.d);
      setgap::SortingWitnessRequest req;
      req.anchor = parse_vec(sort_opt.anchor, "anchor");
      req.epsilon_in = sort_opt.epsilon_in;
      req.j = sort_opt.j;
      req.tau = sort_opt.tau;
      req.fillers = setgap::default_fillers(ord, req.anchor, req.epsilon_in,
                                            sort_opt.n - 2);
      const auto metric = resolve_metric(sort_opt.metric, sort_opt.d);
      const auto cert = setgap::sorting_witness(ord, req, metric);
      emit(run, run.format == "csv" ? certificate_csv({cert})
                                    : setgap::to_json(cert).dump(2));
      return 0;
    }
    if (wnonsort->parsed()) {
      const auto ord = resolve_order(nonsort_opt.order_file, nonsort_opt.d);
      const setgap::RegionSwapMap map(ord, nonsort_opt.boundary);
      const setgap::PointSet base(parse_points(nonsort_opt.points));
      const setgap::LinePath path(base, nonsort_opt.moving_index,
                                  parse_vec(nonsort_opt.start, "start"),
                                  parse_vec(nonsort_opt.end, "end"),
                                  nonsort_opt.t_lo, nonsort_opt.t_hi);
      const auto metric = resolve_metric(nonsort_opt.metric, nonsort_opt.d);
      const auto cert = setgap::nonsorting_witness(
          map, path, nonsort_opt.t_lo, nonsort_opt.t_hi, nonsort_opt.tol,
          metric, nonsort_opt.max_iterations);
      emit(run, run.format == "csv" ? certificate_csv({cert})
                                    : setgap::to_json(cert).dump(2));
      return 0;
    }
    if (wsweep->parsed()) {
      const auto ord = resolve_order(sweep_opt.order_file, sweep_opt.d);
      setgap::SweepOptions opts;
      opts.n = sweep_opt.n;
      opts.j = sweep_opt.j;
      opts.epsilon_in = sweep_opt.epsilon_in;
      opts.metric = resolve_metric(sweep_opt.metric, sweep_opt.d);
      opts.threads = run.threads;
      const auto result = setgap::witness_sweep(ord, sweep_opt.count, run.seed,
                                                sweep_opt.tau, opts);
      emit(run, run.format == "csv" ? certificate_csv(result.certificates)
                                    : setgap::to_json(result).dump(2));
      return 0;
    }
    if (certify->parsed()) {
      setgap::ExternalMapConfig cfg;
      cfg.timeout_s = cert_opt.timeout;
      if (!cert_opt.adapter.empty()) {
        cfg.command = setgap::split_command(cert_opt.adapter);
      } else if (!cert_opt.self_map.empty()) {
        const std::string adapter = cert_opt.adapter_path.empty()
                                        ? sibling_adapter_path(argv[0])
                                        : cert_opt.adapter_path;
        cfg.command = {adapter,
                       "--map",
                       cert_opt.self_map,
                       "--d",
                       std::to_string(cert_opt.d),
                       "--n",
                       std::to_string(cert_opt.n),
                       "--boundary",
                       std::to_string(cert_opt.boundary)};
      } else if (!cert_opt.request_file.empty() &&
                 !cert_opt.response_file.empty()) {
        cfg.request_file = cert_opt.request_file;
        cfg.response_file = cert_opt.response_file;
      } else {
        std::cerr << "error: certify needs --adapter, --self, or a "
                     "--request-file/--response-file pair\n";
        return 1;
      }

      setgap::ExternalSetMap map(cfg);
      const auto metric = resolve_metric(cert_opt.metric, map.dim());
      const auto ladder =
          parse_csv_doubles(cert_opt.tau_ladder, "tau-ladder");
      setgap::CertifyOptions opts;
      opts.threads = 1;  // one transport, strictly sequential
      const auto report = setgap::certify_discontinuity(
          map, metric, cert_opt.anchors, ladder, run.seed, opts);
      map.shutdown();
      if (!cert_opt.csv.empty()) {
        std::ofstream csv(cert_opt.csv);
        if (!csv)
          throw setgap::ConstructionError("cannot write " + cert_opt.csv);
        csv << setgap::ratio_table_csv(report);
      }
      emit(run, run.format == "csv" ? setgap::ratio_table_csv(report)
                                    : setgap::to_json(report).dump(2));
      return report.complete ? 0 : 3;
    }
    if (selftest->parsed()) {
      const std::string adapter = selftest_opt.adapter_path.empty()
                                      ? sibling_adapter_path(argv[0])
                                      : selftest_opt.adapter_path;
      return run_selftest(run, adapter);
    }
    std::cerr << "error: no subcommand\n";
    return 1;
  } catch (const setgap::TransportError& e) {
    std::cerr << "transport error: " << e.what() << "\n";
    return 3;
  } catch (const setgap::VerificationError& e) {
    std::cerr << "verification failure: " << e.what() << "\n";
    return 2;
  } catch (const setgap::ConstructionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return 2;
  }
}
