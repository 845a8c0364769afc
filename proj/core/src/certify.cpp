#include "setgap/certify.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "setgap/errors.hpp"
#include "setgap/random.hpp"
#include "setgap/serialize.hpp"

namespace setgap {

ExternalSetMap::ExternalSetMap(ExternalMapConfig config)
    : config_(std::move(config)) {
  if (!config_.command.empty()) {
    transport_ = std::make_unique<SubprocessTransport>(config_.command,
                                                       config_.timeout_s);
  } else if (!config_.request_file.empty() && !config_.response_file.empty()) {
    transport_ = std::make_unique<FilePairTransport>(
        config_.request_file, config_.response_file, config_.timeout_s);
  } else {
    throw ConstructionError(
        "external map needs either a command or a request/response file pair");
  }
  handshake_ = transport_->handshake();
  if (config_.d != 0 && config_.d != handshake_.d)
    throw ProtocolError("adapter declares d = " + std::to_string(handshake_.d) +
                        ", expected " + std::to_string(config_.d));
  if (config_.n != 0 && config_.n != handshake_.n)
    throw ProtocolError("adapter declares n = " + std::to_string(handshake_.n) +
                        ", expected " + std::to_string(config_.n));
}

std::string ExternalSetMap::describe() const { return transport_->identity(); }

void ExternalSetMap::shutdown() {
  std::lock_guard<std::mutex> lock(mutex_);
  transport_->shutdown();
}

OutputMatrix ExternalSetMap::apply(const PointSet& s) const {
  if (s.dim() != handshake_.d)
    throw DimensionError("external map expects dimension " +
                         std::to_string(handshake_.d));
  if (s.size() != handshake_.n)
    throw DimensionError("external map expects sets of size " +
                         std::to_string(handshake_.n));
  std::lock_guard<std::mutex> lock(mutex_);
  const int id = next_id_++;
  nlohmann::json request{{"id", id}, {"points", to_json(s)["points"]}};
  const nlohmann::json response = transport_->roundtrip(request);
  if (!response.is_object() || !response.contains("id") ||
      !response["id"].is_number_integer())
    throw ProtocolError("response lacks an integer id");
  if (response["id"].get<int>() != id)
    throw ProtocolError("response id " + response["id"].dump() +
                        " does not match request id " + std::to_string(id));
  if (response.contains("error")) {
    const auto& err = response["error"];
    throw ProtocolError("adapter error: " +
                        (err.is_string() ? err.get<std::string>() : err.dump()));
  }
  if (!response.contains("matrix"))
    throw ProtocolError("response carries neither 'matrix' nor 'error'");
  OutputMatrix m = [&] {
    try {
      return output_matrix_from_json(response);
    } catch (const ConstructionError& e) {
      throw ProtocolError(std::string("malformed matrix: ") + e.what());
    }
  }();
  if (m.rows() != handshake_.n || m.dim() != handshake_.d)
    throw ProtocolError("matrix shape " + std::to_string(m.rows()) + "x" +
                        std::to_string(m.dim()) + " does not match handshake");
  return m;
}

MembershipResult probe_membership(const SetMap& map, int samples,
                                  std::uint64_t seed, double tol,
                                  int set_size) {
  if (samples < 1)
    throw ConstructionError("probe_membership: samples must be positive");
  const int n = map.fixed_size().value_or(set_size);
  Rng rng(seed);
  for (int k = 0; k < samples; ++k) {
    PointSet s = PointSet::sample(n, map.dim(), rng);
    OutputMatrix m = map.apply(s);
    if (!match_rows(m, s, tol))
      return MembershipResult{false, s, k + 1};
  }
  return MembershipResult{true, std::nullopt, samples};
}

namespace {

RungStats stats_from_ratios(double tau, std::vector<double> ratios) {
  RungStats rs;
  rs.tau = tau;
  rs.certificates = static_cast<int>(ratios.size());
  if (ratios.empty()) {
    rs.failed = true;
    return rs;
  }
  std::sort(ratios.begin(), ratios.end());
  const size_t n = ratios.size();
  rs.median_ratio =
      n % 2 == 1 ? ratios[n / 2] : 0.5 * (ratios[n / 2 - 1] + ratios[n / 2]);
  rs.max_ratio = ratios.back();
  return rs;
}

}  // namespace

CertifyReport certify_discontinuity(const SetMap& map, const MetricSpec& metric,
                                    int anchors,
                                    const std::vector<double>& tau_ladder,
                                    std::uint64_t seed,
                                    const CertifyOptions& opts) {
  if (anchors < 1)
    throw ConstructionError("certify: anchors must be positive");
  if (tau_ladder.empty())
    throw ConstructionError("certify: tau ladder must not be empty");
  for (double t : tau_ladder)
    if (!(t > 0.0))
      throw ConstructionError("certify: tau ladder entries must be positive");

  CertifyReport report;
  report.map_identity = map.describe();
  report.d = map.dim();
  report.n = map.fixed_size().value_or(opts.set_size);
  report.seed = seed;
  report.metric = metric;
  report.ratio_alert_threshold = opts.ratio_alert_threshold;

  std::vector<double> ladder = tau_ladder;
  std::sort(ladder.begin(), ladder.end(), std::greater<double>());

  const OrderSpec canonical = OrderSpec::canonical(report.d);

  // A transport loss anywhere after construction keeps the finished phases:
  // the report is returned with complete = false instead of being discarded.
  try {
    report.membership =
        probe_membership(map, opts.membership_samples, derive_seed(seed, 101),
                         opts.membership_tolerance, report.n);
    if (!report.membership.in_family) return report;

    report.classification = classify(map, canonical, opts.classify_samples,
                                     derive_seed(seed, 202), report.n);

    const bool sorting_like =
        report.classification->verdict == ClassifyVerdict::SortingUnder;

    if (sorting_like) {
      SweepOptions sweep_opts;
      sweep_opts.n = report.n;
      sweep_opts.metric = metric;
      sweep_opts.threads = opts.threads;
      for (const double tau : ladder) {
        try {
          SweepResult rung =
              witness_sweep_for_map(map, canonical, anchors, seed, tau,
                                    sweep_opts);
          RungStats rs;
          rs.tau = tau;
          rs.certificates = rung.summary.count;
          rs.median_ratio = rung.summary.median_ratio;
          rs.max_ratio = rung.summary.max_ratio;
          report.ladder.push_back(rs);
          for (auto& c : rung.certificates)
            report.certificates.push_back(std::move(c));
        } catch (const VerificationError&) {
          report.failed_constructions += anchors;
          RungStats rs;
          rs.tau = tau;
          rs.failed = true;
          report.ladder.push_back(rs);
        }
      }
    } else {
      const auto paths =
          find_swap_paths(map, report.n, anchors, derive_seed(seed, 303),
                          anchors * opts.path_attempt_factor);
      for (const double tol : ladder) {
        std::vector<double> ratios;
        ratios.reserve(paths.size());
        for (const auto& path : paths) {
          try {
            WitnessCertificate cert = nonsorting_witness(
                map, path, path.t_lo, path.t_hi, tol, metric);
            ratios.push_back(certificate_ratio(cert));
            report.certificates.push_back(std::move(cert));
          } catch (const VerificationError&) {
            ++report.failed_constructions;
          }
        }
        report.ladder.push_back(stats_from_ratios(tol, std::move(ratios)));
      }
    }
  } catch (const TransportError&) {
    report.complete = false;
  }

  for (const auto& c : report.certificates)
    report.max_ratio = std::max(report.max_ratio, certificate_ratio(c));
  for (auto it = report.ladder.rbegin(); it != report.ladder.rend(); ++it) {
    if (!it->failed && it->certificates > 0) {
      report.discontinuity_evidence =
          it->median_ratio > opts.ratio_alert_threshold;
      break;
    }
  }
  return report;
}

std::string ratio_table_csv(const CertifyReport& report) {
  std::string out = "tau,certificates,median_ratio,max_ratio\n";
  for (const auto& r : report.ladder) {
    out += Json(r.tau).dump();
    out += ',';
    out += std::to_string(r.certificates);
    out += ',';
    out += Json(r.median_ratio).dump();
    out += ',';
    out += Json(r.max_ratio).dump();
    out += '\n';
  }
  return out;
}

nlohmann::json to_json(const MembershipResult& r) {
  nlohmann::json j{{"in_family", r.in_family}, {"samples", r.samples}};
  if (r.violation) j["violation"] = to_json(*r.violation);
  return j;
}

nlohmann::json to_json(const ClassifyResult& r) {
  nlohmann::json j{{"verdict", r.verdict == ClassifyVerdict::SortingUnder
                                   ? "sorting_under"
                                   : "not_sorting"},
                   {"samples", r.samples_run}};
  if (r.counterexample) j["counterexample"] = to_json(*r.counterexample);
  return j;
}

nlohmann::json to_json(const RungStats& r) {
  return nlohmann::json{{"tau", r.tau},
                        {"certificates", r.certificates},
                        {"median_ratio", r.median_ratio},
                        {"max_ratio", r.max_ratio},
                        {"failed", r.failed}};
}

nlohmann::json to_json(const CertifyReport& r) {
  nlohmann::json ladder = nlohmann::json::array();
  for (const auto& rung : r.ladder) ladder.push_back(to_json(rung));
  nlohmann::json certs = nlohmann::json::array();
  for (const auto& c : r.certificates) certs.push_back(to_json(c));
  nlohmann::json j{{"map", r.map_identity},
                   {"d", r.d},
                   {"n", r.n},
                   {"seed", r.seed},
                   {"metric", to_json(r.metric)},
                   {"membership", to_json(r.membership)},
                   {"ladder", std::move(ladder)},
                   {"certificates", std::move(certs)},
                   {"max_ratio", r.max_ratio},
                   {"ratio_alert_threshold", r.ratio_alert_threshold},
                   {"discontinuity_evidence", r.discontinuity_evidence},
                   {"complete", r.complete},
                   {"failed_constructions", r.failed_constructions}};
  if (r.classification) j["classification"] = to_json(*r.classification);
  return j;
}

}  // namespace setgap
