#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "setgap/metric.hpp"
#include "setgap/sets.hpp"
#include "setgap/transport.hpp"
#include "setgap/witness.hpp"

namespace setgap {

struct ExternalMapConfig {
  /// Subprocess mode when non-empty; otherwise file-pair mode.
  std::vector<std::string> command;
  std::string request_file;
  std::string response_file;
  /// Expected dimensions; 0 adopts whatever the handshake declares.
  int d = 0;
  int n = 0;
  double timeout_s = 10.0;
  /// Per-coordinate slack when matching returned rows to input elements.
  double match_tolerance = 1e-6;
};

/// A set map served by an external process over the line protocol. Requests
/// are strictly sequential; apply() is serialized internally. The declared
/// d and n are checked against the handshake at construction.
class ExternalSetMap final : public SetMap {
 public:
  explicit ExternalSetMap(ExternalMapConfig config);

  OutputMatrix apply(const PointSet& s) const override;
  int dim() const override { return handshake_.d; }
  std::optional<int> fixed_size() const override { return handshake_.n; }
  std::string describe() const override;

  const Handshake& peer() const { return handshake_; }
  void shutdown();

 private:
  ExternalMapConfig config_;
  std::unique_ptr<Transport> transport_;
  Handshake handshake_;
  mutable std::mutex mutex_;
  mutable int next_id_ = 1;
};

struct MembershipResult {
  bool in_family = false;
  std::optional<PointSet> violation;
  int samples = 0;
};

/// Samples sets and checks the returned rows are exactly the input elements,
/// up to tol per coordinate, each used once. A constant or averaging map
/// fails here and is rejected before any certification is attempted.
MembershipResult probe_membership(const SetMap& map, int samples,
                                  std::uint64_t seed, double tol = 1e-6,
                                  int set_size = 3);

struct RungStats {
  double tau = 0.0;
  int certificates = 0;
  double median_ratio = 0.0;
  double max_ratio = 0.0;
  bool failed = false;
};

struct CertifyOptions {
  int membership_samples = 64;
  int classify_samples = 128;
  int set_size = 3;  // used when the map does not fix one
  double membership_tolerance = 1e-6;
  /// gap/delta above this at the smallest rung counts as discontinuity
  /// evidence.
  double ratio_alert_threshold = 1e3;
  int path_attempt_factor = 50;
  int threads = 1;
};

struct CertifyReport {
  std::string map_identity;
  int d = 0;
  int n = 0;
  std::uint64_t seed = 0;
  MetricSpec metric = MetricSpec::identity(2);
  MembershipResult membership;
  std::optional<ClassifyResult> classification;
  std::vector<RungStats> ladder;
  std::vector<WitnessCertificate> certificates;
  double max_ratio = 0.0;
  double ratio_alert_threshold = 0.0;
  bool discontinuity_evidence = false;
  bool complete = true;
  int failed_constructions = 0;
};

/// Black-box discontinuity certification. Probes family membership, then
/// classifies the map's behavior by sampling. Sorting-like maps get one
/// anchor sweep per rung of the tau ladder, the same anchors at every rung;
/// other family members get bisected swap paths, with the ladder reused as
/// the bisection tolerance. A transport failure mid-run yields a partial
/// report with complete = false rather than discarding finished work.
CertifyReport certify_discontinuity(const SetMap& map, const MetricSpec& metric,
                                    int anchors,
                                    const std::vector<double>& tau_ladder,
                                    std::uint64_t seed,
                                    const CertifyOptions& opts = {});

/// tau,certificates,median_ratio,max_ratio rows, one per rung.
std::string ratio_table_csv(const CertifyReport& report);

nlohmann::json to_json(const MembershipResult& r);
nlohmann::json to_json(const ClassifyResult& r);
nlohmann::json to_json(const RungStats& r);
nlohmann::json to_json(const CertifyReport& r);

}  // namespace setgap
