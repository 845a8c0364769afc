#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "setgap/metric.hpp"
#include "setgap/order.hpp"
#include "setgap/sets.hpp"

namespace setgap {

enum class WitnessKind { Sorting, NonSorting };

/// A verified discontinuity witness: two nearby sets whose outputs stay far
/// apart. delta bounds the input distance, achieved_gap is the exact output
/// distance, and epsilon is a lower bound on the gap that recomputation must
/// confirm. Certificates are only ever emitted after verification.
struct WitnessCertificate {
  WitnessCertificate(WitnessKind kind_, PointSet theta_, PointSet theta_prime_)
      : kind(kind_),
        theta(std::move(theta_)),
        theta_prime(std::move(theta_prime_)),
        anchor(Vec::Zero(theta.dim())) {}

  WitnessKind kind;
  PointSet theta;
  PointSet theta_prime;
  double delta = 0.0;
  double epsilon = 0.0;
  double achieved_gap = 0.0;
  Vec anchor;

  // Sorting-witness parameters.
  int j = 0;
  double tau = 0.0;
  double epsilon_in = 0.0;

  // Non-sorting (path bisection) parameters.
  double path_t_lo = 0.0;
  double path_t_hi = 0.0;
  int iterations = 0;
  bool converged = true;
  std::vector<Vec> swapped_pair;
};

/// gap / delta, guarded against a zero denominator.
double certificate_ratio(const WitnessCertificate& cert);

struct SortingWitnessRequest {
  Vec anchor;
  std::vector<Vec> fillers;  // the n - 2 elements shared by both sets
  double epsilon_in = 1.0;
  int j = 2;  // basis index of the offset direction, 1-based, must exceed 1
  double tau = 1e-4;
};

/// Fillers for a size-(count + 2) witness around the anchor, placed along
/// v_1 at alternating offsets of at least 20 * epsilon_in so they stay clear
/// of the swap interval.
std::vector<Vec> default_fillers(const OrderSpec& ord, const Vec& anchor,
                                 double epsilon_in, int count);

/// Two sets differing in one element, b = anchor + epsilon_in * v_j versus
/// c = b - tau * v_1, for which any map sorting under ord must move the
/// anchor's row: c slips just below the anchor while b sits just above it.
/// The output gap is at least ||b - a||_2 however small tau gets, while the
/// input distance shrinks with tau. Throws ConstructionError for degenerate
/// parameters (j = 1, epsilon_in = 0, tau that breaks filler clearance) and
/// VerificationError if the map fails to realize the adjacent transposition.
WitnessCertificate sorting_witness(const OrderSpec& ord,
                                   const SortingWitnessRequest& req,
                                   const MetricSpec& metric);

/// Same construction driven through an arbitrary map, which must behave as a
/// sort under ord on the two probed sets.
WitnessCertificate sorting_witness_for_map(const SetMap& map,
                                           const OrderSpec& ord,
                                           const SortingWitnessRequest& req,
                                           const MetricSpec& metric);

/// One-parameter family of sets: the element at moving_index travels linearly
/// from start to end as t runs over [t_lo, t_hi]; the rest stay fixed.
struct LinePath {
  LinePath(PointSet base_, int moving_index_, Vec start_, Vec end_,
           double t_lo_, double t_hi_);

  PointSet at(double t) const;

  PointSet base;
  int moving_index;
  Vec start;
  Vec end;
  double t_lo;
  double t_hi;
};

/// Bisects [t_lo, t_hi] on the map's row assignment: keeps a bracket whose
/// ends have different assignments and shrinks it until the two sets are
/// within tol under the metric (or the iteration cap is hit, flagged via
/// converged = false). epsilon comes from the displaced shared element's
/// separation from both sets, which lower-bounds the output gap no matter
/// how close the bracket ends get.
WitnessCertificate nonsorting_witness(const SetMap& map, const LinePath& path,
                                      double t_lo, double t_hi, double tol,
                                      const MetricSpec& metric,
                                      int max_iterations = 200);

struct SweepOptions {
  int n = 2;
  int j = 2;
  double epsilon_in = 1.0;
  std::optional<MetricSpec> metric;  // identity encoder, p = 2 when unset
  int threads = 1;
  double anchor_lo = -1.0;
  double anchor_hi = 1.0;
};

struct SweepSummary {
  int count = 0;
  int distinct_loci = 0;
  double min_ratio = 0.0;
  double median_ratio = 0.0;
  double max_ratio = 0.0;
};

struct SweepResult {
  std::vector<WitnessCertificate> certificates;
  SweepSummary summary;
};

/// One verified sorting witness per anchor, anchors sampled pairwise distinct
/// and uniform in [anchor_lo, anchor_hi]^d. Deterministic for a fixed seed
/// regardless of thread count: anchors are drawn up front and results are
/// assembled in anchor order.
SweepResult witness_sweep(const OrderSpec& ord, int count, std::uint64_t seed,
                          double tau, const SweepOptions& opts = {});

SweepResult witness_sweep_for_map(const SetMap& map, const OrderSpec& ord,
                                  int count, std::uint64_t seed, double tau,
                                  const SweepOptions& opts = {});

/// Recomputes the map outputs and both distances from scratch and checks
/// them against the certificate within tol, including gap >= epsilon.
bool verify_certificate(const WitnessCertificate& cert, const SetMap& map,
                        const MetricSpec& metric, double tol = 1e-9);

/// Searches for line paths whose endpoint row assignments differ under the
/// map: seeds of non-sorting witnesses. Draws random bases and endpoints
/// until `count` paths are found or the attempt budget runs out.
std::vector<LinePath> find_swap_paths(const SetMap& map, int n, int count,
                                      std::uint64_t seed, int attempt_budget);

}  // namespace setgap
