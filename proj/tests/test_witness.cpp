#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "setgap/errors.hpp"
#include "setgap/metric.hpp"
#include "setgap/order.hpp"
#include "setgap/random.hpp"
#include "setgap/serialize.hpp"
#include "setgap/sets.hpp"
#include "setgap/witness.hpp"

using namespace setgap;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

SortingWitnessRequest basic_request(double tau, double eps = 1.0, int j = 2) {
  SortingWitnessRequest req;
  req.anchor = Vec::Zero(2);
  req.epsilon_in = eps;
  req.j = j;
  req.tau = tau;
  return req;
}

LinePath region_swap_path() {
  std::vector<Vec> pts{v2(-10, 0), v2(-9, 0), v2(0, 0)};
  return LinePath(PointSet(pts), 2, v2(0, 0), v2(10, 10), 0.0, 10.0);
}

}  // namespace

TEST_CASE("sorting witness hand values, canonical order") {
  const OrderSpec ord = OrderSpec::canonical(2);
  const MetricSpec metric = MetricSpec::identity(2);

  const auto cert = sorting_witness(ord, basic_request(1e-2), metric);
  CHECK(cert.kind == WitnessKind::Sorting);
  CHECK(cert.epsilon == 1.0);
  CHECK(cert.delta == doctest::Approx(1e-2).epsilon(1e-12));
  CHECK(cert.achieved_gap ==
        doctest::Approx(std::sqrt(2.0 + 1e-4)).epsilon(1e-12));
  CHECK(cert.theta.size() == 2);
  CHECK(cert.theta_prime.size() == 2);

  // Shrinking tau shrinks delta proportionally while the gap barely moves.
  const auto tighter = sorting_witness(ord, basic_request(1e-3), metric);
  CHECK(tighter.delta == doctest::Approx(1e-3).epsilon(1e-12));
  CHECK(std::abs(tighter.achieved_gap - cert.achieved_gap) < 1e-4);

  const auto cli_default = sorting_witness(ord, basic_request(1e-4), metric);
  CHECK(cli_default.delta == doctest::Approx(1e-4).epsilon(1e-12));
}

TEST_CASE("sorting witness structure: one element differs, outputs differ in "
          "two adjacent rows") {
  const OrderSpec ord = OrderSpec::canonical(2);
  const auto cert =
      sorting_witness(ord, basic_request(1e-3), MetricSpec::identity(2));

  // theta and theta_prime share exactly one element (the anchor).
  int shared = 0;
  for (const Vec& p : cert.theta.points())
    for (const Vec& q : cert.theta_prime.points())
      if ((p.array() == q.array()).all()) ++shared;
  CHECK(shared == 1);

  const SortMap map(ord);
  const Mat m = map.apply(cert.theta).matrix();
  const Mat mp = map.apply(cert.theta_prime).matrix();
  int differing_rows = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    if ((m.row(r).array() != mp.row(r).array()).any()) ++differing_rows;
  CHECK(differing_rows == 2);
}

TEST_CASE("sorting witness rejects degenerate parameters") {
  const OrderSpec ord = OrderSpec::canonical(2);
  const MetricSpec metric = MetricSpec::identity(2);

  CHECK_THROWS_AS(sorting_witness(ord, basic_request(1e-3, 1.0, 1), metric),
                  ConstructionError);
  CHECK_THROWS_AS(sorting_witness(ord, basic_request(1e-3, 1.0, 3), metric),
                  ConstructionError);
  CHECK_THROWS_AS(sorting_witness(ord, basic_request(1e-3, 0.0), metric),
                  ConstructionError);
  CHECK_THROWS_AS(sorting_witness(ord, basic_request(0.0), metric),
                  ConstructionError);
  // tau below the comparator's resolution cannot realize c < anchor.
  CHECK_THROWS_AS(sorting_witness(ord, basic_request(1e-12), metric),
                  ConstructionError);

  // A tau wider than the filler clearance breaks the adjacent swap.
  SortingWitnessRequest wide = basic_request(150.0);
  wide.fillers = default_fillers(ord, wide.anchor, wide.epsilon_in, 2);
  CHECK_THROWS_AS(sorting_witness(ord, wide, metric), ConstructionError);

  // An interfering filler placed inside the swap interval is refused.
  SortingWitnessRequest bad = basic_request(1e-3);
  bad.fillers.push_back(v2(-5e-4, 0.5));
  CHECK_THROWS_AS(sorting_witness(ord, bad, metric), ConstructionError);
}

TEST_CASE("witness refuses a map that is not sorting near the anchor") {
  const OrderSpec ord = OrderSpec::canonical(2);
  const RegionSwapMap swapper(ord, 0.0);
  SortingWitnessRequest req = basic_request(1e-3);
  req.anchor = v2(5, 5);  // swap region: coordinate sums are positive
  CHECK_THROWS_AS(
      sorting_witness_for_map(swapper, ord, req, MetricSpec::identity(2)),
      VerificationError);
}

TEST_CASE("sorting witness soundness over random parameters and orders") {
  Rng rng(808);
  for (int k = 0; k < 100; ++k) {
    const int d = 2 + static_cast<int>(rng.below(3));
    const bool canonical = rng.unit() < 0.5;
    const OrderSpec ord = canonical ? OrderSpec::canonical(d)
                                    : OrderSpec::random(d, rng.bits());
    SortingWitnessRequest req;
    req.anchor = Vec(d);
    for (int i = 0; i < d; ++i) req.anchor[i] = rng.range(-1, 1);
    req.epsilon_in = rng.range(0.1, 1.0);
    req.j = 2 + static_cast<int>(rng.below(static_cast<uint64_t>(d - 1)));
    req.tau = req.epsilon_in * std::pow(10.0, rng.range(-6.0, -2.0));
    const int fillers = static_cast<int>(rng.below(3));
    req.fillers = default_fillers(ord, req.anchor, req.epsilon_in, fillers);

    const MetricSpec metric = MetricSpec::identity(d);
    const auto cert = sorting_witness(ord, req, metric);

    CHECK(cert.achieved_gap + 1e-9 >= cert.epsilon);
    const Vec b = req.anchor + req.epsilon_in * ord.basis_vector(req.j);
    const Vec c = b - req.tau * ord.basis_vector(1);
    const double floor_sq =
        (req.anchor - c).squaredNorm() + (b - req.anchor).squaredNorm();
    CHECK(cert.achieved_gap * cert.achieved_gap + 1e-9 >= floor_sq);
    CHECK(cert.epsilon ==
          doctest::Approx((b - req.anchor).norm()).epsilon(1e-12));
    CHECK(verify_certificate(cert, SortMap(ord), metric));
  }
}

TEST_CASE("fillers ride along without moving") {
  const OrderSpec ord = OrderSpec::canonical(3);
  SortingWitnessRequest req;
  req.anchor = Vec::Zero(3);
  req.epsilon_in = 0.5;
  req.j = 3;
  req.tau = 1e-4;
  req.fillers = default_fillers(ord, req.anchor, req.epsilon_in, 3);
  const auto cert = sorting_witness(ord, req, MetricSpec::identity(3));
  CHECK(cert.theta.size() == 5);

  const SortMap map(ord);
  const Mat m = map.apply(cert.theta).matrix();
  const Mat mp = map.apply(cert.theta_prime).matrix();
  int same_rows = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    if ((m.row(r).array() == mp.row(r).array()).all()) ++same_rows;
  CHECK(same_rows == 3);
}

TEST_CASE("blow-up: ratio grows by at least 8x per tau decade") {
  const OrderSpec ord = OrderSpec::canonical(2);
  const std::vector<double> taus{1e-2, 1e-3, 1e-4, 1e-5};
  std::vector<double> medians;
  for (const double tau : taus) {
    const auto sweep = witness_sweep(ord, 10, 2026, tau);
    medians.push_back(sweep.summary.median_ratio);
  }
  for (size_t i = 1; i < medians.size(); ++i)
    CHECK(medians[i] >= 8.0 * medians[i - 1]);
}

TEST_CASE("region-swap path bisection converges onto the boundary") {
  const OrderSpec ord = OrderSpec::canonical(2);
  const RegionSwapMap map(ord, 0.0);
  const MetricSpec metric = MetricSpec::identity(2);
  const LinePath path = region_swap_path();

  const auto cert = nonsorting_witness(map, path, 0.0, 10.0, 1e-6, metric);
  CHECK(cert.kind == WitnessKind::NonSorting);
  CHECK(cert.converged);
  CHECK(cert.delta < 1e-6);
  CHECK(cert.iterations <= 200);
  CHECK(cert.achieved_gap + 1e-9 >= cert.epsilon);
  // The two fixed elements trade rows; each sits 1 away from its own set's
  // nearest neighbor on both sides, so epsilon^2 reaches 2.
  CHECK(cert.epsilon * cert.epsilon == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(cert.achieved_gap * cert.achieved_gap + 1e-9 >= 2.0);
  CHECK(cert.swapped_pair.size() == 2);
  CHECK(verify_certificate(cert, map, metric));

  // Independent check: walk the path on a grid and find the assignment flip
  // without bisection. Coarse pass over the whole range, fine pass at 1e-6.
  auto pattern_at = [&](double t) {
    const PointSet s = path.at(t);
    return infer_pattern(map.apply(s), s).map;
  };
  const auto base_pattern = pattern_at(0.0);
  double coarse_flip = -1.0;
  int flips = 0;
  const double coarse_step = 1e-2;
  auto prev = base_pattern;
  for (double t = coarse_step; t <= 10.0 + 1e-12; t += coarse_step) {
    const auto cur = pattern_at(std::min(t, 10.0));
    if (cur != prev) {
      ++flips;
      coarse_flip = t;
      prev = cur;
    }
  }
  CHECK(flips == 1);

  double grid_crossing = -1.0;
  prev = pattern_at(coarse_flip - coarse_step);
  for (double t = coarse_flip - coarse_step; t <= coarse_flip + 1e-12;
       t += 1e-6) {
    const auto cur = pattern_at(t);
    if (cur != prev) {
      grid_crossing = t;
      break;
    }
  }
  REQUIRE(grid_crossing > 0.0);
  const double bisection_crossing = 0.5 * (cert.path_t_lo + cert.path_t_hi);
  CHECK(std::abs(bisection_crossing - grid_crossing) <= 1e-5);
  CHECK(grid_crossing == doctest::Approx(9.5).epsilon(1e-6));
}

TEST_CASE("bisection tolerance ladder shrinks delta, not epsilon") {
  const OrderSpec ord = OrderSpec::canonical(2);
  const RegionSwapMap map(ord, 0.0);
  const MetricSpec metric = MetricSpec::identity(2);
  const LinePath path = region_swap_path();

  const auto loose = nonsorting_witness(map, path, 0.0, 10.0, 1e-3, metric);
  const auto tight = nonsorting_witness(map, path, 0.0, 10.0, 1e-6, metric);
  CHECK(loose.delta < 1e-3);
  CHECK(loose.delta > 1e-5);
  CHECK(tight.delta < 1e-6);
  CHECK(std::abs(loose.epsilon - tight.epsilon) < 1e-2);
  CHECK(tight.iterations > loose.iterations);
}

TEST_CASE("bisection degrades gracefully when the budget runs out") {
  const OrderSpec ord = OrderSpec::canonical(2);
  const RegionSwapMap map(ord, 0.0);
  const auto cert = nonsorting_witness(map, region_swap_path(), 0.0, 10.0,
                                       1e-12, MetricSpec::identity(2), 5);
  CHECK(!cert.converged);
  CHECK(cert.iterations == 5);
  CHECK(cert.achieved_gap + 1e-9 >= cert.epsilon);
}

TEST_CASE("paths without a responsibility change are refused") {
  const OrderSpec ord = OrderSpec::canonical(2);
  const RegionSwapMap dormant(ord,
                              std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(nonsorting_witness(dormant, region_swap_path(), 0.0, 10.0,
                                     1e-6, MetricSpec::identity(2)),
                  VerificationError);

  // Same map, but a parameter range that never reaches the boundary.
  const RegionSwapMap map(ord, 0.0);
  std::vector<Vec> pts{v2(-10, 0), v2(-9, 0), v2(0, 0)};
  const LinePath short_path(PointSet(pts), 2, v2(0, 0), v2(4, 4), 0.0, 1.0);
  CHECK_THROWS_AS(nonsorting_witness(map, short_path, 0.0, 1.0, 1e-6,
                                     MetricSpec::identity(2)),
                  VerificationError);
}

TEST_CASE("paths that collide with a fixed element throw on evaluation") {
  std::vector<Vec> pts{v2(0, 0), v2(5, 5), v2(-2, -2)};
  const LinePath path(PointSet(pts), 2, v2(-2, -2), v2(2, 2), 0.0, 1.0);
  CHECK_THROWS_AS(path.at(0.5), ConstructionError);
  CHECK_NOTHROW(path.at(0.4));
  CHECK_THROWS_AS(path.at(1.5), ConstructionError);
}

TEST_CASE("sweep is deterministic, distinct, and thread-count independent") {
  const OrderSpec ord = OrderSpec::canonical(2);
  const auto a = witness_sweep(ord, 25, 7, 1e-4);
  const auto b = witness_sweep(ord, 25, 7, 1e-4);
  CHECK(to_json(a).dump() == to_json(b).dump());
  CHECK(a.summary.distinct_loci == 25);
  CHECK(a.summary.min_ratio <= a.summary.median_ratio);
  CHECK(a.summary.median_ratio <= a.summary.max_ratio);

  SweepOptions threaded;
  threaded.threads = 4;
  const auto c = witness_sweep(ord, 25, 7, 1e-4, threaded);
  CHECK(to_json(a).dump() == to_json(c).dump());

  const auto other_seed = witness_sweep(ord, 25, 8, 1e-4);
  CHECK(to_json(a).dump() != to_json(other_seed).dump());
}

TEST_CASE("sweep certificates all verify against a fresh map") {
  const OrderSpec ord = OrderSpec::random(3, 31337);
  SweepOptions opts;
  opts.n = 4;
  const auto sweep = witness_sweep(ord, 20, 9, 1e-4, opts);
  const SortMap map(ord);
  const MetricSpec metric = MetricSpec::identity(3);
  for (const auto& cert : sweep.certificates)
    CHECK(verify_certificate(cert, map, metric));
}

TEST_CASE("sweep with count 1 reproduces a direct construction") {
  const OrderSpec ord = OrderSpec::canonical(2);
  const auto sweep = witness_sweep(ord, 1, 404, 1e-3);
  Rng rng(404);
  Vec anchor(2);
  for (int i = 0; i < 2; ++i) anchor[i] = rng.range(-1, 1);
  SortingWitnessRequest req;
  req.anchor = anchor;
  req.tau = 1e-3;
  const auto direct = sorting_witness(ord, req, MetricSpec::identity(2));
  CHECK(to_json(sweep.certificates.front()).dump() == to_json(direct).dump());
}

TEST_CASE("verify_certificate catches tampering") {
  const OrderSpec ord = OrderSpec::canonical(2);
  const MetricSpec metric = MetricSpec::identity(2);
  auto cert = sorting_witness(ord, basic_request(1e-3), metric);
  CHECK(verify_certificate(cert, SortMap(ord), metric));
  cert.delta *= 2.0;
  CHECK(!verify_certificate(cert, SortMap(ord), metric));
  cert.delta /= 2.0;
  cert.achieved_gap += 1e-3;
  CHECK(!verify_certificate(cert, SortMap(ord), metric));
}

TEST_CASE("find_swap_paths locates assignment changes for any family map") {
  const OrderSpec ord = OrderSpec::canonical(2);
  const RegionSwapMap swapper(ord, 0.0);
  const auto paths = find_swap_paths(swapper, 3, 5, 99, 500);
  CHECK(paths.size() == 5);
  for (const auto& path : paths) {
    const PointSet lo = path.at(path.t_lo);
    const PointSet hi = path.at(path.t_hi);
    CHECK(infer_pattern(swapper.apply(lo), lo) !=
          infer_pattern(swapper.apply(hi), hi));
  }

  // A plain sort changes its assignment too, whenever the moving element
  // crosses a fixed one in the order. Those paths bisect into witnesses just
  // the same.
  const SortMap sorter(ord);
  const auto sort_paths = find_swap_paths(sorter, 3, 3, 99, 500);
  REQUIRE(!sort_paths.empty());
  const MetricSpec metric = MetricSpec::identity(2);
  for (const auto& path : sort_paths) {
    const auto cert =
        nonsorting_witness(sorter, path, path.t_lo, path.t_hi, 1e-6, metric);
    CHECK(cert.achieved_gap + 1e-9 >= cert.epsilon);
    CHECK(cert.epsilon > 0.0);
    CHECK(verify_certificate(cert, sorter, metric));
  }
}
