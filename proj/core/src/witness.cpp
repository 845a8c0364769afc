#include "setgap/witness.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <set>
#include <string>
#include <utility>

#include "setgap/errors.hpp"
#include "setgap/random.hpp"

namespace setgap {

namespace {

constexpr double kGapSlack = 1e-9;

MetricSpec resolve_metric(const std::optional<MetricSpec>& m, int d) {
  return m ? *m : MetricSpec::identity(d);
}

std::vector<double> vec_key(const Vec& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

std::vector<double> set_key(const PointSet& s) {
  std::vector<double> key;
  key.reserve(static_cast<size_t>(s.size() * s.dim()));
  for (const Vec& p : s.canonical_points())
    key.insert(key.end(), p.data(), p.data() + p.size());
  return key;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  if (n == 0) return 0.0;
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

double certificate_ratio(const WitnessCertificate& cert) {
  const double floor = std::numeric_limits<double>::min();
  return cert.achieved_gap / std::max(cert.delta, floor);
}

std::vector<Vec> default_fillers(const OrderSpec& ord, const Vec& anchor,
                                 double epsilon_in, int count) {
  if (count < 0) throw ConstructionError("filler count must be non-negative");
  if (!(epsilon_in > 0.0))
    throw ConstructionError("epsilon_in must be positive");
  const Vec v1 = ord.basis_vector(1);
  std::vector<Vec> out;
  out.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double magnitude = 10.0 * epsilon_in * static_cast<double>(i / 2 + 2);
    const double offset = (i % 2 == 0) ? magnitude : -magnitude;
    out.push_back(anchor + offset * v1);
  }
  return out;
}

namespace {

struct SwapProbe {
  PointSet theta;
  PointSet theta_prime;
  OutputMatrix m;
  OutputMatrix m_prime;
};

SwapProbe probe_sorting_swap(const SetMap& map, const OrderSpec& ord,
                             const SortingWitnessRequest& req) {
  const int d = ord.dim();
  if (map.dim() != d)
    throw DimensionError("sorting witness: map and order dimensions differ");
  if (req.anchor.size() != d)
    throw DimensionError("sorting witness: anchor has wrong dimension");
  if (req.j <= 1)
    throw ConstructionError("j must exceed 1: direction v_1 cannot carry the "
                            "offset that v_1 itself undercuts");
  if (req.j > d)
    throw ConstructionError("j must be at most d = " + std::to_string(d));
  if (!(req.epsilon_in > 0.0))
    throw ConstructionError(
        "epsilon_in must be positive: a zero offset collapses b onto the "
        "anchor");
  if (!(req.tau > 0.0)) throw ConstructionError("tau must be positive");
  if (const auto fixed = map.fixed_size();
      fixed && *fixed != static_cast<int>(req.fillers.size()) + 2)
    throw ConstructionError(
        "map expects sets of size " + std::to_string(*fixed) + ", request has " +
        std::to_string(req.fillers.size() + 2));

  const Vec v1 = ord.basis_vector(1);
  const Vec vj = ord.basis_vector(req.j);
  const Vec a = req.anchor;
  const Vec b = a + req.epsilon_in * vj;
  const Vec c = b - req.tau * v1;

  if (lex_compare(a, b, ord) != Ordering::Less ||
      lex_compare(c, a, ord) != Ordering::Less)
    throw ConstructionError(
        "tau or epsilon_in is below the comparator resolution: the intended "
        "ordering c < a < b is not realized");

  // Fillers must keep at least 10 * epsilon_in of v_1 coordinate between
  // themselves and the [c, b] interval, or the swap is no longer adjacent.
  const double c1a = ord.coordinates(a)[0];
  const double lo = c1a - req.tau;
  const double hi = c1a;
  for (const Vec& u : req.fillers) {
    if (u.size() != d)
      throw DimensionError("sorting witness: filler has wrong dimension");
    const double c1u = ord.coordinates(u)[0];
    const bool clear = c1u <= lo - 10.0 * req.epsilon_in ||
                       c1u >= hi + 10.0 * req.epsilon_in;
    if (!clear)
      throw ConstructionError(
          "filler interferes with the swap interval (tau too large or filler "
          "too close along v_1); the adjacent-transposition analysis needs "
          "10 * epsilon_in of clearance");
  }

  std::vector<Vec> pts = req.fillers;
  pts.push_back(a);
  pts.push_back(b);
  PointSet theta(std::move(pts));

  std::vector<Vec> pts_prime = req.fillers;
  pts_prime.push_back(a);
  pts_prime.push_back(c);
  PointSet theta_prime(std::move(pts_prime));

  OutputMatrix m = map.apply(theta);
  OutputMatrix m_prime = map.apply(theta_prime);

  const int n = theta.size();
  const int ia = n - 2;  // storage index of the anchor in both sets
  const int ib = n - 1;  // storage index of b in theta, c in theta_prime
  Permutation p = infer_pattern(m, theta);
  Permutation pp = infer_pattern(m_prime, theta_prime);

  std::vector<int> row_of(static_cast<size_t>(n)), row_of_p(
      static_cast<size_t>(n));
  for (int r = 0; r < n; ++r) {
    row_of[static_cast<size_t>(p.map[static_cast<size_t>(r)])] = r;
    row_of_p[static_cast<size_t>(pp.map[static_cast<size_t>(r)])] = r;
  }

  const int ra = row_of[static_cast<size_t>(ia)];
  bool structure_ok = row_of[static_cast<size_t>(ib)] == ra + 1 &&
                      row_of_p[static_cast<size_t>(ib)] == ra &&
                      row_of_p[static_cast<size_t>(ia)] == ra + 1;
  for (int i = 0; structure_ok && i < n - 2; ++i)
    structure_ok = row_of[static_cast<size_t>(i)] ==
                   row_of_p[static_cast<size_t>(i)];
  if (!structure_ok)
    throw VerificationError(
        "map did not realize the expected adjacent transposition; it is not "
        "acting as a sort under this order near the anchor");

  return SwapProbe{std::move(theta), std::move(theta_prime), std::move(m),
                   std::move(m_prime)};
}

}  // namespace

WitnessCertificate sorting_witness_for_map(const SetMap& map,
                                           const OrderSpec& ord,
                                           const SortingWitnessRequest& req,
                                           const MetricSpec& metric) {
  SwapProbe probe = probe_sorting_swap(map, ord, req);

  const Vec b = req.anchor + req.epsilon_in * ord.basis_vector(req.j);
  WitnessCertificate cert(WitnessKind::Sorting, std::move(probe.theta),
                          std::move(probe.theta_prime));
  cert.anchor = req.anchor;
  cert.j = req.j;
  cert.tau = req.tau;
  cert.epsilon_in = req.epsilon_in;
  cert.epsilon = (b - req.anchor).norm();
  cert.achieved_gap = frobenius_diff(probe.m, probe.m_prime);
  cert.delta = d_theta(cert.theta, cert.theta_prime, metric);
  if (!(cert.achieved_gap + kGapSlack >= cert.epsilon))
    throw VerificationError("witness gap fell below its lower bound");
  return cert;
}

WitnessCertificate sorting_witness(const OrderSpec& ord,
                                   const SortingWitnessRequest& req,
                                   const MetricSpec& metric) {
  return sorting_witness_for_map(SortMap(ord), ord, req, metric);
}

LinePath::LinePath(PointSet base_, int moving_index_, Vec start_, Vec end_,
                   double t_lo_, double t_hi_)
    : base(std::move(base_)),
      moving_index(moving_index_),
      start(std::move(start_)),
      end(std::move(end_)),
      t_lo(t_lo_),
      t_hi(t_hi_) {
  if (moving_index < 0 || moving_index >= base.size())
    throw ConstructionError("path moving_index out of range");
  if (start.size() != base.dim() || end.size() != base.dim())
    throw DimensionError("path endpoints have wrong dimension");
  if (!(t_lo < t_hi))
    throw ConstructionError("path needs t_lo < t_hi");
  if (!start.allFinite() || !end.allFinite())
    throw ConstructionError("path endpoints must be finite");
}

PointSet LinePath::at(double t) const {
  if (!(t >= t_lo && t <= t_hi))
    throw ConstructionError("path parameter t = " + std::to_string(t) +
                            " outside [" + std::to_string(t_lo) + ", " +
                            std::to_string(t_hi) + "]");
  const double s = (t - t_lo) / (t_hi - t_lo);
  const Vec p = start + s * (end - start);
  try {
    return base.with_replaced(moving_index, p);
  } catch (const ConstructionError&) {
    throw ConstructionError("path leaves the set domain at t = " +
                            std::to_string(t) +
                            ": the moving element collides with a fixed one");
  }
}

namespace {

struct PathState {
  double t;
  PointSet theta;
  OutputMatrix m;
  Permutation pattern;
};

PathState eval_path(const SetMap& map, const LinePath& path, double t) {
  PointSet theta = path.at(t);
  OutputMatrix m = map.apply(theta);
  Permutation pattern = infer_pattern(m, theta);
  return PathState{t, std::move(theta), std::move(m), std::move(pattern)};
}

}  // namespace

WitnessCertificate nonsorting_witness(const SetMap& map, const LinePath& path,
                                      double t_lo, double t_hi, double tol,
                                      const MetricSpec& metric,
                                      int max_iterations) {
  if (map.dim() != path.base.dim())
    throw DimensionError("nonsorting witness: map and path dimensions differ");
  if (const auto fixed = map.fixed_size(); fixed && *fixed != path.base.size())
    throw ConstructionError("map expects sets of size " +
                            std::to_string(*fixed) + ", path carries " +
                            std::to_string(path.base.size()));
  if (!(t_lo < t_hi))
    throw ConstructionError("nonsorting witness needs t_lo < t_hi");
  if (!(tol > 0.0)) throw ConstructionError("tol must be positive");
  if (max_iterations < 1)
    throw ConstructionError("max_iterations must be positive");

  PathState lo = eval_path(map, path, t_lo);
  PathState hi = eval_path(map, path, t_hi);
  if (lo.pattern == hi.pattern)
    throw VerificationError(
        "no responsibility change between the path endpoints: the map "
        "assigns rows identically at t_lo and t_hi");

  int iterations = 0;
  while (d_theta(lo.theta, hi.theta, metric) >= tol &&
         iterations < max_iterations) {
    const double mid = 0.5 * (lo.t + hi.t);
    if (mid == lo.t || mid == hi.t) break;  // bracket at float resolution
    PathState m = eval_path(map, path, mid);
    if (m.pattern == lo.pattern)
      lo = std::move(m);
    else
      hi = std::move(m);
    ++iterations;
  }
  const double delta = d_theta(lo.theta, hi.theta, metric);
  const bool converged = delta < tol;

  const int n = lo.theta.size();
  std::vector<int> row_lo(static_cast<size_t>(n)), row_hi(
      static_cast<size_t>(n));
  for (int r = 0; r < n; ++r) {
    row_lo[static_cast<size_t>(lo.pattern.map[static_cast<size_t>(r)])] = r;
    row_hi[static_cast<size_t>(hi.pattern.map[static_cast<size_t>(r)])] = r;
  }

  // Shared elements that changed rows. The bracket ends differ only in the
  // moving element, so each of these sits in both sets yet answers for a
  // different row, forcing the output gap from below.
  std::vector<int> moved;
  for (int i = 0; i < n; ++i) {
    if (i == path.moving_index) continue;
    if (row_lo[static_cast<size_t>(i)] != row_hi[static_cast<size_t>(i)])
      moved.push_back(i);
  }
  if (moved.empty())
    throw VerificationError(
        "row assignments differ only in the moving element; no shared "
        "element was displaced");

  double eps_sq = std::numeric_limits<double>::infinity();
  for (int i : moved) {
    const Vec& x = lo.theta[i];
    double near_lo = std::numeric_limits<double>::infinity();
    double near_hi = std::numeric_limits<double>::infinity();
    for (int k = 0; k < n; ++k) {
      if (k == i) continue;
      near_lo = std::min(near_lo, (x - lo.theta[k]).squaredNorm());
      near_hi = std::min(near_hi, (x - hi.theta[k]).squaredNorm());
    }
    eps_sq = std::min(eps_sq, near_lo + near_hi);
  }

  std::sort(moved.begin(), moved.end(), [&](int a, int b) {
    return row_lo[static_cast<size_t>(a)] < row_lo[static_cast<size_t>(b)];
  });

  WitnessCertificate cert(WitnessKind::NonSorting, lo.theta, hi.theta);
  cert.anchor = lo.theta[moved.front()];
  cert.path_t_lo = lo.t;
  cert.path_t_hi = hi.t;
  cert.iterations = iterations;
  cert.converged = converged;
  cert.epsilon = std::sqrt(eps_sq);
  cert.achieved_gap = frobenius_diff(lo.m, hi.m);
  cert.delta = delta;
  cert.swapped_pair.push_back(lo.theta[moved.front()]);
  cert.swapped_pair.push_back(moved.size() >= 2
                                  ? lo.theta[moved[1]]
                                  : lo.theta[path.moving_index]);
  if (!(cert.achieved_gap + kGapSlack >= cert.epsilon))
    throw VerificationError("witness gap fell below its lower bound");
  return cert;
}

namespace {

SweepResult run_sweep(const SetMap* map, const OrderSpec& ord, int count,
                      std::uint64_t seed, double tau,
                      const SweepOptions& opts) {
  if (count < 1) throw ConstructionError("sweep count must be positive");
  if (opts.n < 2) throw ConstructionError("sweep set size must be at least 2");
  if (!(opts.anchor_lo < opts.anchor_hi))
    throw ConstructionError("sweep anchor box is empty");
  const int d = ord.dim();
  const MetricSpec metric = resolve_metric(opts.metric, d);

  Rng rng(seed);
  std::vector<Vec> anchors;
  anchors.reserve(static_cast<size_t>(count));
  std::set<std::vector<double>> seen;
  while (static_cast<int>(anchors.size()) < count) {
    Vec a(d);
    for (int i = 0; i < d; ++i) a[i] = rng.range(opts.anchor_lo, opts.anchor_hi);
    if (seen.insert(vec_key(a)).second) anchors.push_back(std::move(a));
  }

  auto build = [&](const Vec& anchor) {
    SortingWitnessRequest req;
    req.anchor = anchor;
    req.fillers = default_fillers(ord, anchor, opts.epsilon_in, opts.n - 2);
    req.epsilon_in = opts.epsilon_in;
    req.j = opts.j;
    req.tau = tau;
    return map ? sorting_witness_for_map(*map, ord, req, metric)
               : sorting_witness(ord, req, metric);
  };

  std::vector<WitnessCertificate> certs;
  certs.reserve(static_cast<size_t>(count));
  if (opts.threads <= 1) {
    for (const Vec& a : anchors) certs.push_back(build(a));
  } else {
    const int workers = std::min(opts.threads, count);
    std::vector<std::future<std::vector<WitnessCertificate>>> futures;
    futures.reserve(static_cast<size_t>(workers));
    const int chunk = (count + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const int begin = w * chunk;
      const int end = std::min(count, begin + chunk);
      if (begin >= end) break;
      futures.push_back(std::async(std::launch::async, [&, begin, end] {
        std::vector<WitnessCertificate> part;
        part.reserve(static_cast<size_t>(end - begin));
        for (int i = begin; i < end; ++i)
          part.push_back(build(anchors[static_cast<size_t>(i)]));
        return part;
      }));
    }
    for (auto& f : futures) {
      auto part = f.get();
      for (auto& c : part) certs.push_back(std::move(c));
    }
  }

  std::set<std::vector<double>> loci;
  std::vector<double> ratios;
  ratios.reserve(certs.size());
  for (const auto& c : certs) {
    loci.insert(set_key(c.theta));
    ratios.push_back(certificate_ratio(c));
  }

  SweepSummary summary;
  summary.count = count;
  summary.distinct_loci = static_cast<int>(loci.size());
  summary.min_ratio = *std::min_element(ratios.begin(), ratios.end());
  summary.max_ratio = *std::max_element(ratios.begin(), ratios.end());
  summary.median_ratio = median_of(ratios);
  return SweepResult{std::move(certs), summary};
}

}  // namespace

SweepResult witness_sweep(const OrderSpec& ord, int count, std::uint64_t seed,
                          double tau, const SweepOptions& opts) {
  return run_sweep(nullptr, ord, count, seed, tau, opts);
}

SweepResult witness_sweep_for_map(const SetMap& map, const OrderSpec& ord,
                                  int count, std::uint64_t seed, double tau,
                                  const SweepOptions& opts) {
  return run_sweep(&map, ord, count, seed, tau, opts);
}

bool verify_certificate(const WitnessCertificate& cert, const SetMap& map,
                        const MetricSpec& metric, double tol) {
  const OutputMatrix m = map.apply(cert.theta);
  const OutputMatrix m_prime = map.apply(cert.theta_prime);
  const double gap = frobenius_diff(m, m_prime);
  const double delta = d_theta(cert.theta, cert.theta_prime, metric);
  return std::abs(gap - cert.achieved_gap) <= tol &&
         std::abs(delta - cert.delta) <= tol &&
         cert.achieved_gap + tol >= cert.epsilon;
}

std::vector<LinePath> find_swap_paths(const SetMap& map, int n, int count,
                                      std::uint64_t seed, int attempt_budget) {
  if (count < 1) throw ConstructionError("path count must be positive");
  if (n < 2) throw ConstructionError("path set size must be at least 2");
  const int d = map.dim();
  Rng rng(seed);
  std::vector<LinePath> found;
  found.reserve(static_cast<size_t>(count));
  for (int attempt = 0;
       attempt < attempt_budget && static_cast<int>(found.size()) < count;
       ++attempt) {
    PointSet base = PointSet::sample(n, d, rng);
    const int moving = static_cast<int>(rng.below(static_cast<uint64_t>(n)));
    Vec end(d);
    for (int i = 0; i < d; ++i) end[i] = rng.range(-3.0, 3.0);
    try {
      LinePath path(base, moving, base[moving], end, 0.0, 1.0);
      const PathState s0 = eval_path(map, path, 0.0);
      const PathState s1 = eval_path(map, path, 1.0);
      if (s0.pattern != s1.pattern) found.push_back(std::move(path));
    } catch (const ConstructionError&) {
      // endpoint collision or degenerate path; try the next draw
    }
  }
  return found;
}

}  // namespace setgap
