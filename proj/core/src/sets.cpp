#include "setgap/sets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <utility>

#include "setgap/errors.hpp"
#include "setgap/random.hpp"

namespace setgap {

namespace {

// Exact component-wise order on raw coordinates. Total on distinct
// finite vectors of equal dimension.
bool raw_less(const Vec& a, const Vec& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return a[i] < b[i];
  }
  return false;
}

bool exactly_equal(const Vec& a, const Vec& b) {
  return a.size() == b.size() && (a.array() == b.array()).all();
}

void validate_points(const std::vector<Vec>& pts) {
  if (pts.size() < 2)
    throw ConstructionError("a point set needs at least 2 elements");
  const auto d = pts.front().size();
  if (d < 2) throw ConstructionError("points must have dimension at least 2");
  for (const Vec& p : pts) {
    if (p.size() != d)
      throw DimensionError("point set elements have mixed dimensions");
    if (!p.allFinite())
      throw ConstructionError("point set elements must be finite");
  }
  std::vector<const Vec*> order;
  order.reserve(pts.size());
  for (const Vec& p : pts) order.push_back(&p);
  std::sort(order.begin(), order.end(),
            [](const Vec* a, const Vec* b) { return raw_less(*a, *b); });
  for (size_t i = 1; i < order.size(); ++i) {
    if (exactly_equal(*order[i - 1], *order[i]))
      throw ConstructionError("point set elements must be pairwise distinct");
  }
}

}  // namespace

PointSet::PointSet(std::vector<Vec> points) : points_(std::move(points)) {
  validate_points(points_);
}

PointSet PointSet::sample(int n, int d, Rng& rng, double lo, double hi) {
  if (n < 2) throw ConstructionError("a point set needs at least 2 elements");
  if (d < 2) throw ConstructionError("points must have dimension at least 2");
  if (!(lo < hi)) throw ConstructionError("sample: lo must be below hi");
  std::vector<Vec> pts;
  pts.reserve(static_cast<size_t>(n));
  while (static_cast<int>(pts.size()) < n) {
    Vec p(d);
    for (int i = 0; i < d; ++i) p[i] = rng.range(lo, hi);
    const bool dup = std::any_of(pts.begin(), pts.end(), [&](const Vec& q) {
      return exactly_equal(p, q);
    });
    if (!dup) pts.push_back(std::move(p));
  }
  return PointSet(std::move(pts));
}

std::vector<Vec> PointSet::canonical_points() const {
  std::vector<Vec> out = points_;
  std::sort(out.begin(), out.end(), raw_less);
  return out;
}

PointSet PointSet::with_replaced(int index, Vec p) const {
  if (index < 0 || index >= size())
    throw ConstructionError("with_replaced: index out of range");
  std::vector<Vec> pts = points_;
  pts[static_cast<size_t>(index)] = std::move(p);
  return PointSet(std::move(pts));
}

bool PointSet::operator==(const PointSet& other) const {
  if (size() != other.size() || dim() != other.dim()) return false;
  const auto a = canonical_points();
  const auto b = other.canonical_points();
  for (size_t i = 0; i < a.size(); ++i) {
    if (!exactly_equal(a[i], b[i])) return false;
  }
  return true;
}

OutputMatrix::OutputMatrix(Mat m) : m_(std::move(m)) {
  if (m_.rows() < 1 || m_.cols() < 1)
    throw ConstructionError("output matrix must be non-empty");
  if (!m_.allFinite())
    throw ConstructionError("output matrix entries must be finite");
}

OutputMatrix OutputMatrix::from_rows(const std::vector<Vec>& rows) {
  if (rows.empty()) throw ConstructionError("output matrix must be non-empty");
  const auto d = rows.front().size();
  Mat m(static_cast<Eigen::Index>(rows.size()), d);
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != d)
      throw DimensionError("output rows have mixed dimensions");
    m.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  }
  return OutputMatrix(std::move(m));
}

bool Permutation::is_bijection() const {
  std::vector<bool> seen(map.size(), false);
  for (int v : map) {
    if (v < 0 || v >= static_cast<int>(map.size())) return false;
    if (seen[static_cast<size_t>(v)]) return false;
    seen[static_cast<size_t>(v)] = true;
  }
  return true;
}

SortMap::SortMap(OrderSpec ord) : ord_(std::move(ord)) {}

OutputMatrix SortMap::apply(const PointSet& s) const {
  if (s.dim() != ord_.dim())
    throw DimensionError("apply: set dimension " + std::to_string(s.dim()) +
                         " does not match order dimension " +
                         std::to_string(ord_.dim()));
  std::vector<int> idx(static_cast<size_t>(s.size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    return lex_compare(s[a], s[b], ord_) == Ordering::Less;
  });
  Mat m(s.size(), s.dim());
  for (int r = 0; r < s.size(); ++r) m.row(r) = s[idx[static_cast<size_t>(r)]];
  return OutputMatrix(std::move(m));
}

std::string SortMap::describe() const {
  return "sort(d=" + std::to_string(ord_.dim()) + ")";
}

RegionSwapMap::RegionSwapMap(OrderSpec ord, double boundary)
    : ord_(std::move(ord)), boundary_(boundary) {
  if (std::isnan(boundary_))
    throw ConstructionError("region boundary must not be NaN");
}

OutputMatrix RegionSwapMap::apply(const PointSet& s) const {
  OutputMatrix sorted = SortMap(ord_).apply(s);
  if (coordinate_sum(s) > boundary_) {
    Mat m = sorted.matrix();
    m.row(0).swap(m.row(1));
    return OutputMatrix(std::move(m));
  }
  return sorted;
}

std::string RegionSwapMap::describe() const {
  return "region-swap(d=" + std::to_string(ord_.dim()) +
         ", boundary=" + std::to_string(boundary_) + ")";
}

RegionSwapMap region_swap_map(OrderSpec ord, double boundary) {
  return RegionSwapMap(std::move(ord), boundary);
}

PointSet row_multiset(const OutputMatrix& m) {
  std::vector<Vec> rows;
  rows.reserve(static_cast<size_t>(m.rows()));
  for (int i = 0; i < m.rows(); ++i) rows.push_back(m.row(i));
  try {
    return PointSet(std::move(rows));
  } catch (const ConstructionError& e) {
    throw ConstructionError(std::string("matrix rows do not form a set: ") +
                            e.what());
  }
}

double coordinate_sum(const PointSet& s) {
  double total = 0.0;
  for (const Vec& p : s.canonical_points()) total += p.sum();
  return total;
}

Permutation infer_pattern(const OutputMatrix& m, const PointSet& s) {
  if (m.rows() != s.size() || m.dim() != s.dim())
    throw DimensionError("infer_pattern: shape mismatch");
  Permutation perm;
  perm.map.resize(static_cast<size_t>(m.rows()), -1);
  for (int r = 0; r < m.rows(); ++r) {
    const Vec row = m.row(r);
    int found = -1;
    for (int i = 0; i < s.size(); ++i) {
      if (exactly_equal(row, s[i])) {
        found = i;
        break;
      }
    }
    if (found < 0)
      throw Error("infer_pattern: row " + std::to_string(r) +
                  " matches no input element exactly");
    perm.map[static_cast<size_t>(r)] = found;
  }
  if (!perm.is_bijection())
    throw Error("infer_pattern: rows do not use each element exactly once");
  return perm;
}

std::optional<Permutation> match_rows(const OutputMatrix& m, const PointSet& s,
                                      double tol) {
  if (m.rows() != s.size() || m.dim() != s.dim()) return std::nullopt;
  std::vector<bool> used(static_cast<size_t>(s.size()), false);
  Permutation perm;
  perm.map.resize(static_cast<size_t>(m.rows()), -1);
  for (int r = 0; r < m.rows(); ++r) {
    const Vec row = m.row(r);
    int best = -1;
    double best_dist = std::numeric_limits<double>::infinity();
    for (int i = 0; i < s.size(); ++i) {
      if (used[static_cast<size_t>(i)]) continue;
      const double dist = (row - s[i]).norm();
      if (dist < best_dist) {
        best_dist = dist;
        best = i;
      }
    }
    if (best < 0) return std::nullopt;
    if ((row - s[best]).cwiseAbs().maxCoeff() > tol) return std::nullopt;
    used[static_cast<size_t>(best)] = true;
    perm.map[static_cast<size_t>(r)] = best;
  }
  return perm;
}

ClassifyResult classify(const SetMap& map, const OrderSpec& ord, int samples,
                        std::uint64_t seed, int set_size) {
  if (samples < 1) throw ConstructionError("classify: samples must be positive");
  if (map.dim() != ord.dim())
    throw DimensionError("classify: map and order dimensions differ");
  const int n = map.fixed_size().value_or(set_size);
  Rng rng(seed);
  for (int k = 0; k < samples; ++k) {
    PointSet s = PointSet::sample(n, map.dim(), rng);
    OutputMatrix m = map.apply(s);
    for (int r = 0; r + 1 < m.rows(); ++r) {
      if (lex_compare(m.row(r), m.row(r + 1), ord) != Ordering::Less) {
        return ClassifyResult{ClassifyVerdict::NotSorting, s, k + 1};
      }
    }
  }
  return ClassifyResult{ClassifyVerdict::SortingUnder, std::nullopt, samples};
}

}  // namespace setgap
