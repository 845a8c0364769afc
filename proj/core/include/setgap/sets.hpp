#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "setgap/order.hpp"

namespace setgap {

class Rng;

/// A set of n >= 2 pairwise-distinct points in R^d, d >= 2. Distinctness is
/// exact float inequality. Storage order is incidental: two PointSets are
/// equal when they hold the same points in any order.
class PointSet {
 public:
  explicit PointSet(std::vector<Vec> points);

  /// n points uniform in [lo, hi]^d, resampled on exact collision.
  static PointSet sample(int n, int d, Rng& rng, double lo = -1.0,
                         double hi = 1.0);

  int size() const { return static_cast<int>(points_.size()); }
  int dim() const { return static_cast<int>(points_.front().size()); }
  const Vec& operator[](int i) const { return points_[static_cast<size_t>(i)]; }
  const std::vector<Vec>& points() const { return points_; }

  /// The points sorted by raw component order. Canonical across storage
  /// orders, so anything computed from it is storage-order independent.
  std::vector<Vec> canonical_points() const;

  PointSet with_replaced(int index, Vec p) const;

  bool operator==(const PointSet& other) const;
  bool operator!=(const PointSet& other) const { return !(*this == other); }

 private:
  std::vector<Vec> points_;
};

/// n x d matrix emitted by a set map, one row per set element.
class OutputMatrix {
 public:
  explicit OutputMatrix(Mat m);
  static OutputMatrix from_rows(const std::vector<Vec>& rows);

  int rows() const { return static_cast<int>(m_.rows()); }
  int dim() const { return static_cast<int>(m_.cols()); }
  Vec row(int i) const { return m_.row(i).transpose(); }
  const Mat& matrix() const { return m_; }

 private:
  Mat m_;
};

/// Row-to-source assignment of an output matrix: map[r] is the index of the
/// input element occupying row r.
struct Permutation {
  std::vector<int> map;
  bool is_bijection() const;
  bool operator==(const Permutation& other) const { return map == other.map; }
  bool operator!=(const Permutation& other) const { return !(*this == other); }
};

/// A map from point sets to matrices whose rows are exactly the input
/// elements, in a map-chosen order. Which element lands in which row is the
/// map's row assignment; every member of this family changes its assignment
/// somewhere, and that is what the witness machinery certifies.
class SetMap {
 public:
  virtual ~SetMap() = default;
  virtual OutputMatrix apply(const PointSet& s) const = 0;
  virtual int dim() const = 0;
  /// Set size the map insists on, if any (wire-served maps fix one).
  virtual std::optional<int> fixed_size() const { return std::nullopt; }
  virtual std::string describe() const = 0;
};

/// Rows ascending under the order.
class SortMap final : public SetMap {
 public:
  explicit SortMap(OrderSpec ord);
  OutputMatrix apply(const PointSet& s) const override;
  int dim() const override { return ord_.dim(); }
  std::string describe() const override;
  const OrderSpec& order() const { return ord_; }

 private:
  OrderSpec ord_;
};

/// Sorts, then swaps the first two rows whenever the sum of every coordinate
/// of every element exceeds the boundary. Still emits the input elements as
/// rows, so it stays in the map family, but it is not a sorting operation
/// once the swap can fire. boundary = +infinity never fires and the map
/// degenerates to SortMap.
class RegionSwapMap final : public SetMap {
 public:
  RegionSwapMap(OrderSpec ord, double boundary);
  OutputMatrix apply(const PointSet& s) const override;
  int dim() const override { return ord_.dim(); }
  std::string describe() const override;
  const OrderSpec& order() const { return ord_; }
  double boundary() const { return boundary_; }

 private:
  OrderSpec ord_;
  double boundary_;
};

RegionSwapMap region_swap_map(OrderSpec ord, double boundary);

/// Rows of m as a PointSet. Throws if rows are not pairwise distinct, since
/// such a matrix cannot have come from a set.
PointSet row_multiset(const OutputMatrix& m);

/// Sum of all coordinates of all elements, accumulated in canonical order so
/// the value does not depend on storage order.
double coordinate_sum(const PointSet& s);

/// Row assignment of m relative to s, matching rows to elements by exact
/// float equality. Throws if any row has no exact source or sources repeat.
Permutation infer_pattern(const OutputMatrix& m, const PointSet& s);

/// Tolerant variant for round-tripped outputs: each row is matched to the
/// nearest unused element, accepted when within tol per coordinate.
std::optional<Permutation> match_rows(const OutputMatrix& m, const PointSet& s,
                                      double tol);

enum class ClassifyVerdict { SortingUnder, NotSorting };

struct ClassifyResult {
  ClassifyVerdict verdict;
  std::optional<PointSet> counterexample;
  int samples_run = 0;
};

/// Sampling falsifier: draws sets uniform in [-1, 1]^d and checks output rows
/// ascend under ord. One violation settles NotSorting; exhausting the budget
/// reports SortingUnder, which is evidence, not proof.
ClassifyResult classify(const SetMap& map, const OrderSpec& ord, int samples,
                        std::uint64_t seed, int set_size = 4);

}  // namespace setgap
