#pragma once

#include <Eigen/Dense>
#include <Eigen/LU>
#include <cstdint>

namespace setgap {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class Ordering { Less, Equal, Greater };

/// A total order on R^d (d >= 2), represented as the lexicographic order on
/// coordinates in an invertible basis. Column i of the basis is v_{i+1}; the
/// first column is the most significant direction. Every such order is
/// non-Archimedean: no multiple of a later basis vector overtakes an earlier
/// one. Scalar weighting schemes cannot express these orders, which is why
/// the basis matrix itself is the representation.
class OrderSpec {
 public:
  /// Standard coordinate-wise lexicographic order (identity basis).
  static OrderSpec canonical(int d);

  /// Validates invertibility: |det| must exceed the singularity tolerance and
  /// the computed inverse must reproduce the identity to 1e-9 per entry.
  static OrderSpec from_basis(Mat basis);

  /// Entries uniform in [-1, 1], resampled until the basis passes validation.
  static OrderSpec random(int d, std::uint64_t seed);

  int dim() const { return static_cast<int>(basis_.cols()); }
  const Mat& basis() const { return basis_; }
  const Mat& inverse() const { return inverse_; }

  /// v_index, 1-based: basis_vector(1) is the most significant direction.
  Vec basis_vector(int index) const;

  /// Coordinates of x in this basis, i.e. the solution of basis * c = x.
  Vec coordinates(const Vec& x) const;

  /// Relative threshold below which a coordinate of a difference vector is
  /// treated as solver noise rather than signal.
  double zero_floor() const { return zero_floor_; }

 private:
  OrderSpec(Mat basis, Mat inverse, Eigen::PartialPivLU<Mat> lu);

  Mat basis_;
  Mat inverse_;
  Eigen::PartialPivLU<Mat> lu_;
  double zero_floor_ = 0.0;
};

/// |det| at or below this value rejects the basis, scaled by max-norm^d so
/// the test is invariant under scaling the whole matrix.
double singularity_tolerance(const Mat& basis);

/// Total-order comparison of x and y under ord. Equal requires exact float
/// equality of all components. Otherwise the difference x - y is expressed
/// in basis coordinates and the first coordinate above the noise floor
/// decides. Antisymmetric by construction: negating the difference flips
/// every intermediate quantity exactly.
Ordering lex_compare(const Vec& x, const Vec& y, const OrderSpec& ord);

}  // namespace setgap
