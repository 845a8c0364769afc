#include "setgap/order.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "setgap/errors.hpp"
#include "setgap/random.hpp"

namespace setgap {

namespace {
// Max |inverse * basis - identity| entry tolerated at construction.
constexpr double kInverseResidualGate = 1e-9;
}  // namespace

double singularity_tolerance(const Mat& basis) {
  const double maxnorm = basis.cwiseAbs().maxCoeff();
  return 1e-8 * std::pow(maxnorm, static_cast<double>(basis.cols()));
}

OrderSpec::OrderSpec(Mat basis, Mat inverse, Eigen::PartialPivLU<Mat> lu)
    : basis_(std::move(basis)),
      inverse_(std::move(inverse)),
      lu_(std::move(lu)) {
  // Covers the worst-case coordinate noise admitted by the residual gate:
  // d entries each off by up to kInverseResidualGate, plus slack.
  zero_floor_ = 1e-8 + 1e-9 * static_cast<double>(dim());
}

OrderSpec OrderSpec::canonical(int d) {
  if (d < 2) throw ConstructionError("order dimension must be at least 2");
  Mat id = Mat::Identity(d, d);
  Eigen::PartialPivLU<Mat> lu(id);
  return OrderSpec(id, Mat::Identity(d, d), std::move(lu));
}

OrderSpec OrderSpec::from_basis(Mat basis) {
  if (basis.rows() != basis.cols())
    throw ConstructionError("basis must be square");
  const auto d = basis.cols();
  if (d < 2) throw ConstructionError("order dimension must be at least 2");
  if (!basis.allFinite())
    throw ConstructionError("basis entries must be finite");
  Eigen::PartialPivLU<Mat> lu(basis);
  const double det = lu.determinant();
  if (!(std::abs(det) > singularity_tolerance(basis)))
    throw ConstructionError("basis is singular or nearly singular, |det| = " +
                            std::to_string(std::abs(det)));
  Mat inverse = lu.inverse();
  const double residual =
      (inverse * basis - Mat::Identity(d, d)).cwiseAbs().maxCoeff();
  if (!(residual <= kInverseResidualGate))
    throw ConstructionError(
        "basis too ill-conditioned, inverse residual = " +
        std::to_string(residual));
  return OrderSpec(std::move(basis), std::move(inverse), std::move(lu));
}

OrderSpec OrderSpec::random(int d, std::uint64_t seed) {
  if (d < 2) throw ConstructionError("order dimension must be at least 2");
  Rng rng(seed);
  for (;;) {
    Mat b(d, d);
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) b(r, c) = rng.range(-1.0, 1.0);
    try {
      return from_basis(std::move(b));
    } catch (const ConstructionError&) {
      // resample
    }
  }
}

Vec OrderSpec::basis_vector(int index) const {
  if (index < 1 || index > dim())
    throw ConstructionError("basis index must be in [1, d], got " +
                            std::to_string(index));
  return basis_.col(index - 1);
}

Vec OrderSpec::coordinates(const Vec& x) const {
  if (x.size() != dim())
    throw DimensionError("coordinates: vector has dimension " +
                         std::to_string(x.size()) + ", order expects " +
                         std::to_string(dim()));
  // The cached inverse is cheaper and, for the identity basis, exact.
  if (dim() <= 4) return inverse_ * x;
  return lu_.solve(x);
}

Ordering lex_compare(const Vec& x, const Vec& y, const OrderSpec& ord) {
  if (x.size() != y.size() || x.size() != ord.dim())
    throw DimensionError("lex_compare: dimension mismatch");
  if ((x.array() == y.array()).all()) return Ordering::Equal;
  const Vec delta = ord.coordinates(x - y);
  const double floor = ord.zero_floor() * delta.cwiseAbs().maxCoeff();
  for (Eigen::Index j = 0; j < delta.size(); ++j) {
    const double c = delta[j];
    if (std::abs(c) > floor)
      return c < 0.0 ? Ordering::Less : Ordering::Greater;
  }
  // All basis coordinates of the difference rounded to exact zero. Distinct
  // vectors must still compare unequal; raw component order breaks the tie.
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i] != y[i]) return x[i] < y[i] ? Ordering::Less : Ordering::Greater;
  }
  return Ordering::Equal;
}

}  // namespace setgap
