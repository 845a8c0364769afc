#pragma once

#include <cstdint>

#include "setgap/sets.hpp"

namespace setgap {

enum class EncoderKind { Identity, Moments, RandomFeatures };

/// Per-element feature map phi: R^d -> R^k used inside the set metric.
/// Immutable once constructed; RandomFeatures weights are fixed by the seed.
class Encoder {
 public:
  static Encoder identity(int d);

  /// Per-coordinate power sums of degrees 1..max_degree, k = d * max_degree.
  /// With max_degree >= n the summed encoding separates sets of size n that
  /// the plain coordinate sum confuses.
  static Encoder moments(int d, int max_degree);

  /// tanh(W x + b) with W entries N(0, 1/d) and b uniform in [-1, 1].
  static Encoder random_features(int d, int k, std::uint64_t seed);

  EncoderKind kind() const { return kind_; }
  int input_dim() const { return d_; }
  int output_dim() const { return k_; }
  int max_degree() const { return degree_; }
  std::uint64_t seed() const { return seed_; }

  Vec operator()(const Vec& x) const;

 private:
  Encoder(EncoderKind kind, int d, int k) : kind_(kind), d_(d), k_(k) {}

  EncoderKind kind_;
  int d_ = 0;
  int k_ = 0;
  int degree_ = 0;
  std::uint64_t seed_ = 0;
  Mat w_;
  Vec b_;
};

/// Set metric parameters: encoder plus the norm exponent p, one of 1, 2, or
/// +infinity.
struct MetricSpec {
  Encoder encoder;
  double p = 2.0;

  static MetricSpec identity(int d, double p = 2.0);
};

/// Sum of phi over the elements, accumulated in canonical order so the value
/// is independent of storage order.
Vec sum_encoding(const PointSet& s, const Encoder& enc);

/// d(s, s') = || sum phi(s) - sum phi(s') ||_p. Permutation invariant by
/// construction and symmetric exactly. A pseudometric in general: with the
/// identity encoder, distinct sets sharing a coordinate sum get distance 0.
/// Moments of degree >= n restore separation for size-n sets.
double d_theta(const PointSet& a, const PointSet& b, const MetricSpec& spec);

/// Frobenius norm of the entrywise difference. Shapes must match.
double frobenius_diff(const OutputMatrix& a, const OutputMatrix& b);

/// Sampled local Lipschitz constant of the encoder near x: max ratio
/// ||phi(x + h u) - phi(x)|| / ||h u|| over random directions u and step
/// sizes h in [radius/100, radius].
double lipschitz_estimate(const Encoder& enc, const Vec& x, double radius,
                          int samples, std::uint64_t seed);

}  // namespace setgap
