#include "setgap/metric.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "setgap/errors.hpp"
#include "setgap/random.hpp"

namespace setgap {

Encoder Encoder::identity(int d) {
  if (d < 1) throw ConstructionError("encoder input dimension must be positive");
  return Encoder(EncoderKind::Identity, d, d);
}

Encoder Encoder::moments(int d, int max_degree) {
  if (d < 1) throw ConstructionError("encoder input dimension must be positive");
  if (max_degree < 1)
    throw ConstructionError("moments degree must be at least 1");
  Encoder e(EncoderKind::Moments, d, d * max_degree);
  e.degree_ = max_degree;
  return e;
}

Encoder Encoder::random_features(int d, int k, std::uint64_t seed) {
  if (d < 1) throw ConstructionError("encoder input dimension must be positive");
  if (k < 1) throw ConstructionError("feature count must be positive");
  Encoder e(EncoderKind::RandomFeatures, d, k);
  e.seed_ = seed;
  Rng rng(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  e.w_.resize(k, d);
  for (int r = 0; r < k; ++r)
    for (int c = 0; c < d; ++c) e.w_(r, c) = scale * rng.normal();
  e.b_.resize(k);
  for (int r = 0; r < k; ++r) e.b_[r] = rng.range(-1.0, 1.0);
  return e;
}

Vec Encoder::operator()(const Vec& x) const {
  if (x.size() != d_)
    throw DimensionError("encoder expects dimension " + std::to_string(d_) +
                         ", got " + std::to_string(x.size()));
  switch (kind_) {
    case EncoderKind::Identity:
      return x;
    case EncoderKind::Moments: {
      Vec out(k_);
      Vec power = Vec::Ones(d_);
      for (int q = 0; q < degree_; ++q) {
        power = power.cwiseProduct(x);
        out.segment(static_cast<Eigen::Index>(q) * d_, d_) = power;
      }
      return out;
    }
    case EncoderKind::RandomFeatures:
      return ((w_ * x + b_).array().tanh()).matrix();
  }
  throw Error("unknown encoder kind");
}

MetricSpec MetricSpec::identity(int d, double p) {
  return MetricSpec{Encoder::identity(d), p};
}

namespace {

void validate_p(double p) {
  const bool ok = p == 1.0 || p == 2.0 ||
                  p == std::numeric_limits<double>::infinity();
  if (!ok) throw ConstructionError("metric exponent p must be 1, 2, or inf");
}

double pnorm(const Vec& v, double p) {
  if (p == 1.0) return v.lpNorm<1>();
  if (p == 2.0) return v.norm();
  return v.lpNorm<Eigen::Infinity>();
}

}  // namespace

Vec sum_encoding(const PointSet& s, const Encoder& enc) {
  if (s.dim() != enc.input_dim())
    throw DimensionError("sum_encoding: set dimension " +
                         std::to_string(s.dim()) +
                         " does not match encoder input " +
                         std::to_string(enc.input_dim()));
  Vec total = Vec::Zero(enc.output_dim());
  for (const Vec& p : s.canonical_points()) total += enc(p);
  return total;
}

double d_theta(const PointSet& a, const PointSet& b, const MetricSpec& spec) {
  validate_p(spec.p);
  if (a.dim() != b.dim())
    throw DimensionError("d_theta: sets have different dimensions");
  const Vec diff = sum_encoding(a, spec.encoder) - sum_encoding(b, spec.encoder);
  return pnorm(diff, spec.p);
}

double frobenius_diff(const OutputMatrix& a, const OutputMatrix& b) {
  if (a.rows() != b.rows() || a.dim() != b.dim())
    throw DimensionError("frobenius_diff: shape mismatch");
  return (a.matrix() - b.matrix()).norm();
}

double lipschitz_estimate(const Encoder& enc, const Vec& x, double radius,
                          int samples, std::uint64_t seed) {
  if (x.size() != enc.input_dim())
    throw DimensionError("lipschitz_estimate: dimension mismatch");
  if (!(radius > 0.0))
    throw ConstructionError("lipschitz_estimate: radius must be positive");
  if (samples < 1)
    throw ConstructionError("lipschitz_estimate: samples must be positive");
  Rng rng(seed);
  const Vec fx = enc(x);
  double best = 0.0;
  for (int k = 0; k < samples; ++k) {
    Vec u(x.size());
    double norm = 0.0;
    do {
      for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = rng.normal();
      norm = u.norm();
    } while (norm == 0.0);
    u /= norm;
    const double h = radius * std::pow(10.0, -2.0 * rng.unit());
    const double step = (enc(x + h * u) - fx).norm();
    if (step / h > best) best = step / h;
  }
  return best;
}

}  // namespace setgap
