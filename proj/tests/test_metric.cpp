#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "setgap/errors.hpp"
#include "setgap/metric.hpp"
#include "setgap/random.hpp"

using namespace setgap;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

PointSet make_set(std::initializer_list<Vec> pts) {
  return PointSet(std::vector<Vec>(pts));
}

PointSet shuffled(const PointSet& s, Rng& rng) {
  std::vector<Vec> pts = s.points();
  for (size_t i = pts.size(); i > 1; --i)
    std::swap(pts[i - 1], pts[rng.below(i)]);
  return PointSet(pts);
}

}  // namespace

TEST_CASE("identity metric hand values") {
  const MetricSpec m2 = MetricSpec::identity(2);
  const PointSet a = make_set({v2(0, 0), v2(1, 1)});
  const PointSet a_shuffled = make_set({v2(1, 1), v2(0, 0)});
  CHECK(d_theta(a, a_shuffled, m2) == 0.0);

  const PointSet b = make_set({v2(0.2, 0), v2(1, 0.5)});
  // Encoded sums: (1, 1) versus (1.2, 0.5), difference (-0.2, 0.5).
  CHECK(d_theta(a, b, m2) == doctest::Approx(std::sqrt(0.29)).epsilon(1e-12));
  CHECK(d_theta(a, b, MetricSpec{Encoder::identity(2), 1.0}) ==
        doctest::Approx(0.7).epsilon(1e-12));
  CHECK(d_theta(a, b, MetricSpec{Encoder::identity(2), kInf}) ==
        doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("identity is a pseudometric; moments separate") {
  // Same coordinate sums (2, 2), different sets.
  const PointSet a = make_set({v2(0, 0), v2(2, 2)});
  const PointSet b = make_set({v2(1, 0), v2(1, 2)});
  CHECK(d_theta(a, b, MetricSpec::identity(2)) == 0.0);

  // Degree-2 sums: a gives (2,2,4,4), b gives (2,2,2,4); distance 2 exactly.
  const MetricSpec moments{Encoder::moments(2, 2), 2.0};
  CHECK(d_theta(a, b, moments) == 2.0);
}

TEST_CASE("moments encoder layout is degree-major") {
  const Encoder enc = Encoder::moments(2, 3);
  CHECK(enc.output_dim() == 6);
  Vec x = v2(2, -1);
  Vec out = enc(x);
  CHECK(out[0] == 2.0);   // x1
  CHECK(out[1] == -1.0);  // x2
  CHECK(out[2] == 4.0);   // x1^2
  CHECK(out[3] == 1.0);   // x2^2
  CHECK(out[4] == 8.0);   // x1^3
  CHECK(out[5] == -1.0);  // x2^3
}

TEST_CASE("metric symmetry and shuffle invariance are exact") {
  Rng rng(2024);
  const std::vector<MetricSpec> specs = {
      MetricSpec::identity(3),
      MetricSpec{Encoder::moments(3, 2), 1.0},
      MetricSpec{Encoder::random_features(3, 16, 9), kInf},
  };
  for (int k = 0; k < 50; ++k) {
    const PointSet a = PointSet::sample(4, 3, rng);
    const PointSet b = PointSet::sample(4, 3, rng);
    for (const auto& spec : specs) {
      CHECK(d_theta(a, b, spec) == d_theta(b, a, spec));
      CHECK(d_theta(a, b, spec) == d_theta(shuffled(a, rng), b, spec));
      CHECK(d_theta(shuffled(a, rng), shuffled(b, rng), spec) ==
            d_theta(a, b, spec));
      CHECK(d_theta(a, a, spec) == 0.0);
    }
  }
}

TEST_CASE("triangle inequality within 1e-9") {
  Rng rng(11);
  const std::vector<MetricSpec> specs = {
      MetricSpec::identity(2),
      MetricSpec{Encoder::moments(2, 3), 2.0},
      MetricSpec{Encoder::random_features(2, 8, 3), 1.0},
  };
  for (int k = 0; k < 200; ++k) {
    const PointSet a = PointSet::sample(3, 2, rng);
    const PointSet b = PointSet::sample(3, 2, rng);
    const PointSet c = PointSet::sample(3, 2, rng);
    for (const auto& spec : specs) {
      CHECK(d_theta(a, c, spec) <=
            d_theta(a, b, spec) + d_theta(b, c, spec) + 1e-9);
    }
  }
}

TEST_CASE("frobenius_diff hand values") {
  Mat m1(2, 2), m2(2, 2);
  m1 << 0, 0, 1, 1;
  m2 << 1, 1, 0, 0;
  CHECK(frobenius_diff(OutputMatrix(m1), OutputMatrix(m1)) == 0.0);
  CHECK(frobenius_diff(OutputMatrix(m1), OutputMatrix(m2)) == 2.0);

  Mat a(1, 2), b(1, 2);
  a << 3, 4;
  b << 0, 0;
  CHECK(frobenius_diff(OutputMatrix(a), OutputMatrix(b)) == 5.0);

  Mat wide(1, 3);
  wide << 1, 2, 3;
  CHECK_THROWS_AS(frobenius_diff(OutputMatrix(a), OutputMatrix(wide)),
                  DimensionError);
}

TEST_CASE("random features are deterministic, bounded, and seed-sensitive") {
  const Encoder a = Encoder::random_features(2, 16, 42);
  const Encoder b = Encoder::random_features(2, 16, 42);
  const Encoder c = Encoder::random_features(2, 16, 43);
  const Vec x = v2(0.3, -0.7);
  CHECK(a(x) == b(x));
  CHECK(a(x) != c(x));
  CHECK(a(x).cwiseAbs().maxCoeff() < 1.0);
  CHECK(a.output_dim() == 16);
}

TEST_CASE("lipschitz estimate is about 1 for the identity") {
  const double lhat =
      lipschitz_estimate(Encoder::identity(2), v2(0.5, 0.5), 0.1, 64, 5);
  CHECK(lhat == doctest::Approx(1.0).epsilon(1e-9));

  // tanh features contract: the estimate stays below the spectral bound.
  const Encoder rf = Encoder::random_features(2, 16, 6);
  const double lrf = lipschitz_estimate(rf, v2(0, 0), 0.1, 64, 5);
  CHECK(lrf > 0.0);
  CHECK(lrf < 10.0);
}

TEST_CASE("invalid metric parameters throw") {
  const PointSet a = make_set({v2(0, 0), v2(1, 1)});
  const PointSet b = make_set({v2(0, 0), v2(1, 2)});
  CHECK_THROWS_AS(d_theta(a, b, MetricSpec{Encoder::identity(2), 3.0}),
                  ConstructionError);
  CHECK_THROWS_AS(d_theta(a, b, MetricSpec::identity(3)), DimensionError);
  CHECK_THROWS_AS(Encoder::moments(2, 0), ConstructionError);
  CHECK_THROWS_AS(Encoder::identity(0), ConstructionError);

  Vec x3(3);
  x3 << 1, 2, 3;
  CHECK_THROWS_AS(Encoder::identity(2)(x3), DimensionError);
}
