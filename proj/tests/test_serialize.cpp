#include <doctest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <string>
#include <vector>

#include "setgap/errors.hpp"
#include "setgap/metric.hpp"
#include "setgap/order.hpp"
#include "setgap/serialize.hpp"
#include "setgap/sets.hpp"
#include "setgap/transport.hpp"
#include "setgap/witness.hpp"

using namespace setgap;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST_CASE("order spec round trip is bit exact") {
  const OrderSpec ord = OrderSpec::random(3, 555);
  const Json j = to_json(ord);
  CHECK(j.at("d") == 3);
  const OrderSpec back = order_from_json(j);
  CHECK((back.basis().array() == ord.basis().array()).all());
  // Serializing again yields the identical document.
  CHECK(to_json(back).dump() == j.dump());
}

TEST_CASE("point set and output matrix round trips") {
  const PointSet s({v2(0.1, -0.2), v2(1.0 / 3.0, std::sqrt(2.0))});
  const PointSet s2 = point_set_from_json(to_json(s));
  CHECK(s2 == s);
  for (int i = 0; i < s.size(); ++i)
    CHECK((s2[i].array() == s[i].array()).all());

  Mat m(2, 2);
  m << 1e-300, -0.0, 5e300, 0.1;
  const OutputMatrix om(m);
  const OutputMatrix om2 = output_matrix_from_json(to_json(om));
  CHECK((om2.matrix().array() == om.matrix().array()).all());
  CHECK(std::signbit(om2.matrix()(0, 1)));
}

TEST_CASE("doubles survive the wire in shortest-representation form") {
  const std::vector<double> values{0.1,
                                   1.0 / 3.0,
                                   std::sqrt(2.0),
                                   1e-300,
                                   -1e300,
                                   std::numeric_limits<double>::denorm_min(),
                                   -0.0};
  for (const double x : values) {
    const Json j = Json::parse(Json(x).dump());
    const double back = j.get<double>();
    CHECK(std::memcmp(&back, &x, sizeof x) == 0);
  }
}

TEST_CASE("encoder and metric specs round trip") {
  for (const Encoder& enc :
       {Encoder::identity(2), Encoder::moments(2, 3),
        Encoder::random_features(2, 16, 42)}) {
    const Encoder back = encoder_from_json(to_json(enc));
    CHECK(back.output_dim() == enc.output_dim());
    const Vec x = v2(0.3, -0.7);
    CHECK((back(x).array() == enc(x).array()).all());
  }

  for (const double p : {1.0, 2.0, std::numeric_limits<double>::infinity()}) {
    MetricSpec spec{Encoder::moments(2, 2), p};
    const Json j = to_json(spec);
    if (std::isinf(p)) CHECK(j.at("p") == "inf");
    const MetricSpec back = metric_from_json(j);
    CHECK(back.p == p);
    const PointSet a({v2(0, 0), v2(1, 2)});
    const PointSet b({v2(0.5, 0), v2(1, 2)});
    CHECK(d_theta(a, b, back) == d_theta(a, b, spec));
  }
}

TEST_CASE("certificates round trip with exact floats") {
  const OrderSpec ord = OrderSpec::canonical(2);
  const MetricSpec metric = MetricSpec::identity(2);

  SortingWitnessRequest req;
  req.anchor = v2(0.25, -0.75);
  req.tau = 1e-3;
  req.fillers = default_fillers(ord, req.anchor, req.epsilon_in, 2);
  const auto sort_cert = sorting_witness(ord, req, metric);
  const auto sort_back = certificate_from_json(to_json(sort_cert));
  CHECK(to_json(sort_back).dump() == to_json(sort_cert).dump());
  CHECK(sort_back.delta == sort_cert.delta);
  CHECK(sort_back.achieved_gap == sort_cert.achieved_gap);
  CHECK(sort_back.theta == sort_cert.theta);
  CHECK(verify_certificate(sort_back, SortMap(ord), metric));

  const RegionSwapMap map(ord, 0.0);
  const LinePath path(PointSet({v2(-10, 0), v2(-9, 0), v2(0, 0)}), 2, v2(0, 0),
                      v2(10, 10), 0.0, 10.0);
  const auto ns_cert = nonsorting_witness(map, path, 0.0, 10.0, 1e-6, metric);
  const auto ns_back = certificate_from_json(to_json(ns_cert));
  CHECK(to_json(ns_back).dump() == to_json(ns_cert).dump());
  CHECK(ns_back.path_t_lo == ns_cert.path_t_lo);
  CHECK(ns_back.converged == ns_cert.converged);
  CHECK(ns_back.swapped_pair.size() == ns_cert.swapped_pair.size());
  CHECK(verify_certificate(ns_back, map, metric));
}

TEST_CASE("sweep results serialize deterministically") {
  const OrderSpec ord = OrderSpec::canonical(2);
  const auto sweep = witness_sweep(ord, 5, 11, 1e-4);
  const std::string once = to_json(sweep).dump();
  const std::string twice = to_json(sweep).dump();
  CHECK(once == twice);
  const Json j = Json::parse(once);
  CHECK(j.at("summary").at("count") == 5);
  CHECK(j.at("certificates").size() == 5);
}

TEST_CASE("malformed documents are rejected with construction errors") {
  CHECK_THROWS_AS(order_from_json(Json{{"d", 2}}), ConstructionError);
  CHECK_THROWS_AS(
      order_from_json(Json{{"d", 2}, {"basis", Json::array({1, 0, 0})}}),
      ConstructionError);
  CHECK_THROWS_AS(point_set_from_json(Json{{"pts", Json::array()}}),
                  ConstructionError);
  // Ragged rows.
  CHECK_THROWS_AS(point_set_from_json(Json::parse(
                      R"({"points": [[1, 2], [3]]})")),
                  ConstructionError);
  CHECK_THROWS_AS(output_matrix_from_json(Json::parse(
                      R"({"matrix": [[1, "x"], [3, 4]]})")),
                  ConstructionError);
  CHECK_THROWS_AS(encoder_from_json(Json{{"kind", "fourier"}, {"d", 2}}),
                  ConstructionError);
  CHECK_THROWS_AS(
      metric_from_json(Json{{"encoder", to_json(Encoder::identity(2))},
                            {"p", 3}}),
      ConstructionError);
  CHECK_THROWS_AS(
      metric_from_json(Json{{"encoder", to_json(Encoder::identity(2))},
                            {"p", "sup"}}),
      ConstructionError);
  CHECK_THROWS_AS(certificate_from_json(Json{{"kind", "other"}}),
                  ConstructionError);
}

TEST_CASE("handshake parsing enforces the protocol version") {
  const Handshake h =
      handshake_from_json(Json{{"d", 2}, {"n", 3}, {"protocol", 1}});
  CHECK(h.d == 2);
  CHECK(h.n == 3);
  CHECK_THROWS_AS(
      handshake_from_json(Json{{"d", 2}, {"n", 3}, {"protocol", 2}}),
      ProtocolError);
  CHECK_THROWS_AS(handshake_from_json(Json{{"d", 1}, {"n", 3}, {"protocol", 1}}),
                  ProtocolError);
  CHECK_THROWS_AS(handshake_from_json(Json{{"d", 2}, {"protocol", 1}}),
                  ProtocolError);
}
