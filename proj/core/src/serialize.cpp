#include "setgap/serialize.hpp"

#include <limits>
#include <string>
#include <vector>

#include "setgap/errors.hpp"

namespace setgap {

namespace {

const Json& expect_key(const Json& j, const char* key, const char* what) {
  if (!j.is_object())
    throw ConstructionError(std::string(what) + ": expected an object");
  const auto it = j.find(key);
  if (it == j.end())
    throw ConstructionError(std::string(what) + ": missing key '" + key + "'");
  return *it;
}

int int_from(const Json& j, const char* what) {
  if (!j.is_number_integer())
    throw ConstructionError(std::string(what) + ": expected an integer");
  return j.get<int>();
}

std::uint64_t uint64_from(const Json& j, const char* what) {
  if (!j.is_number_integer() && !j.is_number_unsigned())
    throw ConstructionError(std::string(what) + ": expected an integer");
  return j.get<std::uint64_t>();
}

Json rows_to_json(const Mat& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Mat rows_from_json(const Json& j, const char* what) {
  if (!j.is_array() || j.empty())
    throw ConstructionError(std::string(what) + ": expected a non-empty array "
                                                "of rows");
  const auto& first = j.front();
  if (!first.is_array() || first.empty())
    throw ConstructionError(std::string(what) + ": rows must be non-empty "
                                                "arrays");
  const auto cols = first.size();
  Mat m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (size_t r = 0; r < j.size(); ++r) {
    const auto& row = j[r];
    if (!row.is_array() || row.size() != cols)
      throw ConstructionError(std::string(what) + ": ragged rows");
    for (size_t c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          number_from_json(row[c], what);
  }
  return m;
}

}  // namespace

double number_from_json(const Json& j, const char* what) {
  if (!j.is_number())
    throw ConstructionError(std::string(what) + ": expected a number");
  return j.get<double>();
}

Json vec_to_json(const Vec& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Vec vec_from_json(const Json& j, const char* what) {
  if (!j.is_array() || j.empty())
    throw ConstructionError(std::string(what) +
                            ": expected a non-empty array of numbers");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (size_t i = 0; i < j.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = number_from_json(j[i], what);
  return v;
}

Json to_json(const OrderSpec& ord) {
  return Json{{"d", ord.dim()}, {"basis", rows_to_json(ord.basis())}};
}

OrderSpec order_from_json(const Json& j) {
  const int d = int_from(expect_key(j, "d", "order"), "order.d");
  Mat basis = rows_from_json(expect_key(j, "basis", "order"), "order.basis");
  if (basis.rows() != d || basis.cols() != d)
    throw ConstructionError("order: basis shape does not match d");
  return OrderSpec::from_basis(std::move(basis));
}

Json to_json(const PointSet& s) {
  Json pts = Json::array();
  for (const Vec& p : s.points()) pts.push_back(vec_to_json(p));
  return Json{{"points", std::move(pts)}};
}

PointSet point_set_from_json(const Json& j) {
  const Json& arr = expect_key(j, "points", "point set");
  if (!arr.is_array())
    throw ConstructionError("point set: 'points' must be an array");
  std::vector<Vec> pts;
  pts.reserve(arr.size());
  for (const auto& p : arr) pts.push_back(vec_from_json(p, "point set"));
  return PointSet(std::move(pts));
}

Json to_json(const OutputMatrix& m) {
  return Json{{"matrix", rows_to_json(m.matrix())}};
}

OutputMatrix output_matrix_from_json(const Json& j) {
  return OutputMatrix(
      rows_from_json(expect_key(j, "matrix", "output matrix"), "matrix"));
}

Json to_json(const Encoder& enc) {
  switch (enc.kind()) {
    case EncoderKind::Identity:
      return Json{{"kind", "identity"}, {"d", enc.input_dim()}};
    case EncoderKind::Moments:
      return Json{{"kind", "moments"},
                  {"d", enc.input_dim()},
                  {"m", enc.max_degree()}};
    case EncoderKind::RandomFeatures:
      return Json{{"kind", "random_features"},
                  {"d", enc.input_dim()},
                  {"k", enc.output_dim()},
                  {"seed", enc.seed()}};
  }
  throw Error("unknown encoder kind");
}

Encoder encoder_from_json(const Json& j) {
  const Json& kind = expect_key(j, "kind", "encoder");
  if (!kind.is_string())
    throw ConstructionError("encoder: 'kind' must be a string");
  const std::string k = kind.get<std::string>();
  const int d = int_from(expect_key(j, "d", "encoder"), "encoder.d");
  if (k == "identity") return Encoder::identity(d);
  if (k == "moments")
    return Encoder::moments(d,
                            int_from(expect_key(j, "m", "encoder"), "encoder.m"));
  if (k == "random_features")
    return Encoder::random_features(
        d, int_from(expect_key(j, "k", "encoder"), "encoder.k"),
        uint64_from(expect_key(j, "seed", "encoder"), "encoder.seed"));
  throw ConstructionError("encoder: unknown kind '" + k + "'");
}

Json to_json(const MetricSpec& spec) {
  Json j{{"encoder", to_json(spec.encoder)}};
  if (spec.p == std::numeric_limits<double>::infinity())
    j["p"] = "inf";
  else
    j["p"] = spec.p;
  return j;
}

MetricSpec metric_from_json(const Json& j) {
  Encoder enc = encoder_from_json(expect_key(j, "encoder", "metric"));
  const Json& p = expect_key(j, "p", "metric");
  double pval = 0.0;
  if (p.is_string()) {
    if (p.get<std::string>() != "inf")
      throw ConstructionError("metric: p must be 1, 2, or \"inf\"");
    pval = std::numeric_limits<double>::infinity();
  } else {
    pval = number_from_json(p, "metric.p");
  }
  if (pval != 1.0 && pval != 2.0 &&
      pval != std::numeric_limits<double>::infinity())
    throw ConstructionError("metric: p must be 1, 2, or \"inf\"");
  return MetricSpec{std::move(enc), pval};
}

Json to_json(const WitnessCertificate& cert) {
  Json params;
  if (cert.kind == WitnessKind::Sorting) {
    params = Json{{"j", cert.j},
                  {"tau", cert.tau},
                  {"epsilon_in", cert.epsilon_in}};
  } else {
    Json pair = Json::array();
    for (const Vec& p : cert.swapped_pair) pair.push_back(vec_to_json(p));
    params = Json{{"t_lo", cert.path_t_lo},
                  {"t_hi", cert.path_t_hi},
                  {"iterations", cert.iterations},
                  {"converged", cert.converged},
                  {"swapped_pair", std::move(pair)}};
  }
  return Json{{"kind", cert.kind == WitnessKind::Sorting ? "sorting"
                                                         : "nonsorting"},
              {"theta", to_json(cert.theta)},
              {"theta_prime", to_json(cert.theta_prime)},
              {"delta", cert.delta},
              {"epsilon", cert.epsilon},
              {"achieved_gap", cert.achieved_gap},
              {"anchor", vec_to_json(cert.anchor)},
              {"params", std::move(params)}};
}

WitnessCertificate certificate_from_json(const Json& j) {
  const Json& kind = expect_key(j, "kind", "certificate");
  if (!kind.is_string())
    throw ConstructionError("certificate: 'kind' must be a string");
  const std::string k = kind.get<std::string>();
  WitnessKind wk;
  if (k == "sorting")
    wk = WitnessKind::Sorting;
  else if (k == "nonsorting")
    wk = WitnessKind::NonSorting;
  else
    throw ConstructionError("certificate: unknown kind '" + k + "'");

  WitnessCertificate cert(
      wk, point_set_from_json(expect_key(j, "theta", "certificate")),
      point_set_from_json(expect_key(j, "theta_prime", "certificate")));
  cert.delta = number_from_json(expect_key(j, "delta", "certificate"),
                                "certificate.delta");
  cert.epsilon = number_from_json(expect_key(j, "epsilon", "certificate"),
                                  "certificate.epsilon");
  cert.achieved_gap = number_from_json(
      expect_key(j, "achieved_gap", "certificate"), "certificate.achieved_gap");
  cert.anchor =
      vec_from_json(expect_key(j, "anchor", "certificate"), "certificate");

  const Json& params = expect_key(j, "params", "certificate");
  if (wk == WitnessKind::Sorting) {
    cert.j = int_from(expect_key(params, "j", "certificate params"),
                      "certificate.j");
    cert.tau = number_from_json(expect_key(params, "tau", "certificate params"),
                                "certificate.tau");
    cert.epsilon_in =
        number_from_json(expect_key(params, "epsilon_in", "certificate params"),
                         "certificate.epsilon_in");
  } else {
    cert.path_t_lo =
        number_from_json(expect_key(params, "t_lo", "certificate params"),
                         "certificate.t_lo");
    cert.path_t_hi =
        number_from_json(expect_key(params, "t_hi", "certificate params"),
                         "certificate.t_hi");
    cert.iterations =
        int_from(expect_key(params, "iterations", "certificate params"),
                 "certificate.iterations");
    const Json& conv = expect_key(params, "converged", "certificate params");
    if (!conv.is_boolean())
      throw ConstructionError("certificate: 'converged' must be a boolean");
    cert.converged = conv.get<bool>();
    const Json& pair = expect_key(params, "swapped_pair", "certificate params");
    if (!pair.is_array())
      throw ConstructionError("certificate: 'swapped_pair' must be an array");
    for (const auto& p : pair)
      cert.swapped_pair.push_back(vec_from_json(p, "certificate pair"));
  }
  return cert;
}

Json to_json(const SweepSummary& s) {
  return Json{{"count", s.count},
              {"distinct_loci", s.distinct_loci},
              {"min_ratio", s.min_ratio},
              {"median_ratio", s.median_ratio},
              {"max_ratio", s.max_ratio}};
}

Json to_json(const SweepResult& r) {
  Json certs = Json::array();
  for (const auto& c : r.certificates) certs.push_back(to_json(c));
  return Json{{"summary", to_json(r.summary)},
              {"certificates", std::move(certs)}};
}

}  // namespace setgap
