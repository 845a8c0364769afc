#pragma once

#include <nlohmann/json.hpp>
#include <string>

#include "setgap/metric.hpp"
#include "setgap/order.hpp"
#include "setgap/sets.hpp"
#include "setgap/witness.hpp"

namespace setgap {

using Json = nlohmann::json;

/// JSON shapes are stable interchange formats. Parsers are strict: missing
/// keys, wrong types, or out-of-contract values throw ConstructionError, so a
/// successful round trip is a schema check. Doubles survive round trips
/// bit-exactly (shortest-representation printing).

Json to_json(const OrderSpec& ord);           // {"d", "basis" (row-major)}
OrderSpec order_from_json(const Json& j);

Json to_json(const PointSet& s);              // {"points"}
PointSet point_set_from_json(const Json& j);

Json to_json(const OutputMatrix& m);          // {"matrix"}
OutputMatrix output_matrix_from_json(const Json& j);

Json to_json(const Encoder& enc);             // {"kind", "d", ...}
Encoder encoder_from_json(const Json& j);

Json to_json(const MetricSpec& spec);         // {"encoder", "p": 1|2|"inf"}
MetricSpec metric_from_json(const Json& j);

// {"kind", "theta", "theta_prime", "delta", "epsilon", "achieved_gap",
//  "anchor", "params"}
Json to_json(const WitnessCertificate& cert);
WitnessCertificate certificate_from_json(const Json& j);

Json to_json(const SweepSummary& s);
Json to_json(const SweepResult& r);

Json vec_to_json(const Vec& v);
Vec vec_from_json(const Json& j, const char* what);

/// Strict double: accepts JSON numbers only.
double number_from_json(const Json& j, const char* what);

}  // namespace setgap
