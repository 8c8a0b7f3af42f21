#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace qdisc::cli {

using json = nlohmann::ordered_json;

/// Nearest double to the 12-significant-digit decimal of x, so emitted
/// reports round-trip exactly.
double round12(double x);

/// Recursively rounds every floating value in the tree to 12 significant
/// digits.
json round_floats(json value);

/// Deterministic JSON writer: insertion order preserved, floats printed with
/// %.12g, non-finite values as the strings "inf", "-inf", "nan".
std::string emit_json(const json& report);

/// One flattened row per record (dotted keys); arrays of scalars are
/// indexed, arrays of objects flattened element-wise.
std::string emit_csv(const std::vector<json>& records);

}  // namespace qdisc::cli
