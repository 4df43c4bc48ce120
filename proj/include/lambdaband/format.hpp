#pragma once

#include <iosfwd>
#include <string>

#include "json.hpp"

#include "lambdaband/interval.hpp"

namespace lambdaband {

using Json = nlohmann::ordered_json;

// 17 significant digits; "inf", "-inf" and "nan" for non-finite values.
std::string format_double(double x);

// Shortest representation that parses back to the same double.
std::string format_shortest(double x);

// JSON number, or the "inf" / "-inf" string sentinels for infinities.
Json json_number(double x);

// {"lower": .., "upper": .., "empty": false} or {"empty": true}.
Json interval_json(const ExtInterval& interval);

// Serializes with every floating-point number at 17 significant digits.
void write_json(const Json& value, std::ostream& out, int indent = 2);
std::string dump_json(const Json& value, int indent = 2);

}  // namespace lambdaband
