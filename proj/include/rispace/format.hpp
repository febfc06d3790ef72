#pragma once

#include <string>

#include <json.hpp>

namespace rispace {

/// Shortest decimal form that round-trips (at most 17 significant digits).
std::string format_number(double x);

/// JSON has no infinities; they are written as the strings "inf" / "-inf".
nlohmann::json json_number(double x);

}  // namespace rispace
