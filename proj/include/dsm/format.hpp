#pragma once

#include <string>
#include <string_view>

namespace dsm {

/// Shortest decimal that round-trips to the same double; "nan"/"inf"/"-inf"
/// for non-finite values.
std::string format_double(double v);

/// Inverse of format_double; throws InvalidInput on malformed text.
double parse_double(std::string_view text);

}  // namespace dsm
