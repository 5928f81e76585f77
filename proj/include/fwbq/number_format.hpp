#pragma once

#include <string>

namespace fwbq {

// Shortest decimal string that parses back to exactly the same double
// (round-trip safe), so emitted tables are loss-free and byte-stable.
std::string formatShortest(double value);

// Strict full-string parse; throws InvalidInput on trailing junk or
// non-numeric content.
double parseDouble(const std::string& text);

}  // namespace fwbq
