#include "fwbq/number_format.hpp"

#include <charconv>
#include <system_error>

#include "fwbq/errors.hpp"

namespace fwbq {

std::string formatShortest(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw NumericalInconsistency("to_chars failed");
  return std::string(buf, ptr);
}

double parseDouble(const std::string& text) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last)
    throw InvalidInput("could not parse number: '" + text + "'");
  return value;
}

}  // namespace fwbq
