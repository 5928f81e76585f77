#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace fwbq {

// One (method, design size) measurement from an experiment run.  Optional
// columns are populated only where they make sense: absError / posteriorMean
// need a known integrand, posteriorVariance / coverage need BQ weights.
// wallClockMillis is a diagnostic (elapsed time within the method's run when
// the row was finished) and is the one column that differs between otherwise
// identical runs.
struct ResultRow {
  std::string method;
  int n = 0;
  double mmd2 = 0.0;
  std::optional<double> absError;
  std::optional<double> posteriorMean;
  std::optional<double> posteriorVariance;
  std::optional<bool> coverage;  // does mean +- 1.96 sigma contain the truth
  std::uint64_t seed = 0;
  double wallClockMillis = 0.0;

  bool operator==(const ResultRow&) const = default;
};

// One (design size, candidate model) row from a model-selection run.  The
// quantiles are percentiles of the sampled posterior model probability;
// mapStability is shared by all models at the same n (repeated per row so
// the table stays flat).
struct ModelRow {
  int n = 0;
  std::string model;
  double mapStability = 0.0;
  double q2_5 = 0.0;
  double q25 = 0.0;
  double q50 = 0.0;
  double q75 = 0.0;
  double q97_5 = 0.0;

  bool operator==(const ModelRow&) const = default;
};

// Comma-separated tables with a header row; numbers rendered with the
// shortest round-trip decimal form, missing optionals as empty cells.
// parse*(emit*(rows)) == rows.
void emitCsv(const std::vector<ResultRow>& rows, std::ostream& out);
void emitCsv(const std::vector<ModelRow>& rows, std::ostream& out);
std::vector<ResultRow> parseResultCsv(std::istream& in);
std::vector<ModelRow> parseModelCsv(std::istream& in);

// Structured-object format: a top-level array of objects, one per row,
// missing optionals omitted.  Same round-trip guarantee.
void emitJson(const std::vector<ResultRow>& rows, std::ostream& out);
void emitJson(const std::vector<ModelRow>& rows, std::ostream& out);
std::vector<ResultRow> parseResultJson(std::istream& in);
std::vector<ModelRow> parseModelJson(std::istream& in);

// Zero out the timing diagnostic, the one non-deterministic column, so runs
// of the same seeded configuration can be compared byte for byte.
void clearTimings(std::vector<ResultRow>& rows);

}  // namespace fwbq
