#include "fwbq/report.hpp"

#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "fwbq/errors.hpp"
#include "fwbq/number_format.hpp"

namespace fwbq {
namespace {

using nlohmann::json;

const char kResultHeader[] =
    "method,n,mmd2,abs_error,posterior_mean,posterior_variance,coverage,seed,"
    "wall_clock_ms";
const char kModelHeader[] = "n,model,map_stability,q2_5,q25,q50,q75,q97_5";

std::vector<std::string> splitCells(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  // A trailing comma means a trailing empty cell that getline drops.
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::optional<double> optionalCell(const std::string& cell) {
  if (cell.empty()) return std::nullopt;
  return parseDouble(cell);
}

int parseInt(const std::string& cell) {
  const double v = parseDouble(cell);
  const int i = static_cast<int>(v);
  if (static_cast<double>(i) != v) throw InvalidInput("expected an integer: " + cell);
  return i;
}

std::uint64_t parseU64(const std::string& cell) {
  std::uint64_t v = 0;
  for (char c : cell) {
    if (c < '0' || c > '9') throw InvalidInput("expected an unsigned integer: " + cell);
    v = v * 10 + static_cast<std::uint64_t>(c - '0');
  }
  if (cell.empty()) throw InvalidInput("expected an unsigned integer, got empty cell");
  return v;
}

std::vector<std::string> readLines(std::istream& in) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

json toJson(const ResultRow& r) {
  json j;
  j["method"] = r.method;
  j["n"] = r.n;
  j["mmd2"] = r.mmd2;
  if (r.absError) j["absError"] = *r.absError;
  if (r.posteriorMean) j["posteriorMean"] = *r.posteriorMean;
  if (r.posteriorVariance) j["posteriorVariance"] = *r.posteriorVariance;
  if (r.coverage) j["coverage"] = *r.coverage;
  j["seed"] = r.seed;
  j["wallClockMillis"] = r.wallClockMillis;
  return j;
}

ResultRow resultFromJson(const json& j) {
  ResultRow r;
  r.method = j.at("method").get<std::string>();
  r.n = j.at("n").get<int>();
  r.mmd2 = j.at("mmd2").get<double>();
  if (j.contains("absError")) r.absError = j.at("absError").get<double>();
  if (j.contains("posteriorMean")) r.posteriorMean = j.at("posteriorMean").get<double>();
  if (j.contains("posteriorVariance"))
    r.posteriorVariance = j.at("posteriorVariance").get<double>();
  if (j.contains("coverage")) r.coverage = j.at("coverage").get<bool>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.wallClockMillis = j.at("wallClockMillis").get<double>();
  return r;
}

json toJson(const ModelRow& r) {
  json j;
  j["n"] = r.n;
  j["model"] = r.model;
  j["mapStability"] = r.mapStability;
  j["q2_5"] = r.q2_5;
  j["q25"] = r.q25;
  j["q50"] = r.q50;
  j["q75"] = r.q75;
  j["q97_5"] = r.q97_5;
  return j;
}

ModelRow modelFromJson(const json& j) {
  ModelRow r;
  r.n = j.at("n").get<int>();
  r.model = j.at("model").get<std::string>();
  r.mapStability = j.at("mapStability").get<double>();
  r.q2_5 = j.at("q2_5").get<double>();
  r.q25 = j.at("q25").get<double>();
  r.q50 = j.at("q50").get<double>();
  r.q75 = j.at("q75").get<double>();
  r.q97_5 = j.at("q97_5").get<double>();
  return r;
}

json parseJsonArray(std::istream& in) {
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("malformed structured table: ") + e.what());
  }
  if (!j.is_array()) throw InvalidInput("expected a top-level array of rows");
  return j;
}

}  // namespace

void emitCsv(const std::vector<ResultRow>& rows, std::ostream& out) {
  out << kResultHeader << "\n";
  for (const auto& r : rows) {
    if (r.method.find(',') != std::string::npos)
      throw InvalidInput("method labels may not contain commas");
    out << r.method << ',' << r.n << ',' << formatShortest(r.mmd2) << ',';
    if (r.absError) out << formatShortest(*r.absError);
    out << ',';
    if (r.posteriorMean) out << formatShortest(*r.posteriorMean);
    out << ',';
    if (r.posteriorVariance) out << formatShortest(*r.posteriorVariance);
    out << ',';
    if (r.coverage) out << (*r.coverage ? '1' : '0');
    out << ',' << r.seed << ',' << formatShortest(r.wallClockMillis) << "\n";
  }
}

std::vector<ResultRow> parseResultCsv(std::istream& in) {
  const auto lines = readLines(in);
  if (lines.empty() || lines[0] != kResultHeader)
    throw InvalidInput("missing or unexpected result-table header");
  std::vector<ResultRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = splitCells(lines[i]);
    if (cells.size() != 9) throw InvalidInput("result row with wrong column count");
    ResultRow r;
    r.method = cells[0];
    r.n = parseInt(cells[1]);
    r.mmd2 = parseDouble(cells[2]);
    r.absError = optionalCell(cells[3]);
    r.posteriorMean = optionalCell(cells[4]);
    r.posteriorVariance = optionalCell(cells[5]);
    if (!cells[6].empty()) {
      if (cells[6] != "0" && cells[6] != "1")
        throw InvalidInput("coverage cell must be empty, 0, or 1");
      r.coverage = cells[6] == "1";
    }
    r.seed = parseU64(cells[7]);
    r.wallClockMillis = parseDouble(cells[8]);
    rows.push_back(std::move(r));
  }
  return rows;
}

void emitCsv(const std::vector<ModelRow>& rows, std::ostream& out) {
  out << kModelHeader << "\n";
  for (const auto& r : rows) {
    if (r.model.find(',') != std::string::npos)
      throw InvalidInput("model labels may not contain commas");
    out << r.n << ',' << r.model << ',' << formatShortest(r.mapStability) << ','
        << formatShortest(r.q2_5) << ',' << formatShortest(r.q25) << ','
        << formatShortest(r.q50) << ',' << formatShortest(r.q75) << ','
        << formatShortest(r.q97_5) << "\n";
  }
}

std::vector<ModelRow> parseModelCsv(std::istream& in) {
  const auto lines = readLines(in);
  if (lines.empty() || lines[0] != kModelHeader)
    throw InvalidInput("missing or unexpected model-table header");
  std::vector<ModelRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = splitCells(lines[i]);
    if (cells.size() != 8) throw InvalidInput("model row with wrong column count");
    ModelRow r;
    r.n = parseInt(cells[0]);
    r.model = cells[1];
    r.mapStability = parseDouble(cells[2]);
    r.q2_5 = parseDouble(cells[3]);
    r.q25 = parseDouble(cells[4]);
    r.q50 = parseDouble(cells[5]);
    r.q75 = parseDouble(cells[6]);
    r.q97_5 = parseDouble(cells[7]);
    rows.push_back(std::move(r));
  }
  return rows;
}

void emitJson(const std::vector<ResultRow>& rows, std::ostream& out) {
  json arr = json::array();
  for (const auto& r : rows) arr.push_back(toJson(r));
  out << arr.dump(2) << "\n";
}

void emitJson(const std::vector<ModelRow>& rows, std::ostream& out) {
  json arr = json::array();
  for (const auto& r : rows) arr.push_back(toJson(r));
  out << arr.dump(2) << "\n";
}

std::vector<ResultRow> parseResultJson(std::istream& in) {
  const json arr = parseJsonArray(in);
  std::vector<ResultRow> rows;
  try {
    for (const auto& j : arr) rows.push_back(resultFromJson(j));
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("malformed result row: ") + e.what());
  }
  return rows;
}

std::vector<ModelRow> parseModelJson(std::istream& in) {
  const json arr = parseJsonArray(in);
  std::vector<ModelRow> rows;
  try {
    for (const auto& j : arr) rows.push_back(modelFromJson(j));
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("malformed model row: ") + e.what());
  }
  return rows;
}

void clearTimings(std::vector<ResultRow>& rows) {
  for (auto& r : rows) r.wallClockMillis = 0.0;
}

}  // namespace fwbq
