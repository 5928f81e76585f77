// Experiment driver: runs the convergence / posterior-demo / rff /
// model-select studies and writes a result table to a file or stdout.
// Exit codes: 0 success, 2 configuration problem, 3 numerical failure.

#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fwbq/errors.hpp"
#include "fwbq/experiments.hpp"
#include "fwbq/report.hpp"

namespace {

std::vector<fwbq::Method> parseMethods(const std::string& list) {
  std::vector<fwbq::Method> methods;
  std::stringstream ss(list);
  std::string token;
  while (std::getline(ss, token, ',')) {
    if (token.empty()) continue;
    methods.push_back(fwbq::parseMethod(token));
  }
  if (methods.empty()) throw fwbq::InvalidInput("no methods given");
  return methods;
}

std::ifstream openInput(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw fwbq::InvalidInput("could not open " + path);
  return in;
}

template <typename Rows>
void writeRows(const Rows& rows, const std::string& path, const std::string& format) {
  std::ofstream file;
  std::ostream* out = &std::cout;
  if (path != "-") {
    file.open(path);
    if (!file) throw fwbq::InvalidInput("could not open " + path + " for writing");
    out = &file;
  }
  if (format == "csv")
    fwbq::emitCsv(rows, *out);
  else
    fwbq::emitJson(rows, *out);
  out->flush();
  if (out != &std::cout && !*out)
    throw fwbq::InvalidInput("writing " + path + " failed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Kernel quadrature experiments: convex point selection with "
      "Bayesian-quadrature weights"};

  std::string experiment;
  app.add_option("--experiment", experiment, "Which study to run")
      ->required()
      ->check(CLI::IsMember({"convergence", "posterior-demo", "rff", "model-select"}));

  std::string methodsFlag;
  auto* methodsOpt = app.add_option(
      "--methods", methodsFlag,
      "Comma-separated subset of MC,FW,FWLS,FWBQ,FWLSBQ,SBQ");

  int nMax = 0;
  auto* nMaxOpt = app.add_option("--n-max", nMax, "Largest design size")
                      ->check(CLI::PositiveNumber);
  int poolSize = 0;
  auto* poolOpt = app.add_option("--pool-size", poolSize,
                                 "Fresh candidates drawn per selection step")
                      ->check(CLI::PositiveNumber);
  std::uint64_t seed = 1;
  app.add_option("--seed", seed, "Master seed (all streams derive from it)");

  double lambda = 1.0;
  app.add_option("--lambda", lambda, "Kernel amplitude")->check(CLI::PositiveNumber);
  double sigma = 0.8;
  app.add_option("--sigma", sigma, "Kernel lengthscale")->check(CLI::PositiveNumber);
  int rffD = 1000;
  app.add_option("--rff-d", rffD, "Random-feature count for --experiment rff")
      ->check(CLI::PositiveNumber);

  std::string densityConfig;
  auto* densityOpt = app.add_option("--density-config", densityConfig,
                                    "Target density config file (default: the "
                                    "seeded 20-component 2-D mixture)");
  std::string fConfig;
  auto* fOpt = app.add_option("--f-config", fConfig,
                              "Integrand config for posterior-demo (default: "
                              "seeded kernel translates)");

  std::string out = "-";
  app.add_option("--out", out, "Output path, - for stdout");
  std::string format = "csv";
  app.add_option("--format", format, "Output table format")
      ->check(CLI::IsMember({"csv", "json"}));

  int enzymes = 10;
  app.add_option("--enzymes", enzymes, "model-select: candidate enzymes")
      ->check(CLI::PositiveNumber);
  int timePoints = 8;
  app.add_option("--time-points", timePoints, "model-select: assay time points")
      ->check(CLI::PositiveNumber);
  double noise = 0.2;
  app.add_option("--noise", noise, "model-select: synthetic rate noise sd")
      ->check(CLI::NonNegativeNumber);
  int samples = 400;
  app.add_option("--samples", samples, "model-select: probability draws per n")
      ->check(CLI::PositiveNumber);
  std::string dataPath;
  auto* dataOpt = app.add_option("--data", dataPath,
                                 "model-select: longitudinal assay table to "
                                 "ingest instead of synthetic data");
  std::string writeDataPath;
  app.add_option("--write-data", writeDataPath,
                 "model-select: also write the dataset used to this path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const bool modelSelect = experiment == "model-select";
    if (modelSelect && (*densityOpt || *fOpt))
      throw fwbq::InvalidInput(
          "--density-config/--f-config do not apply to model-select");
    if (!modelSelect && (*dataOpt || !writeDataPath.empty()))
      throw fwbq::InvalidInput("--data/--write-data only apply to model-select");
    if (experiment != "posterior-demo" && *fOpt)
      throw fwbq::InvalidInput("--f-config only applies to posterior-demo");

    if (modelSelect) {
      fwbq::ModelSelectConfig cfg;
      cfg.enzymeCount = enzymes;
      cfg.timePointCount = timePoints;
      cfg.noiseSd = noise;
      cfg.sampleCount = samples;
      cfg.seed = fwbq::RngSeed{seed};
      cfg.nMax = *nMaxOpt ? nMax : cfg.nMax;
      cfg.poolSize = *poolOpt ? poolSize : cfg.poolSize;
      if (*methodsOpt) {
        const auto methods = parseMethods(methodsFlag);
        if (methods.size() != 1)
          throw fwbq::InvalidInput("model-select takes exactly one method");
        cfg.method = methods[0];
      }
      if (*dataOpt) {
        auto in = openInput(dataPath);
        cfg.data = fwbq::readLongitudinalData(in);
      }
      if (!writeDataPath.empty()) {
        const fwbq::LongitudinalData data = fwbq::modelSelectData(cfg);
        std::ofstream dataOut(writeDataPath);
        if (!dataOut)
          throw fwbq::InvalidInput("could not open " + writeDataPath + " for writing");
        fwbq::writeLongitudinalData(data, dataOut);
        cfg.data = data;  // run on exactly what was written
      }
      writeRows(fwbq::runModelSelect(cfg), out, format);
      return 0;
    }

    fwbq::ExperimentConfig cfg;
    cfg.amplitude = lambda;
    cfg.lengthscale = sigma;
    cfg.seed = fwbq::RngSeed{seed};
    if (*nMaxOpt) cfg.nMax = nMax;
    if (*poolOpt) cfg.poolSize = poolSize;
    if (*methodsOpt) cfg.methods = parseMethods(methodsFlag);
    if (*densityOpt) {
      auto in = openInput(densityConfig);
      cfg.density = fwbq::parseDensityConfig(in);
    } else {
      cfg.density = fwbq::defaultBenchmarkMixture();
    }

    if (experiment == "convergence") {
      writeRows(fwbq::runConvergence(cfg), out, format);
    } else if (experiment == "rff") {
      writeRows(fwbq::runRff(cfg, rffD), out, format);
    } else {  // posterior-demo
      fwbq::KernelCombination f;
      if (*fOpt) {
        auto in = openInput(fConfig);
        f = fwbq::parseFunctionConfig(in, fwbq::dim(cfg.density));
      } else {
        f = fwbq::defaultIntegrand(cfg.density, cfg.seed);
      }
      writeRows(fwbq::runPosteriorDemo(cfg, f), out, format);
    }
    return 0;
  } catch (const fwbq::InvalidInput& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
}
