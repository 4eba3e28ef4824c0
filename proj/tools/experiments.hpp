#pragma once

#include "emit.hpp"

#include "mfldp/rates.hpp"
#include "mfldp/rng.hpp"
#include "mfldp/simplex.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mfldp::cli {

// Bad flags or flag combinations; reported with exit code 2.
class UsageError : public std::runtime_error {
 public:
  UsageError(std::string flag, const std::string& what) : std::runtime_error(what), flag_(std::move(flag)) {}
  const std::string& flag() const { return flag_; }

 private:
  std::string flag_;
};

struct ExperimentConfig {
  std::string name;
  std::optional<SimplexPoint> x0;      // default: barycenter
  std::optional<SimplexPoint> target;  // point event, quasipotential target
  std::vector<int> ns;                 // empty: experiment default
  std::optional<std::size_t> reps;     // empty: experiment default
  std::optional<double> t;             // empty: experiment default
  int coordinate = 0;                  // set event: x[coordinate] >= level
  double level = 0.8;
  std::string method = "is";           // set event: "is" or "mc"
  double tolerance = 0.03;             // lln-convergence sup-norm tolerance
  double delta = 0.2;                  // bounds-suite excursion level
  std::uint64_t seed = kDefaultSeed;
  int jobs = 1;
};

struct ExperimentResult {
  Json report;
  CsvTable table;  // per-n rows for plotting
  bool passed = true;
};

const std::vector<std::string>& experiment_names();

Json config_json(const ExperimentConfig& c);

// Throws UsageError for unknown experiments or bad settings.
ExperimentResult run_experiment(const JumpRateTable& table, const ExperimentConfig& config);

ExperimentResult lln_convergence(const JumpRateTable& table, const ExperimentConfig& config);
ExperimentResult ldp_set_event(const JumpRateTable& table, const ExperimentConfig& config);
ExperimentResult ldp_point_event(const JumpRateTable& table, const ExperimentConfig& config);
ExperimentResult quasipotential_stationary(const JumpRateTable& table, const ExperimentConfig& config);
ExperimentResult bounds_suite(const JumpRateTable& table, const ExperimentConfig& config);

Json to_json(const Vec& v);

}  // namespace mfldp::cli
