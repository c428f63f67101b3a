#pragma once

#include "cnfdiff/diffusion.hpp"
#include "cnfdiff/exact.hpp"

#include <optional>
#include <string>
#include <vector>

namespace cnfdiff {

// One row of records.v1. Each evaluated instance produces an "exact" row and
// a "diffusion" row. num_clouds is carried for scaling reports and is not a
// CSV column.
struct EvalRecord {
  std::string instance_id;
  std::string solver;  // "exact" or "diffusion"
  std::string status;  // exact: optimal/infeasible/timed_out; diffusion: feasible/no_feasible_sample
  std::optional<double> cost;
  double elapsed_s = 0.0;
  int samples_drawn = 0;
  int feasible_samples = 0;
  std::optional<double> best_feasible_cost;
  int num_clouds = 0;
};

struct EvalSummary {
  // Ordered (metric, value) pairs; exactly what summary.v1 serializes.
  std::vector<std::pair<std::string, double>> metrics;

  std::optional<double> get(const std::string& name) const;
};

struct EvalOptions {
  double exact_time_limit_s = kDefaultExactTimeLimit;
  int samples_per_instance = 50;  // K
  std::uint64_t seed = 0;
  // Reproducibility switch: write elapsed columns as zero so identical seeds
  // yield byte-identical CSVs (wall-clock timings are not replayable).
  bool zero_elapsed = false;
};

struct EvalOutput {
  std::vector<EvalRecord> records;
  EvalSummary summary;
};

// Runs both solvers over the given instances and aggregates the comparison:
// diffusion feasibility rate, mean costs (cost ratio restricted to instances
// the exact solver solved), mean wall times, and the timed-out subset
// reported separately.
EvalOutput run_evaluation(const std::vector<std::pair<std::string, Instance>>& instances,
                          const DenoiserModel& model, const NoiseSchedule& schedule,
                          const EvalOptions& options);

// Recomputes the summary from records alone (no hidden state).
EvalSummary summarize_records(const std::vector<EvalRecord>& records);

struct ScalingBucket {
  std::string solver;
  int num_clouds = 0;
  double mean_elapsed_s = 0.0;
  int count = 0;
};

// Mean elapsed per (solver, cloud count) bucket. When `exact_time_cap` is
// set, timed-out exact rows enter their bucket at the cap value.
std::vector<ScalingBucket> scaling_report(const std::vector<EvalRecord>& records,
                                          std::optional<double> exact_time_cap = std::nullopt);

// records.v1 / summary.v1 / scaling CSV codecs.
std::string records_to_csv(const std::vector<EvalRecord>& records);
std::vector<EvalRecord> records_from_csv(const std::string& text);
std::string summary_to_csv(const EvalSummary& summary);
std::string scaling_to_csv(const std::vector<ScalingBucket>& buckets);

}  // namespace cnfdiff
