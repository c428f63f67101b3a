#include "cnfdiff/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

namespace cnfdiff {

namespace {

using Clock = std::chrono::steady_clock;

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::string opt_to_csv(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(field);
      field.clear();
    } else if (ch != '\r') {
      field.push_back(ch);
    }
  }
  fields.push_back(field);
  return fields;
}

double mean(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

}  // namespace

std::optional<double> EvalSummary::get(const std::string& name) const {
  for (const auto& [k, v] : metrics) {
    if (k == name) return v;
  }
  return std::nullopt;
}

EvalOutput run_evaluation(const std::vector<std::pair<std::string, Instance>>& instances,
                          const DenoiserModel& model, const NoiseSchedule& schedule,
                          const EvalOptions& options) {
  EvalOutput out;
  for (std::size_t idx = 0; idx < instances.size(); ++idx) {
    const auto& [name, inst] = instances[idx];

    EvalRecord exact_row;
    exact_row.instance_id = name;
    exact_row.solver = "exact";
    exact_row.num_clouds = inst.num_clouds();
    const ExactResult res = solve_exact(inst, options.exact_time_limit_s);
    exact_row.status = to_string(res.status);
    exact_row.cost = res.cost;
    exact_row.elapsed_s = options.zero_elapsed ? 0.0 : res.elapsed_s;
    out.records.push_back(exact_row);

    EvalRecord diff_row;
    diff_row.instance_id = name;
    diff_row.solver = "diffusion";
    diff_row.num_clouds = inst.num_clouds();
    const auto t0 = Clock::now();
    const SampleResult samples = sample_placements(model, inst, options.samples_per_instance,
                                                   schedule, derive_seed(options.seed, idx));
    const double elapsed = std::chrono::duration<double>(Clock::now() - t0).count();
    diff_row.samples_drawn = options.samples_per_instance;
    diff_row.feasible_samples = samples.feasible_count;
    diff_row.status = samples.best_feasible ? "feasible" : "no_feasible_sample";
    if (samples.best_feasible) {
      diff_row.best_feasible_cost = samples.candidates[0].cost;
      diff_row.cost = samples.candidates[0].cost;
    }
    diff_row.elapsed_s = options.zero_elapsed ? 0.0 : elapsed;
    out.records.push_back(diff_row);
  }
  out.summary = summarize_records(out.records);
  return out;
}

EvalSummary summarize_records(const std::vector<EvalRecord>& records) {
  std::map<std::string, const EvalRecord*> exact_by_id, diff_by_id;
  std::vector<double> exact_costs, exact_times, diff_times, diff_best_costs;
  std::vector<double> common_exact, common_diff;
  std::vector<double> timed_out_diff_costs, timed_out_diff_times;
  int instances = 0, diffusion_feasible = 0, exact_solved = 0, exact_timed_out = 0,
      exact_infeasible = 0;

  for (const auto& r : records) {
    if (r.solver == "exact") {
      exact_by_id[r.instance_id] = &r;
    } else if (r.solver == "diffusion") {
      diff_by_id[r.instance_id] = &r;
    }
  }
  for (const auto& [id, exact] : exact_by_id) {
    ++instances;
    exact_times.push_back(exact->elapsed_s);
    if (exact->status == "optimal") {
      ++exact_solved;
      if (exact->cost) exact_costs.push_back(*exact->cost);
    } else if (exact->status == "timed_out") {
      ++exact_timed_out;
    } else {
      ++exact_infeasible;
    }
    const auto it = diff_by_id.find(id);
    if (it == diff_by_id.end()) continue;
    const EvalRecord* diff = it->second;
    diff_times.push_back(diff->elapsed_s);
    if (diff->feasible_samples > 0) ++diffusion_feasible;
    if (diff->best_feasible_cost) diff_best_costs.push_back(*diff->best_feasible_cost);
    // Cost comparison restricted to instances the exact solver solved.
    if (exact->status == "optimal" && exact->cost && diff->best_feasible_cost) {
      common_exact.push_back(*exact->cost);
      common_diff.push_back(*diff->best_feasible_cost);
    }
    if (exact->status == "timed_out" && diff->best_feasible_cost) {
      timed_out_diff_costs.push_back(*diff->best_feasible_cost);
      timed_out_diff_times.push_back(diff->elapsed_s);
    }
  }

  EvalSummary summary;
  auto put = [&summary](const std::string& k, double v) { summary.metrics.emplace_back(k, v); };
  put("instances", instances);
  put("feasibility_rate",
      instances == 0 ? 0.0 : static_cast<double>(diffusion_feasible) / instances);
  put("exact_solved", exact_solved);
  put("exact_timed_out", exact_timed_out);
  put("exact_infeasible", exact_infeasible);
  put("exact_mean_cost_solved", mean(exact_costs));
  put("diffusion_mean_best_cost", mean(diff_best_costs));
  put("common_instances", static_cast<double>(common_exact.size()));
  put("common_mean_exact_cost", mean(common_exact));
  put("common_mean_diffusion_cost", mean(common_diff));
  put("common_cost_ratio",
      common_exact.empty() || mean(common_exact) == 0.0 ? 0.0
                                                        : mean(common_diff) / mean(common_exact));
  put("exact_mean_elapsed_s", mean(exact_times));
  put("diffusion_mean_elapsed_s", mean(diff_times));
  put("timed_out_subset", static_cast<double>(timed_out_diff_costs.size()));
  put("timed_out_diffusion_mean_cost", mean(timed_out_diff_costs));
  put("timed_out_diffusion_mean_elapsed_s", mean(timed_out_diff_times));
  return summary;
}

std::vector<ScalingBucket> scaling_report(const std::vector<EvalRecord>& records,
                                          std::optional<double> exact_time_cap) {
  if (records.empty()) throw ValidationError("scaling_report: no records");
  std::map<std::pair<std::string, int>, std::pair<double, int>> acc;  // -> (sum, count)
  for (const auto& r : records) {
    double elapsed = r.elapsed_s;
    if (exact_time_cap && r.solver == "exact" && r.status == "timed_out") {
      elapsed = *exact_time_cap;
    }
    auto& slot = acc[{r.solver, r.num_clouds}];
    slot.first += elapsed;
    slot.second += 1;
  }
  std::vector<ScalingBucket> buckets;
  for (const auto& [key, slot] : acc) {
    buckets.push_back({key.first, key.second, slot.first / slot.second, slot.second});
  }
  return buckets;
}

std::string records_to_csv(const std::vector<EvalRecord>& records) {
  std::ostringstream out;
  out << "instance_id,solver,status,cost,elapsed_s,samples_drawn,feasible_samples,"
         "best_feasible_cost\n";
  for (const auto& r : records) {
    out << r.instance_id << ',' << r.solver << ',' << r.status << ',' << opt_to_csv(r.cost) << ','
        << format_double(r.elapsed_s) << ',' << r.samples_drawn << ',' << r.feasible_samples << ','
        << opt_to_csv(r.best_feasible_cost) << '\n';
  }
  return out.str();
}

std::vector<EvalRecord> records_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw IoError("records csv: empty file");
  std::vector<EvalRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 8) throw IoError("records csv: expected 8 columns");
    EvalRecord r;
    r.instance_id = fields[0];
    r.solver = fields[1];
    r.status = fields[2];
    if (!fields[3].empty()) r.cost = std::stod(fields[3]);
    r.elapsed_s = std::stod(fields[4]);
    r.samples_drawn = std::stoi(fields[5]);
    r.feasible_samples = std::stoi(fields[6]);
    if (!fields[7].empty()) r.best_feasible_cost = std::stod(fields[7]);
    records.push_back(std::move(r));
  }
  return records;
}

std::string summary_to_csv(const EvalSummary& summary) {
  std::ostringstream out;
  out << "metric,value\n";
  for (const auto& [k, v] : summary.metrics) out << k << ',' << format_double(v) << '\n';
  return out.str();
}

std::string scaling_to_csv(const std::vector<ScalingBucket>& buckets) {
  std::ostringstream out;
  out << "solver,num_clouds,mean_elapsed_s,count\n";
  for (const auto& b : buckets) {
    out << b.solver << ',' << b.num_clouds << ',' << format_double(b.mean_elapsed_s) << ','
        << b.count << '\n';
  }
  return out.str();
}

}  // namespace cnfdiff
