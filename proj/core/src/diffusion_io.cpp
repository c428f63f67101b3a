#include "cnfdiff/diffusion.hpp"
#include "cnfdiff/io.hpp"

#include <json.hpp>

#include <sstream>

namespace cnfdiff {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string hash_hex(std::uint64_t h) {
  std::ostringstream out;
  out << "0x" << std::hex << h;
  return out.str();
}

}  // namespace

std::string model_to_json_string(const DenoiserModel& model) {
  ordered_json j;
  j["schema"] = "model.v1";
  j["arch"] = {{"hidden_dim", model.config.hidden_dim},
               {"embed_dim", model.config.embed_dim},
               {"max_clouds", model.config.max_clouds},
               {"cloud_type_buckets", kCloudTypeBuckets}};
  j["seed"] = model.init_seed;
  j["trained"] = model.trained;
  ordered_json params;
  for (const auto& [name, tensor] : model.named_parameters()) {
    params[name] = {{"shape", tensor.shape()}, {"values", tensor.values()}};
  }
  j["params"] = std::move(params);
  return j.dump() + "\n";
}

DenoiserModel model_from_json_string(const std::string& text) {
  ordered_json j = ordered_json::parse(text, nullptr, false);
  if (j.is_discarded()) throw IoError("model: malformed JSON");
  if (j.value("schema", "") != "model.v1") throw IoError("model: unexpected schema");

  DenoiserConfig config;
  const auto& arch = j.at("arch");
  config.hidden_dim = arch.at("hidden_dim").get<int>();
  config.embed_dim = arch.at("embed_dim").get<int>();
  config.max_clouds = arch.at("max_clouds").get<int>();
  if (arch.at("cloud_type_buckets").get<int>() != kCloudTypeBuckets) {
    throw IoError("model: cloud type bucket count mismatch");
  }

  DenoiserModel model = make_denoiser(config, j.at("seed").get<std::uint64_t>());
  model.trained = j.value("trained", false);
  const auto& params = j.at("params");
  for (auto& [name, tensor] : model.named_parameters()) {
    if (!params.contains(name)) throw IoError("model: missing parameter '" + name + "'");
    const auto& entry = params.at(name);
    const auto shape = entry.at("shape").get<std::vector<std::size_t>>();
    auto values = entry.at("values").get<std::vector<double>>();
    if (shape != tensor.shape() || values.size() != tensor.size()) {
      throw IoError("model: shape mismatch for parameter '" + name + "'");
    }
    tensor.values() = std::move(values);
  }
  return model;
}

void save_model(const DenoiserModel& model, const std::string& path) {
  write_text_file(path, model_to_json_string(model));
}

DenoiserModel load_model(const std::string& path) {
  return model_from_json_string(read_text_file(path));
}

std::string train_log_to_json_string(const TrainResult& result, const Hyperparams& params,
                                     const LossWeights& weights, std::uint64_t seed) {
  ordered_json j;
  j["schema"] = "train.v1";
  j["seed"] = seed;
  j["timesteps"] = params.timesteps;
  j["epochs"] = params.epochs;
  j["steps_per_epoch"] = params.steps_per_epoch;
  j["learning_rate"] = params.learning_rate;
  j["weights"] = {{"cap", weights.cap},     {"rest", weights.rest}, {"adj", weights.adj},
                  {"bw", weights.bw},       {"delay", weights.delay},
                  {"place", weights.place}};
  j["schedule_hash"] = hash_hex(result.schedule.hash());
  ordered_json trace = ordered_json::array();
  for (const auto& e : result.trace) {
    trace.push_back({{"denoise", e.denoise},
                     {"cap", e.cap},
                     {"rest", e.rest},
                     {"adj", e.adj},
                     {"bw", e.bw},
                     {"delay", e.delay},
                     {"place", e.place},
                     {"total", e.total}});
  }
  j["trace"] = std::move(trace);
  return j.dump(2) + "\n";
}

std::string samples_to_json_string(const SampleResult& result, const std::string& instance_name,
                                   int k, std::uint64_t seed, int timesteps) {
  ordered_json j;
  j["schema"] = "samples.v1";
  j["instance"] = instance_name;
  j["k"] = k;
  j["seed"] = seed;
  j["timesteps"] = timesteps;
  j["feasible_count"] = result.feasible_count;
  j["best_feasible"] = result.best_feasible;
  ordered_json candidates = ordered_json::array();
  for (const auto& c : result.candidates) {
    ordered_json assign = ordered_json::array();
    for (std::uint8_t v : c.placement.assign.flat()) assign.push_back(static_cast<int>(v));
    ordered_json violations = ordered_json::array();
    for (const auto& v : c.report.violations) {
      violations.push_back(
          {{"kind", to_string(v.kind)}, {"location", v.location}, {"magnitude", v.magnitude}});
    }
    candidates.push_back({{"chain", c.chain_index},
                          {"feasible", c.report.feasible},
                          {"cost", c.cost},
                          {"total_violation", c.report.total_magnitude()},
                          {"flatten", "v1"},
                          {"assign", std::move(assign)},
                          {"violations", std::move(violations)}});
  }
  j["candidates"] = std::move(candidates);
  return j.dump(2) + "\n";
}

}  // namespace cnfdiff
