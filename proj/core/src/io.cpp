#include "cnfdiff/io.hpp"

#include "cnfdiff/exact.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace cnfdiff {

using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json grid_to_json(const Grid<double>& g) {
  ordered_json rows = ordered_json::array();
  for (std::size_t r = 0; r < g.rows(); ++r) {
    ordered_json row = ordered_json::array();
    for (std::size_t c = 0; c < g.cols(); ++c) row.push_back(g(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Grid<double> grid_from_json(const ordered_json& j, const char* what) {
  if (!j.is_array()) throw IoError(std::string(what) + ": expected an array of rows");
  const std::size_t rows = j.size();
  const std::size_t cols = rows == 0 ? 0 : j.at(0).size();
  Grid<double> g(rows, cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    if (j.at(r).size() != cols) throw IoError(std::string(what) + ": ragged matrix");
    for (std::size_t c = 0; c < cols; ++c) g(r, c) = j.at(r).at(c).get<double>();
  }
  return g;
}

void require_schema(const ordered_json& j, const std::string& expected) {
  const std::string got = j.value("schema", "");
  if (got != expected) {
    throw IoError("expected schema '" + expected + "', found '" + got + "'");
  }
}

ordered_json parse(const std::string& text) {
  ordered_json j = ordered_json::parse(text, nullptr, false);
  if (j.is_discarded()) throw IoError("malformed JSON");
  return j;
}

}  // namespace

std::string to_json_string(const Instance& inst) {
  ordered_json j;
  j["schema"] = "instance.v1";
  j["meta"] = {{"seed", inst.meta.seed}, {"name", inst.meta.name}};

  ordered_json net;
  net["num_clouds"] = inst.network.num_clouds;
  net["cpu_capacity"] = inst.network.cpu_capacity;
  net["ram_capacity"] = inst.network.ram_capacity;
  net["bandwidth"] = grid_to_json(inst.network.bandwidth);
  net["symmetric"] = inst.network.symmetric;
  net["allowed_types"] = inst.network.allowed_types;
  j["network"] = std::move(net);

  ordered_json catalog = ordered_json::array();
  for (const auto& t : inst.cnf_catalog) {
    catalog.push_back({{"type_id", t.type_id},
                       {"cpu_demand", t.cpu_demand},
                       {"ram_demand", t.ram_demand},
                       {"proc_delay", t.proc_delay}});
  }
  j["cnf_catalog"] = std::move(catalog);

  ordered_json sfcs = ordered_json::array();
  for (const auto& s : inst.sfcs) {
    ordered_json edges = ordered_json::array();
    for (const auto& e : s.dag_edges) {
      edges.push_back({{"from", e.from}, {"to", e.to}, {"rate", e.rate}});
    }
    sfcs.push_back({{"sfc_id", s.sfc_id},
                    {"node_types", s.node_types},
                    {"dag_edges", std::move(edges)},
                    {"delay_budget", s.delay_budget}});
  }
  j["sfcs"] = std::move(sfcs);

  j["placement_cost"] = grid_to_json(inst.placement_cost);
  j["message_size"] = inst.message_size;
  return j.dump(2) + "\n";
}

Instance instance_from_json_string(const std::string& text) {
  const ordered_json j = parse(text);
  require_schema(j, "instance.v1");

  Instance inst;
  const auto& meta = j.at("meta");
  inst.meta.seed = meta.at("seed").get<std::uint64_t>();
  inst.meta.name = meta.at("name").get<std::string>();

  const auto& net = j.at("network");
  inst.network.num_clouds = net.at("num_clouds").get<int>();
  inst.network.cpu_capacity = net.at("cpu_capacity").get<std::vector<double>>();
  inst.network.ram_capacity = net.at("ram_capacity").get<std::vector<double>>();
  inst.network.bandwidth = grid_from_json(net.at("bandwidth"), "bandwidth");
  inst.network.symmetric = net.value("symmetric", true);
  inst.network.allowed_types = net.at("allowed_types").get<std::vector<std::vector<int>>>();

  for (const auto& t : j.at("cnf_catalog")) {
    CnfType type;
    type.type_id = t.at("type_id").get<int>();
    type.cpu_demand = t.at("cpu_demand").get<double>();
    type.ram_demand = t.at("ram_demand").get<double>();
    type.proc_delay = t.at("proc_delay").get<double>();
    inst.cnf_catalog.push_back(type);
  }

  for (const auto& s : j.at("sfcs")) {
    Sfc sfc;
    sfc.sfc_id = s.at("sfc_id").get<int>();
    sfc.node_types = s.at("node_types").get<std::vector<int>>();
    for (const auto& e : s.at("dag_edges")) {
      sfc.dag_edges.push_back(
          {e.at("from").get<int>(), e.at("to").get<int>(), e.at("rate").get<double>()});
    }
    sfc.delay_budget = s.at("delay_budget").get<double>();
    inst.sfcs.push_back(std::move(sfc));
  }

  inst.placement_cost = grid_from_json(j.at("placement_cost"), "placement_cost");
  inst.message_size = j.at("message_size").get<double>();
  return inst;
}

void save_instance(const Instance& instance, const std::string& path) {
  write_text_file(path, to_json_string(instance));
}

Instance load_instance(const std::string& path) {
  Instance inst = instance_from_json_string(read_text_file(path));
  validate(inst);
  return inst;
}

std::string to_json_string(const Placement& placement) {
  ordered_json j;
  j["schema"] = "placement.v1";
  j["flatten"] = "v1";  // (h asc, topological position asc)
  j["rows"] = placement.rows();
  j["clouds"] = placement.clouds();
  ordered_json flat = ordered_json::array();
  for (std::uint8_t v : placement.assign.flat()) flat.push_back(static_cast<int>(v));
  j["assign"] = std::move(flat);
  return j.dump() + "\n";
}

Placement placement_from_json_string(const std::string& text) {
  const ordered_json j = parse(text);
  require_schema(j, "placement.v1");
  if (j.value("flatten", "") != "v1") throw IoError("placement: unknown flattening tag");
  const auto rows = j.at("rows").get<std::size_t>();
  const auto clouds = j.at("clouds").get<std::size_t>();
  const auto flat = j.at("assign").get<std::vector<int>>();
  if (flat.size() != rows * clouds) throw IoError("placement: assign size mismatch");
  Placement p(rows, clouds);
  for (std::size_t k = 0; k < flat.size(); ++k) {
    if (flat[k] != 0 && flat[k] != 1) throw IoError("placement: entries must be 0/1");
    p.assign.flat()[k] = static_cast<std::uint8_t>(flat[k]);
  }
  return p;
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::TimedOut: return "timed_out";
  }
  return "?";
}

SolveStatus solve_status_from_string(const std::string& text) {
  if (text == "optimal") return SolveStatus::Optimal;
  if (text == "infeasible") return SolveStatus::Infeasible;
  if (text == "timed_out") return SolveStatus::TimedOut;
  throw IoError("unknown solve status '" + text + "'");
}

std::string exact_result_to_json_string(const ExactResult& result) {
  ordered_json j;
  j["schema"] = "result.v1";
  j["status"] = to_string(result.status);
  if (result.cost) {
    j["cost"] = *result.cost;
  } else {
    j["cost"] = nullptr;
  }
  j["elapsed_s"] = result.elapsed_s;
  j["nodes_explored"] = result.nodes_explored;
  if (result.placement) {
    ordered_json flat = ordered_json::array();
    for (std::uint8_t v : result.placement->assign.flat()) flat.push_back(static_cast<int>(v));
    j["placement"] = {{"flatten", "v1"},
                      {"rows", result.placement->rows()},
                      {"clouds", result.placement->clouds()},
                      {"assign", std::move(flat)}};
  } else {
    j["placement"] = nullptr;
  }
  return j.dump(2) + "\n";
}

void save_exact_result(const ExactResult& result, const std::string& path) {
  write_text_file(path, exact_result_to_json_string(result));
}

std::string to_json_string(const DatasetManifest& manifest) {
  ordered_json j;
  j["schema"] = "dataset.v1";
  j["preset"] = manifest.preset;
  ordered_json entries = ordered_json::array();
  for (const auto& e : manifest.entries) {
    entries.push_back({{"name", e.name},
                       {"path", e.path},
                       {"split", e.split},
                       {"config_index", e.config_index},
                       {"seed", e.seed}});
  }
  j["instances"] = std::move(entries);
  return j.dump(2) + "\n";
}

DatasetManifest manifest_from_json_string(const std::string& text) {
  const ordered_json j = parse(text);
  require_schema(j, "dataset.v1");
  DatasetManifest m;
  m.preset = j.at("preset").get<std::string>();
  for (const auto& e : j.at("instances")) {
    ManifestEntry entry;
    entry.name = e.at("name").get<std::string>();
    entry.path = e.at("path").get<std::string>();
    entry.split = e.at("split").get<std::string>();
    entry.config_index = e.at("config_index").get<int>();
    entry.seed = e.at("seed").get<std::uint64_t>();
    m.entries.push_back(std::move(entry));
  }
  return m;
}

void save_manifest(const DatasetManifest& manifest, const std::string& path) {
  write_text_file(path, to_json_string(manifest));
}

DatasetManifest load_manifest(const std::string& path) {
  return manifest_from_json_string(read_text_file(path));
}

std::string resolve_manifest_path(const std::string& manifest_path,
                                  const std::string& entry_path) {
  const std::filesystem::path entry(entry_path);
  if (entry.is_absolute()) return entry_path;
  return (std::filesystem::path(manifest_path).parent_path() / entry).string();
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace cnfdiff
