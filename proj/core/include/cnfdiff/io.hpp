#pragma once

#include "cnfdiff/placement.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace cnfdiff {

// File schemas. Writers emit stable key order and round-trip-exact doubles,
// so identical in-memory values always serialize to identical bytes.

std::string to_json_string(const Instance& instance);
Instance instance_from_json_string(const std::string& text);

void save_instance(const Instance& instance, const std::string& path);
Instance load_instance(const std::string& path);  // validates on load

// Placements carry the flattening bijection version tag alongside the
// row-major 0/1 matrix.
std::string to_json_string(const Placement& placement);
Placement placement_from_json_string(const std::string& text);

enum class SolveStatus { Optimal, Infeasible, TimedOut };

const char* to_string(SolveStatus status);
SolveStatus solve_status_from_string(const std::string& text);

struct ExactResult;  // defined in exact.hpp

// result.v1 record for a solver run; consumed by the evaluation harness.
std::string exact_result_to_json_string(const ExactResult& result);
void save_exact_result(const ExactResult& result, const std::string& path);

struct ManifestEntry {
  std::string name;
  std::string path;       // relative to the manifest file
  std::string split;      // "train" or "eval"
  int config_index = 0;
  std::uint64_t seed = 0;
};

struct DatasetManifest {
  std::string preset;
  std::vector<ManifestEntry> entries;
};

std::string to_json_string(const DatasetManifest& manifest);
DatasetManifest manifest_from_json_string(const std::string& text);
void save_manifest(const DatasetManifest& manifest, const std::string& path);
DatasetManifest load_manifest(const std::string& path);

// Resolves a manifest entry path against the manifest's directory.
std::string resolve_manifest_path(const std::string& manifest_path, const std::string& entry_path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace cnfdiff
