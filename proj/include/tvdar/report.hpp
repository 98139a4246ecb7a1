#pragma once

#include <string>

#include <json.hpp>

namespace tvdar {

using Json = nlohmann::json;

// Structured run output: metadata, the full effective configuration (seeds
// included), and per-command result trees. Serialized JSON round-trips
// losslessly; doubles are emitted with shortest-round-trip precision.
struct Report {
  Json meta;
  Json config;
  Json results;

  Json to_json() const;
  static Report from_json(const Json& j);
};

// Creation stamp for report metadata. Honors SOURCE_DATE_EPOCH (seconds) so
// reruns can be made byte-identical for reproducibility checks.
std::string created_timestamp();

// Writes <out_dir>/report.json, creating the directory if needed.
void emit_report(const Report& report, const std::string& out_dir);

Json load_json(const std::string& path);

}  // namespace tvdar
