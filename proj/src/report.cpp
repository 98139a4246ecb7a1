#include "tvdar/report.hpp"

#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace tvdar {

Json Report::to_json() const {
  return Json{{"meta", meta}, {"config", config}, {"results", results}};
}

Report Report::from_json(const Json& j) {
  Report r;
  r.meta = j.value("meta", Json::object());
  r.config = j.value("config", Json::object());
  r.results = j.value("results", Json::object());
  return r;
}

std::string created_timestamp() {
  std::time_t now = std::time(nullptr);
  if (const char* env = std::getenv("SOURCE_DATE_EPOCH")) {
    char* end = nullptr;
    long long v = std::strtoll(env, &end, 10);
    if (end && *end == '\0') now = static_cast<std::time_t>(v);
  }
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

void emit_report(const Report& report, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::string path = (std::filesystem::path(out_dir) / "report.json").string();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("emit_report: cannot write " + path);
  out << report.to_json().dump(2) << '\n';
  if (!out) throw std::runtime_error("emit_report: write failed for " + path);
}

Json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  Json j;
  in >> j;
  return j;
}

}  // namespace tvdar
