#include "tvdar/csv.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace tvdar {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    // trim surrounding whitespace
    std::size_t a = field.find_first_not_of(" \t\r");
    std::size_t b = field.find_last_not_of(" \t\r");
    out.push_back(a == std::string::npos ? "" : field.substr(a, b - a + 1));
  }
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

bool valid_iso_date(const std::string& s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u}) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  }
  return true;
}

double parse_number(const std::string& s, std::size_t line_no, const char* what) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size() || !std::isfinite(v)) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw csv_error(std::string("line ") + std::to_string(line_no) + ": bad " +
                    what + " value '" + s + "'");
  }
}

}  // namespace

PriceSeries parse_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw csv_error("cannot open input file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw csv_error(path + ": empty file");

  auto header = split_line(line);
  int date_col = -1, close_col = -1, volume_col = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    std::string h = header[i];
    std::transform(h.begin(), h.end(), h.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (h == "date") date_col = static_cast<int>(i);
    if (h == "close") close_col = static_cast<int>(i);
    if (h == "volume") volume_col = static_cast<int>(i);
  }
  if (date_col < 0 || close_col < 0) {
    throw csv_error(path + ": header must contain 'date' and 'close' columns");
  }

  std::vector<std::string> dates;
  std::vector<double> values;
  std::vector<double> volume;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto fields = split_line(line);
    if (fields.size() <= static_cast<std::size_t>(std::max(date_col, close_col))) {
      throw csv_error("line " + std::to_string(line_no) + ": too few columns");
    }
    const std::string& date = fields[date_col];
    if (!valid_iso_date(date)) {
      throw csv_error("line " + std::to_string(line_no) + ": bad date '" + date +
                      "' (expected yyyy-mm-dd)");
    }
    if (!dates.empty() && !(dates.back() < date)) {
      throw csv_error("line " + std::to_string(line_no) +
                      ": dates not strictly increasing ('" + date + "' after '" +
                      dates.back() + "')");
    }
    dates.push_back(date);
    values.push_back(parse_number(fields[close_col], line_no, "close"));
    if (volume_col >= 0 && static_cast<std::size_t>(volume_col) < fields.size()) {
      volume.push_back(parse_number(fields[volume_col], line_no, "volume"));
    }
  }
  if (values.size() < 2) {
    throw csv_error(path + ": need at least 2 data rows, got " +
                    std::to_string(values.size()));
  }
  try {
    return PriceSeries(std::move(dates), std::move(values), {}, std::move(volume));
  } catch (const std::invalid_argument& e) {
    throw csv_error(path + ": " + e.what());
  }
}

std::map<std::string, std::string> parse_events_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw csv_error("cannot open events file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw csv_error(path + ": empty file");
  std::map<std::string, std::string> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto fields = split_line(line);
    if (fields.size() < 2 || !valid_iso_date(fields[0])) {
      throw csv_error("line " + std::to_string(line_no) +
                      ": expected 'date,label' with ISO date");
    }
    out[fields[0]] = fields[1];
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_price_csv(const std::string& path, const PriceSeries& series) {
  std::ofstream out(path);
  if (!out) throw csv_error("cannot write: " + path);
  bool with_volume = !series.volume().empty();
  out << (with_volume ? "date,close,volume\n" : "date,close\n");
  for (std::size_t i = 0; i < series.size(); ++i) {
    out << series.dates()[i] << ',' << format_double(series.values()[i]);
    if (with_volume) out << ',' << format_double(series.volume()[i]);
    out << '\n';
  }
  if (!out) throw csv_error("write failed: " + path);
}

void write_columns_csv(const std::string& path,
                       const std::vector<std::string>& headers,
                       const std::vector<std::vector<std::string>>& text_columns,
                       const std::vector<std::vector<double>>& value_columns) {
  std::size_t rows = 0;
  for (const auto& c : text_columns) rows = std::max(rows, c.size());
  for (const auto& c : value_columns) rows = std::max(rows, c.size());
  if (headers.size() != text_columns.size() + value_columns.size()) {
    throw std::invalid_argument("write_columns_csv: header/column count mismatch");
  }
  std::ofstream out(path);
  if (!out) throw csv_error("cannot write: " + path);
  for (std::size_t i = 0; i < headers.size(); ++i) {
    out << headers[i] << (i + 1 < headers.size() ? ',' : '\n');
  }
  for (std::size_t r = 0; r < rows; ++r) {
    std::vector<std::string> cells;
    cells.reserve(headers.size());
    for (const auto& col : text_columns) {
      cells.push_back(r < col.size() ? col[r] : "");
    }
    for (const auto& col : value_columns) {
      cells.push_back(r < col.size() ? format_double(col[r]) : "");
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
      out << cells[i] << (i + 1 < cells.size() ? ',' : '\n');
    }
  }
  if (!out) throw csv_error("write failed: " + path);
}

std::string next_date(const std::string& iso_date) {
  if (!valid_iso_date(iso_date)) {
    throw std::invalid_argument("next_date: bad ISO date '" + iso_date + "'");
  }
  int y = std::stoi(iso_date.substr(0, 4));
  unsigned m = static_cast<unsigned>(std::stoi(iso_date.substr(5, 2)));
  unsigned d = static_cast<unsigned>(std::stoi(iso_date.substr(8, 2)));
  auto leap = [](int year) {
    return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
  };
  unsigned days_in_month[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (m < 1 || m > 12 || d < 1) {
    throw std::invalid_argument("next_date: bad calendar date '" + iso_date + "'");
  }
  unsigned dim = days_in_month[m - 1] + ((m == 2 && leap(y)) ? 1 : 0);
  if (d > dim) throw std::invalid_argument("next_date: bad calendar date '" + iso_date + "'");
  if (d < dim) {
    ++d;
  } else {
    d = 1;
    if (m == 12) {
      m = 1;
      ++y;
    } else {
      ++m;
    }
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, static_cast<int>(m),
                static_cast<int>(d));
  return buf;
}

}  // namespace tvdar
