#pragma once

#include <map>
#include <string>
#include <vector>

#include "tvdar/core.hpp"

namespace tvdar {

// Thrown on malformed input files; the message names the offending line.
struct csv_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Reads a headered CSV with columns `date` (ISO yyyy-mm-dd), `close`
// (decimal) and optional `volume`. Dates must be strictly increasing.
PriceSeries parse_csv(const std::string& path);

// Optional annotation file with columns `date,label`; labels are merged into
// plot data and play no analytic role.
std::map<std::string, std::string> parse_events_csv(const std::string& path);

void write_price_csv(const std::string& path, const PriceSeries& series);

// Column-oriented CSV writer used for all plot data. Values are printed with
// 17 significant digits so they round-trip exactly.
void write_columns_csv(const std::string& path,
                       const std::vector<std::string>& headers,
                       const std::vector<std::vector<std::string>>& text_columns,
                       const std::vector<std::vector<double>>& value_columns);

std::string format_double(double v);  // %.17g

// Day-after in the proleptic Gregorian calendar; used only when synthesizing
// date columns for generated series.
std::string next_date(const std::string& iso_date);

}  // namespace tvdar
