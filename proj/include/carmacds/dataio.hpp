#pragma once

#include <optional>
#include <string>
#include <vector>

namespace carmacds::dataio {

struct ColumnSpec {
  int date_col = 0;
  int value_col = 1;
};

// Daily series with possibly missing observations. Dates are ISO-8601 and
// strictly increasing (lexicographic order coincides with chronological).
struct RawSeries {
  std::vector<std::string> dates;
  std::vector<std::optional<double>> values;
  std::string entity;
};

// Parses `date,value` rows; blank/NA/NaN value tokens mark missing; lines
// starting with '#' and a leading header row are skipped; extra columns
// beyond the selected ones are ignored.
RawSeries load_csv(const std::string& path, const ColumnSpec& spec = {});

// Writes date,value,imputed_flag rows (values in full %.17g precision) after
// any supplied comment header lines. imputed may be empty (all zeros).
void save_csv(const RawSeries& series, const std::vector<char>& imputed,
              const std::string& path,
              const std::vector<std::string>& header_lines = {});

// Replaces each missing value by the mean of the nearest 5 originally
// observed values by index distance, ties toward earlier dates. Requires
// under 20% missing and no run of more than 5 consecutive missing.
RawSeries impute_missing(const RawSeries& series);

// r_k = log v_k - log v_{k-1}; requires a fully observed positive series.
std::vector<double> to_log_returns(const RawSeries& series);

}  // namespace carmacds::dataio
