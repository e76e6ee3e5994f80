#include "carmacds/dataio.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "carmacds/errors.hpp"

namespace carmacds::dataio {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

bool is_iso_date(const std::string& s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  int month = (s[5] - '0') * 10 + (s[6] - '0');
  int day = (s[8] - '0') * 10 + (s[9] - '0');
  return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

bool is_missing_token(const std::string& s) {
  if (s.empty()) return true;
  std::string up;
  for (char c : s) up += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return up == "NA" || up == "NAN" || up == "NULL";
}

}  // namespace

RawSeries load_csv(const std::string& path, const ColumnSpec& spec) {
  std::ifstream in(path);
  if (!in) throw IoError("load_csv: cannot open " + path);

  RawSeries series;
  series.entity = std::filesystem::path(path).stem().string();
  const int needed = std::max(spec.date_col, spec.value_col) + 1;

  std::string line;
  int line_no = 0;
  bool first_content = true;
  while (std::getline(in, line)) {
    ++line_no;
    std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    std::vector<std::string> fields = split_csv_line(stripped);
    if (static_cast<int>(fields.size()) < needed)
      throw DataQualityError("load_csv: line " + std::to_string(line_no) +
                             ": expected at least " + std::to_string(needed) +
                             " columns");
    std::string date = trim(fields[static_cast<size_t>(spec.date_col)]);
    std::string value = trim(fields[static_cast<size_t>(spec.value_col)]);

    if (first_content && !is_iso_date(date)) {
      first_content = false;  // header row
      continue;
    }
    first_content = false;

    if (!is_iso_date(date))
      throw DataQualityError("load_csv: line " + std::to_string(line_no) +
                             ": malformed date \"" + date + "\"");
    if (!series.dates.empty()) {
      if (date == series.dates.back())
        throw DataQualityError("load_csv: duplicate date " + date);
      if (date < series.dates.back())
        throw DataQualityError("load_csv: dates not increasing at " + date);
    }

    std::optional<double> v;
    if (!is_missing_token(value)) {
      double parsed = 0.0;
      auto [ptr, ec] =
          std::from_chars(value.data(), value.data() + value.size(), parsed);
      if (ec != std::errc{} || ptr != value.data() + value.size())
        throw DataQualityError("load_csv: line " + std::to_string(line_no) +
                               ": malformed value \"" + value + "\"");
      v = parsed;
    }
    series.dates.push_back(date);
    series.values.push_back(v);
  }
  if (series.dates.empty())
    throw DataQualityError("load_csv: no data rows in " + path);
  return series;
}

void save_csv(const RawSeries& series, const std::vector<char>& imputed,
              const std::string& path,
              const std::vector<std::string>& header_lines) {
  if (!imputed.empty() && imputed.size() != series.values.size())
    throw ArgumentError("save_csv: imputed flags must match series length");
  std::ofstream out(path);
  if (!out) throw IoError("save_csv: cannot write " + path);
  for (const std::string& h : header_lines) out << "# " << h << "\n";
  out << "date,value,imputed_flag\n";
  char buf[40];
  for (size_t i = 0; i < series.dates.size(); ++i) {
    out << series.dates[i] << ",";
    if (series.values[i].has_value()) {
      std::snprintf(buf, sizeof buf, "%.17g", *series.values[i]);
      out << buf;
    } else {
      out << "NA";
    }
    out << "," << (imputed.empty() ? 0 : static_cast<int>(imputed[i])) << "\n";
  }
  if (!out) throw IoError("save_csv: write failed for " + path);
}

RawSeries impute_missing(const RawSeries& series) {
  const size_t n = series.values.size();
  if (n == 0) throw DataQualityError("impute_missing: empty series");

  std::vector<size_t> observed;
  for (size_t i = 0; i < n; ++i)
    if (series.values[i].has_value()) observed.push_back(i);
  const size_t n_missing = n - observed.size();
  if (observed.empty())
    throw DataQualityError("impute_missing: all values missing");
  if (n_missing == 0) return series;

  if (static_cast<double>(n_missing) >= 0.2 * static_cast<double>(n))
    throw DataQualityError(
        "impute_missing: " + std::to_string(n_missing) + " of " +
        std::to_string(n) + " values missing (20% limit)");

  std::string gap_report;
  size_t run = 0;
  for (size_t i = 0; i <= n; ++i) {
    bool missing = i < n && !series.values[i].has_value();
    if (missing) {
      ++run;
    } else {
      if (run > 5) {
        gap_report += (gap_report.empty() ? "" : ", ");
        gap_report += series.dates[i - run] + ".." + series.dates[i - 1];
      }
      run = 0;
    }
  }
  if (!gap_report.empty())
    throw DataQualityError("impute_missing: gaps longer than 5: " +
                           gap_report);

  RawSeries out = series;
  for (size_t i = 0; i < n; ++i) {
    if (series.values[i].has_value()) continue;
    // Nearest observed indices by |distance|, earlier index on ties.
    auto better = [&](size_t a, size_t b) {
      size_t da = a > i ? a - i : i - a;
      size_t db = b > i ? b - i : i - b;
      if (da != db) return da < db;
      return a < b;
    };
    std::vector<size_t> window(observed);
    size_t take = std::min<size_t>(5, window.size());
    std::partial_sort(window.begin(), window.begin() + take, window.end(),
                      better);
    double sum = 0.0;
    for (size_t j = 0; j < take; ++j) sum += *series.values[window[j]];
    out.values[i] = sum / static_cast<double>(take);
  }
  return out;
}

std::vector<double> to_log_returns(const RawSeries& series) {
  const size_t n = series.values.size();
  if (n < 2) throw ArgumentError("to_log_returns: need at least two values");
  std::vector<double> logs(n);
  for (size_t i = 0; i < n; ++i) {
    if (!series.values[i].has_value())
      throw DataQualityError("to_log_returns: missing value at index " +
                             std::to_string(i) + " (" + series.dates[i] + ")");
    double v = *series.values[i];
    if (!(v > 0.0) || !std::isfinite(v))
      throw DataQualityError("to_log_returns: non-positive value at index " +
                             std::to_string(i) + " (" + series.dates[i] + ")");
    logs[i] = std::log(v);
  }
  std::vector<double> returns(n - 1);
  for (size_t i = 1; i < n; ++i) returns[i - 1] = logs[i] - logs[i - 1];
  return returns;
}

}  // namespace carmacds::dataio
