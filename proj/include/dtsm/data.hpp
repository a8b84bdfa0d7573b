#pragma once

#include <optional>
#include <string>
#include <vector>
#include <Eigen/Dense>

namespace dtsm {

// Monthly yield panel in per-annum decimal units. Dates are ISO year-month
// strings at the IO boundary and integer month indices internally.
struct YieldPanel {
  std::vector<std::string> dates;
  std::vector<int> month_index;  // year * 12 + (month - 1)
  std::vector<int> maturities;   // months
  Eigen::MatrixXd yields;
  std::string provenance;

  int rows() const { return static_cast<int>(yields.rows()); }
  void validate() const;
  // first row index with date strictly after the given ISO month, minus one;
  // -1 when no row is on or before it
  int last_index_on_or_before(const std::string& iso_month) const;
};

int parse_iso_month(const std::string& text);
std::string format_iso_month(int month_index);

// CSV with header "date,<m1>,<m2>,..." (maturities in months). Values in
// percent are detected and converted unless the override forces a reading.
YieldPanel load_yield_panel(const std::string& path,
                            std::optional<bool> values_are_percent = {});

// Round-trip exact save (shortest-exact float formatting).
void save_yield_panel(const std::string& path, const YieldPanel& panel);

// Long-format macro series: date,name,value.
struct MacroSeries {
  std::vector<std::string> names;
  std::vector<int> month_index;       // union of months, ascending
  Eigen::MatrixXd values;             // months x names, NaN when missing
};
MacroSeries load_macro_csv(const std::string& path);

}  // namespace dtsm
