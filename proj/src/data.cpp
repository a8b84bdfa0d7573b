#include "dtsm/data.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace dtsm {
namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    while (!field.empty() && std::isspace(static_cast<unsigned char>(field.back())))
      field.pop_back();
    std::size_t start = 0;
    while (start < field.size() &&
           std::isspace(static_cast<unsigned char>(field[start])))
      ++start;
    out.push_back(field.substr(start));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& text, int row, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(text, &pos);
    if (pos != text.size()) throw std::invalid_argument("trailing characters");
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite");
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("row " + std::to_string(row) + ": bad " + what +
                             " value '" + text + "'");
  }
}

std::string format_exact(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

int parse_iso_month(const std::string& text) {
  // YYYY-MM or YYYY-MM-DD
  if (text.size() < 7 || text[4] != '-')
    throw std::runtime_error("bad date '" + text + "' (want YYYY-MM)");
  int year = 0, month = 0;
  auto r1 = std::from_chars(text.data(), text.data() + 4, year);
  auto r2 = std::from_chars(text.data() + 5, text.data() + 7, month);
  if (r1.ec != std::errc() || r2.ec != std::errc() || month < 1 || month > 12)
    throw std::runtime_error("bad date '" + text + "' (want YYYY-MM)");
  return year * 12 + (month - 1);
}

std::string format_iso_month(int month_index) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "%04d-%02d", month_index / 12,
                month_index % 12 + 1);
  return buf;
}

void YieldPanel::validate() const {
  if (yields.rows() != static_cast<Eigen::Index>(dates.size()) ||
      dates.size() != month_index.size())
    throw std::runtime_error("YieldPanel: row bookkeeping mismatch");
  if (yields.cols() != static_cast<Eigen::Index>(maturities.size()))
    throw std::runtime_error("YieldPanel: column bookkeeping mismatch");
  for (std::size_t i = 0; i + 1 < month_index.size(); ++i)
    if (month_index[i] >= month_index[i + 1])
      throw std::runtime_error("YieldPanel: dates not strictly increasing at row " +
                               std::to_string(i + 2));
  for (std::size_t j = 0; j + 1 < maturities.size(); ++j)
    if (maturities[j] >= maturities[j + 1])
      throw std::runtime_error("YieldPanel: maturities not strictly increasing");
  if (!yields.allFinite()) throw std::runtime_error("YieldPanel: non-finite cells");
}

int YieldPanel::last_index_on_or_before(const std::string& iso_month) const {
  const int target = parse_iso_month(iso_month);
  int idx = -1;
  for (std::size_t i = 0; i < month_index.size(); ++i)
    if (month_index[i] <= target) idx = static_cast<int>(i);
  return idx;
}

YieldPanel load_yield_panel(const std::string& path,
                            std::optional<bool> values_are_percent) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open yield panel " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  const auto header = split_csv_line(line);
  if (header.size() < 2 || header[0] != "date")
    throw std::runtime_error(path + ": header must be 'date,<months>...'");

  YieldPanel panel;
  for (std::size_t k = 1; k < header.size(); ++k) {
    int m = 0;
    const auto& h = header[k];
    auto res = std::from_chars(h.data(), h.data() + h.size(), m);
    if (res.ec != std::errc() || res.ptr != h.data() + h.size() || m < 1)
      throw std::runtime_error(path + ": maturity column '" + h +
                               "' is not a month count");
    panel.maturities.push_back(m);
  }

  std::vector<std::vector<double>> rows;
  int row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw std::runtime_error(path + ": row " + std::to_string(row_no) +
                               " has " + std::to_string(fields.size()) +
                               " fields, want " + std::to_string(header.size()));
    panel.dates.push_back(fields[0]);
    panel.month_index.push_back(parse_iso_month(fields[0]));
    std::vector<double> vals;
    for (std::size_t k = 1; k < fields.size(); ++k)
      vals.push_back(parse_double(fields[k], row_no, "yield"));
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) throw std::runtime_error(path + ": no data rows");

  panel.yields.resize(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(panel.maturities.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t k = 0; k < rows[i].size(); ++k)
      panel.yields(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          rows[i][k];

  bool percent;
  if (values_are_percent.has_value()) {
    percent = *values_are_percent;
    panel.provenance = percent ? "percent-converted (forced)" : "decimal (forced)";
  } else {
    std::vector<double> flat(panel.yields.data(),
                             panel.yields.data() + panel.yields.size());
    std::nth_element(flat.begin(), flat.begin() + flat.size() / 2, flat.end());
    percent = std::abs(flat[flat.size() / 2]) > 0.5;
    panel.provenance = percent ? "percent-converted (detected)" : "decimal (detected)";
  }
  if (percent) panel.yields /= 100.0;

  panel.validate();
  return panel;
}

void save_yield_panel(const std::string& path, const YieldPanel& panel) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "date";
  for (int m : panel.maturities) out << ',' << m;
  out << '\n';
  for (int i = 0; i < panel.rows(); ++i) {
    out << panel.dates[static_cast<std::size_t>(i)];
    for (Eigen::Index k = 0; k < panel.yields.cols(); ++k)
      out << ',' << format_exact(panel.yields(i, k));
    out << '\n';
  }
}

MacroSeries load_macro_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open macro csv " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  const auto header = split_csv_line(line);
  if (header.size() != 3 || header[0] != "date" || header[1] != "name" ||
      header[2] != "value")
    throw std::runtime_error(path + ": header must be 'date,name,value'");

  std::map<int, std::map<std::string, double>> cells;
  std::vector<std::string> names;
  int row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 3)
      throw std::runtime_error(path + ": row " + std::to_string(row_no) +
                               ": want 3 fields");
    const int month = parse_iso_month(fields[0]);
    const double value = parse_double(fields[2], row_no, "macro");
    cells[month][fields[1]] = value;
    if (std::find(names.begin(), names.end(), fields[1]) == names.end())
      names.push_back(fields[1]);
  }

  MacroSeries out;
  out.names = names;
  out.month_index.reserve(cells.size());
  for (const auto& [month, _] : cells) out.month_index.push_back(month);
  out.values.resize(static_cast<Eigen::Index>(cells.size()),
                    static_cast<Eigen::Index>(names.size()));
  out.values.setConstant(std::nan(""));
  Eigen::Index row = 0;
  for (const auto& [month, by_name] : cells) {
    for (std::size_t k = 0; k < names.size(); ++k) {
      const auto it = by_name.find(names[k]);
      if (it != by_name.end())
        out.values(row, static_cast<Eigen::Index>(k)) = it->second;
    }
    ++row;
  }
  return out;
}

}  // namespace dtsm
