#include "angsurf/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "angsurf/error.hpp"

namespace angsurf {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && (std::isspace(static_cast<unsigned char>(s[a])) || s[a] == '"')) ++a;
  while (b > a && (std::isspace(static_cast<unsigned char>(s[b - 1])) || s[b - 1] == '"')) --b;
  return s.substr(a, b - a);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw IoError("CSV input lacks a '" + name + "' column");
}

std::size_t CsvTable::column_any(const std::vector<std::string>& names) const {
  for (const auto& n : names) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == n) return i;
    }
  }
  std::string list;
  for (const auto& n : names) list += (list.empty() ? "" : ", ") + n;
  throw IoError("CSV input lacks any of the columns: " + list);
}

std::vector<double> CsvTable::numeric_column(std::size_t index) const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (index >= rows[r].size()) throw IoError("CSV row " + std::to_string(r + 2) + " is too short");
    const std::string& s = rows[r][index];
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      if (s == "nan" || s == "NaN" || s == "NA") {
        v = std::nan("");
      } else {
        throw IoError("CSV row " + std::to_string(r + 2) + ": '" + s + "' is not a number");
      }
    }
    out.push_back(v);
  }
  return out;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open input file '" + path.string() + "'");
  CsvTable table;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    if (!have_header) {
      table.header = split(line);
      have_header = true;
    } else {
      table.rows.push_back(split(line));
    }
  }
  if (!have_header) throw IoError("input file '" + path.string() + "' is empty");
  return table;
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

struct CsvWriter::Impl {
  std::ofstream out;
  std::filesystem::path path;
  bool first = true;
};

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : impl_(new Impl) {
  impl_->path = path;
  impl_->out.open(path, std::ios::binary | std::ios::trunc);
  if (!impl_->out) {
    throw IoError("cannot write output file '" + path.string() + "'");
  }
  for (std::size_t i = 0; i < header.size(); ++i) impl_->out << (i ? "," : "") << header[i];
  impl_->out << '\n';
}

CsvWriter::~CsvWriter() = default;

CsvWriter& CsvWriter::field(const std::string& text) {
  impl_->out << (impl_->first ? "" : ",") << text;
  impl_->first = false;
  return *this;
}

CsvWriter& CsvWriter::field(double value) { return field(format_number(value)); }

CsvWriter& CsvWriter::field(long long value) { return field(std::to_string(value)); }

void CsvWriter::end_row() {
  impl_->out << '\n';
  impl_->first = true;
  if (!impl_->out) throw IoError("failed writing '" + impl_->path.string() + "'");
}

}  // namespace angsurf
