#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

namespace angsurf {

/// Header plus rows of raw fields. Fields are comma separated; surrounding
/// whitespace and double quotes are stripped. Blank lines are skipped.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column; throws IoError when absent.
  std::size_t column(const std::string& name) const;
  /// First of `names` present in the header; throws IoError listing them otherwise.
  std::size_t column_any(const std::vector<std::string>& names) const;
  std::vector<double> numeric_column(std::size_t index) const;
};

CsvTable read_csv(const std::filesystem::path& path);

/// Writes `header` then `rows`; numbers are formatted with 17 significant digits.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
  ~CsvWriter();
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  CsvWriter& field(const std::string& text);
  CsvWriter& field(double value);
  CsvWriter& field(long long value);
  CsvWriter& field(std::size_t value) { return field(static_cast<long long>(value)); }
  void end_row();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::string format_number(double value);

}  // namespace angsurf
