#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace qodc {

/// Shortest decimal string that reads back to exactly `value`.
std::string format_double(double value);

/// Minimal CSV writer: header row, comma separated, full float precision.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

  CsvWriter& cell(double value);
  CsvWriter& cell(long long value);
  CsvWriter& cell(int value) { return cell(static_cast<long long>(value)); }
  CsvWriter& cell(const std::string& value);
  void end_row();
  void close();

 private:
  void sep();
  std::filesystem::path path_;
  std::string buffer_;
  bool row_started_ = false;
};

}  // namespace qodc
