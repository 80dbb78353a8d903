#include "qodc/csv.hpp"

#include <charconv>
#include <fstream>

#include "qodc/errors.hpp"

namespace qodc {

std::string format_double(double value) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) throw Error("cannot format number");
  return {buf, end};
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : path_(path) {
  for (const auto& h : header) cell(h);
  end_row();
}

void CsvWriter::sep() {
  if (row_started_) buffer_ += ',';
  row_started_ = true;
}

CsvWriter& CsvWriter::cell(double value) {
  sep();
  buffer_ += format_double(value);
  return *this;
}

CsvWriter& CsvWriter::cell(long long value) {
  sep();
  buffer_ += std::to_string(value);
  return *this;
}

CsvWriter& CsvWriter::cell(const std::string& value) {
  sep();
  buffer_ += value;
  return *this;
}

void CsvWriter::end_row() {
  buffer_ += '\n';
  row_started_ = false;
}

void CsvWriter::close() {
  if (!path_.parent_path().empty()) std::filesystem::create_directories(path_.parent_path());
  std::ofstream out(path_, std::ios::binary);
  if (!out) throw Error("cannot write " + path_.string());
  out << buffer_;
  if (!out) throw Error("failed writing " + path_.string());
}

}  // namespace qodc
