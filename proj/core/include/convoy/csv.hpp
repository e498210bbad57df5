#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace convoy {

/// Floats serialize with 6 significant digits; whole numbers print without a
/// decimal point so integer-valued columns stay readable.
std::string csv_format(double value);
std::string csv_format(long value);

/// Minimal CSV emitter: header row, UTF-8, '\n' line ends.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);

  void write_row(const std::vector<std::string>& fields);
  bool good() const { return out_.good(); }

 private:
  std::ofstream out_;
  std::size_t columns_;
};

}  // namespace convoy
