#pragma once

#include <string>
#include <vector>

namespace lambdaband {

enum class DataFormat { PlainText, CSV };

struct DataSource {
  std::string path;
  DataFormat format = DataFormat::PlainText;
  // CSV only: header name, or zero-based index if all digits.
  std::string column = "0";
};

// Guesses CSV from a ".csv" extension.
DataFormat guess_format(const std::string& path);

// Throws IoError when the file cannot be read and std::invalid_argument for
// non-numeric or non-finite entries.
std::vector<double> load_data(const DataSource& source);

}  // namespace lambdaband
