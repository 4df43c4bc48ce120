#include "lambdaband/data.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "lambdaband/errors.hpp"

namespace lambdaband {

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

double parse_value(std::string_view token, std::size_t line) {
  token = trim(token);
  if (token.size() >= 2 && token.front() == '"' && token.back() == '"') token = token.substr(1, token.size() - 2);
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double v = 0.0;
  auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (token.empty() || res.ec != std::errc() || res.ptr != token.data() + token.size())
    throw std::invalid_argument("line " + std::to_string(line) + ": not a number: '" + std::string(token) + "'");
  if (!std::isfinite(v))
    throw std::invalid_argument("line " + std::to_string(line) + ": non-finite value");
  return v;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == ',' && !quoted) {
      fields.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  fields.push_back(line.substr(start));
  return fields;
}

std::string unquote(std::string_view s) {
  s = trim(s);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return std::string(s);
}

}  // namespace

DataFormat guess_format(const std::string& path) {
  auto dot = path.rfind('.');
  if (dot == std::string::npos) return DataFormat::PlainText;
  std::string ext = path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == "csv" ? DataFormat::CSV : DataFormat::PlainText;
}

std::vector<double> load_data(const DataSource& source) {
  std::ifstream in(source.path);
  if (!in) throw IoError("cannot open data file '" + source.path + "'");

  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;

  if (source.format == DataFormat::PlainText) {
    while (std::getline(in, line)) {
      ++line_no;
      if (trim(line).empty()) continue;
      values.push_back(parse_value(line, line_no));
    }
  } else {
    std::size_t column = 0;
    if (!std::getline(in, line)) throw std::invalid_argument("CSV file has no header row");
    ++line_no;
    const auto header = split_fields(line);
    const bool numeric_column =
        !source.column.empty() && std::all_of(source.column.begin(), source.column.end(),
                                              [](unsigned char c) { return std::isdigit(c) != 0; });
    if (numeric_column) {
      column = std::stoul(source.column);
    } else {
      auto it = std::find_if(header.begin(), header.end(),
                             [&](std::string_view h) { return unquote(h) == source.column; });
      if (it == header.end()) throw std::invalid_argument("CSV column '" + source.column + "' not found");
      column = static_cast<std::size_t>(it - header.begin());
    }
    if (column >= header.size()) throw std::invalid_argument("CSV column index out of range");
    while (std::getline(in, line)) {
      ++line_no;
      if (trim(line).empty()) continue;
      const auto fields = split_fields(line);
      if (column >= fields.size())
        throw std::invalid_argument("line " + std::to_string(line_no) + ": missing column");
      values.push_back(parse_value(fields[column], line_no));
    }
  }
  if (in.bad()) throw IoError("error reading '" + source.path + "'");
  if (values.empty()) throw std::invalid_argument("data file '" + source.path + "' holds no values");
  return values;
}

}  // namespace lambdaband
