#include "lambdaband/format.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

namespace lambdaband {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string format_shortest(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

Json json_number(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return nullptr;
  return x;
}

Json interval_json(const ExtInterval& interval) {
  Json j = Json::object();
  if (interval.empty) {
    j["empty"] = true;
    return j;
  }
  j["lower"] = json_number(interval.lo);
  j["upper"] = json_number(interval.hi);
  j["empty"] = false;
  return j;
}

namespace {

void write_value(const Json& v, std::ostream& out, int indent, int depth) {
  auto newline = [&](int d) {
    if (indent <= 0) return;
    out << '\n' << std::string(static_cast<std::size_t>(indent * d), ' ');
  };
  switch (v.type()) {
    case Json::value_t::object: {
      if (v.empty()) {
        out << "{}";
        return;
      }
      out << '{';
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out << ',';
        first = false;
        newline(depth + 1);
        out << Json(it.key()).dump() << (indent > 0 ? ": " : ":");
        write_value(it.value(), out, indent, depth + 1);
      }
      newline(depth);
      out << '}';
      return;
    }
    case Json::value_t::array: {
      if (v.empty()) {
        out << "[]";
        return;
      }
      out << '[';
      bool first = true;
      for (const auto& item : v) {
        if (!first) out << ',';
        first = false;
        newline(depth + 1);
        write_value(item, out, indent, depth + 1);
      }
      newline(depth);
      out << ']';
      return;
    }
    case Json::value_t::number_float: {
      double x = v.get<double>();
      if (std::isfinite(x))
        out << format_double(x);
      else
        out << Json(format_double(x)).dump();
      return;
    }
    default:
      out << v.dump();
  }
}

}  // namespace

void write_json(const Json& value, std::ostream& out, int indent) {
  write_value(value, out, indent, 0);
  out << '\n';
}

std::string dump_json(const Json& value, int indent) {
  std::ostringstream os;
  write_json(value, os, indent);
  return os.str();
}

}  // namespace lambdaband
