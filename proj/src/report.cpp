#include "qdisc/report.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

namespace qdisc::cli {

double round12(double x) {
  if (!std::isfinite(x) || x == 0.0) return x;
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.11e", x);
  return std::strtod(buf, nullptr);
}

json round_floats(json value) {
  if (value.is_number_float()) return round12(value.get<double>());
  if (value.is_object()) {
    json out = json::object();
    for (auto& [k, v] : value.items()) out[k] = round_floats(v);
    return out;
  }
  if (value.is_array()) {
    json out = json::array();
    for (auto& v : value) out.push_back(round_floats(v));
    return out;
  }
  return value;
}

namespace {

void write_string(std::string& out, const std::string& s) {
  out += '"';
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  out += '"';
}

void write_double(std::string& out, double x) {
  if (std::isnan(x)) {
    out += "\"nan\"";
  } else if (std::isinf(x)) {
    out += x > 0 ? "\"inf\"" : "\"-inf\"";
  } else {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    out += buf;
  }
}

void write_value(std::string& out, const json& v, int indent) {
  const std::string pad(2 * indent, ' ');
  const std::string pad_in(2 * (indent + 1), ' ');
  if (v.is_object()) {
    if (v.empty()) {
      out += "{}";
      return;
    }
    out += "{\n";
    bool first = true;
    for (auto& [k, val] : v.items()) {
      if (!first) out += ",\n";
      first = false;
      out += pad_in;
      write_string(out, k);
      out += ": ";
      write_value(out, val, indent + 1);
    }
    out += "\n" + pad + "}";
  } else if (v.is_array()) {
    if (v.empty()) {
      out += "[]";
      return;
    }
    // scalar arrays inline, structured arrays one element per line
    bool scalars = true;
    for (auto& e : v) {
      if (e.is_object() || e.is_array()) scalars = false;
    }
    if (scalars) {
      out += "[";
      bool first = true;
      for (auto& e : v) {
        if (!first) out += ", ";
        first = false;
        write_value(out, e, indent);
      }
      out += "]";
    } else {
      out += "[\n";
      bool first = true;
      for (auto& e : v) {
        if (!first) out += ",\n";
        first = false;
        out += pad_in;
        write_value(out, e, indent + 1);
      }
      out += "\n" + pad + "]";
    }
  } else if (v.is_string()) {
    write_string(out, v.get<std::string>());
  } else if (v.is_boolean()) {
    out += v.get<bool>() ? "true" : "false";
  } else if (v.is_number_float()) {
    write_double(out, v.get<double>());
  } else if (v.is_number_integer()) {
    out += std::to_string(v.get<long long>());
  } else if (v.is_number_unsigned()) {
    out += std::to_string(v.get<unsigned long long>());
  } else {
    out += "null";
  }
}

void flatten(const json& v, const std::string& prefix,
             std::vector<std::pair<std::string, json>>& out) {
  if (v.is_object()) {
    for (auto& [k, val] : v.items()) {
      flatten(val, prefix.empty() ? k : prefix + "." + k, out);
    }
  } else if (v.is_array()) {
    int i = 0;
    for (auto& e : v) {
      flatten(e, prefix + "[" + std::to_string(i) + "]", out);
      ++i;
    }
  } else {
    out.emplace_back(prefix, v);
  }
}

std::string csv_cell(const json& v) {
  if (v.is_string()) {
    std::string s = v.get<std::string>();
    bool quote = s.find_first_of(",\"\n") != std::string::npos;
    if (!quote) return s;
    std::string out = "\"";
    for (char c : s) {
      if (c == '"') out += '"';
      out += c;
    }
    return out + "\"";
  }
  std::string out;
  if (v.is_number_float()) {
    write_double(out, v.get<double>());
    // strings are quoted by write_double; CSV wants them bare
    if (out.size() >= 2 && out.front() == '"') out = out.substr(1, out.size() - 2);
    return out;
  }
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_null()) return "";
  write_value(out, v, 0);
  return out;
}

}  // namespace

std::string emit_json(const json& report) {
  std::string out;
  write_value(out, report, 0);
  out += "\n";
  return out;
}

std::string emit_csv(const std::vector<json>& records) {
  // header: union of keys in first-appearance order
  std::vector<std::string> header;
  std::vector<std::vector<std::pair<std::string, json>>> flat(records.size());
  for (size_t r = 0; r < records.size(); ++r) {
    flatten(records[r], "", flat[r]);
    for (auto& [k, v] : flat[r]) {
      if (std::find(header.begin(), header.end(), k) == header.end()) {
        header.push_back(k);
      }
    }
  }
  std::string out;
  for (size_t i = 0; i < header.size(); ++i) {
    if (i) out += ",";
    out += header[i];
  }
  out += "\n";
  for (auto& row : flat) {
    std::map<std::string, json> lookup(row.begin(), row.end());
    for (size_t i = 0; i < header.size(); ++i) {
      if (i) out += ",";
      auto it = lookup.find(header[i]);
      if (it != lookup.end()) out += csv_cell(it->second);
    }
    out += "\n";
  }
  return out;
}

}  // namespace qdisc::cli
