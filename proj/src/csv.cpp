#include "ctsim/csv.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace ctsim::csv {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

}  // namespace

int Table::column(const std::string& name) const {
  int c = column_or(name);
  if (c < 0) throw ParseError(1, "missing required column '" + name + "'");
  return c;
}

int Table::column_or(const std::string& name) const {
  auto it = std::find(header.begin(), header.end(), name);
  return it == header.end() ? -1 : int(it - header.begin());
}

Table read_string(const std::string& text) {
  Table t;
  std::stringstream ss(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    std::string trimmed = trim(line);
    if (trimmed.empty()) continue;
    if (t.header.empty()) {
      t.header = split(trimmed);
      continue;
    }
    auto row = split(trimmed);
    if (row.size() != t.header.size())
      throw ParseError(lineno, "expected " + std::to_string(t.header.size()) +
                                   " fields, got " + std::to_string(row.size()));
    t.rows.push_back(std::move(row));
  }
  if (t.header.empty()) throw ParseError(1, "empty file: missing header");
  return t;
}

Table read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return read_string(buf.str());
}

int to_int(const std::string& s, std::size_t line, const std::string& field) {
  try {
    std::size_t pos = 0;
    int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw ParseError(line, "field '" + field + "': not an integer: '" + s + "'");
  }
}

double to_double(const std::string& s, std::size_t line, const std::string& field) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw ParseError(line, "field '" + field + "': not a number: '" + s + "'");
  }
}

}  // namespace ctsim::csv
