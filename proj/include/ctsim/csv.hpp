#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace ctsim::csv {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // header column index; throws when the column is missing
  int column(const std::string& name) const;
  // optional column; -1 when absent
  int column_or(const std::string& name) const;
  // 1-based source line of data row i (header is line 1)
  std::size_t line_of(std::size_t row_index) const { return row_index + 2; }
};

Table read_file(const std::string& path);
Table read_string(const std::string& text);

int to_int(const std::string& s, std::size_t line, const std::string& field);
double to_double(const std::string& s, std::size_t line, const std::string& field);

}  // namespace ctsim::csv
