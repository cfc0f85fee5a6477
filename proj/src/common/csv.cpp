#include "fdi/csv.hpp"

#include <charconv>

#include <fmt/format.h>

#include "fdi/error.hpp"

namespace fdi::csv {

std::string trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return std::string(text.substr(first, last - first + 1));
}

Reader::Reader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

bool Reader::next(std::vector<std::string>& fields) {
  std::string raw;
  while (std::getline(in_, raw)) {
    ++line_;
    const auto text = trim(raw);
    if (text.empty() || text.front() == '#') continue;
    fields.clear();
    std::size_t start = 0;
    while (true) {
      const auto comma = text.find(',', start);
      fields.push_back(trim(std::string_view(text).substr(start, comma - start)));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    return true;
  }
  return false;
}

double Reader::to_double(const std::string& field, std::string_view column) const {
  double value = 0.0;
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw ParseError(fmt::format("column '{}': '{}' is not a number", column, field), source_, line_);
  }
  return value;
}

int Reader::to_int(const std::string& field, std::string_view column) const {
  int value = 0;
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw ParseError(fmt::format("column '{}': '{}' is not an integer", column, field), source_, line_);
  }
  return value;
}

void Reader::expect_header(const std::vector<std::string>& names) {
  std::vector<std::string> fields;
  if (!next(fields)) throw ParseError("missing header", source_, line_);
  if (fields != names) {
    throw ParseError(fmt::format("unexpected header, expected '{}'", fmt::join(names, ",")), source_, line_);
  }
}

}  // namespace fdi::csv
