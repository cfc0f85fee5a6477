#pragma once

#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace fdi::csv {

/// Line-oriented reader for the simple comma-separated files this project
/// writes: no quoting, '#' starts a comment line, blank lines are skipped.
class Reader {
 public:
  Reader(std::istream& in, std::string source);

  /// Next non-empty record, or false at end of input.
  bool next(std::vector<std::string>& fields);

  int line() const noexcept { return line_; }
  const std::string& source() const noexcept { return source_; }

  double to_double(const std::string& field, std::string_view column) const;
  int to_int(const std::string& field, std::string_view column) const;

  /// Throws ParseError unless the record matches `names` exactly.
  void expect_header(const std::vector<std::string>& names);

 private:
  std::istream& in_;
  std::string source_;
  int line_ = 0;
};

std::string trim(std::string_view text);

}  // namespace fdi::csv
