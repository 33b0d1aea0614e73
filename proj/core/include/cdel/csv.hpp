#pragma once

#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace cdel::csv {

// RFC 4180-style reader: comma separated, double-quoted fields may contain
// commas, newlines and doubled quotes. A trailing CR is dropped for tolerance.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  // Reads the next record; false at end of input. Blank lines are skipped.
  bool next(std::vector<std::string>& fields);

  // Consumes leading `# key=value key=value` lines before the first record.
  std::map<std::string, std::string> read_preamble();

  // Physical line on which the last record returned by next() started.
  [[nodiscard]] std::size_t line() const noexcept { return record_line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
  std::size_t record_line_ = 0;
};

// Quotes the field when it contains a comma, quote, CR or LF.
[[nodiscard]] std::string escape(std::string_view field);

[[nodiscard]] std::string join(const std::vector<std::string>& fields);

}  // namespace cdel::csv
