#include "cdel/csv.hpp"

#include <sstream>

#include "cdel/errors.hpp"

namespace cdel::csv {

bool Reader::next(std::vector<std::string>& fields) {
  fields.clear();
  std::string line;
  while (true) {
    if (!std::getline(in_, line)) return false;
    ++line_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) break;
  }
  record_line_ = line_;

  std::string field;
  bool quoted = false;
  std::size_t i = 0;
  while (true) {
    if (i == line.size()) {
      if (!quoted) break;
      // Quoted field spans a newline.
      std::string more;
      if (!std::getline(in_, more)) {
        throw DataError("unterminated quoted field starting on line " + std::to_string(record_line_));
      }
      ++line_;
      if (!more.empty() && more.back() == '\r') more.pop_back();
      field.push_back('\n');
      line = std::move(more);
      i = 0;
      continue;
    }
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          i += 2;
          continue;
        }
        quoted = false;
        ++i;
        continue;
      }
      field.push_back(ch);
      ++i;
    } else if (ch == '"' && field.empty()) {
      quoted = true;
      ++i;
    } else if (ch == ',') {
      fields.push_back(std::move(field));
      field.clear();
      ++i;
    } else {
      field.push_back(ch);
      ++i;
    }
  }
  fields.push_back(std::move(field));
  return true;
}

std::map<std::string, std::string> Reader::read_preamble() {
  std::map<std::string, std::string> out;
  while (in_.peek() == '#') {
    std::string line;
    std::getline(in_, line);
    ++line_;
    std::istringstream words(line.substr(1));
    std::string word;
    while (words >> word) {
      auto eq = word.find('=');
      if (eq == std::string::npos) continue;
      out[word.substr(0, eq)] = word.substr(eq + 1);
    }
  }
  return out;
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

std::string join(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(',');
    out += escape(fields[i]);
  }
  return out;
}

}  // namespace cdel::csv
