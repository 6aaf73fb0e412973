#pragma once

#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace metaphor::csv {

// RFC 4180 reader: quoted fields may contain separators, doubled quotes and
// newlines. Tracks the physical line on which each record starts.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  // Returns false at end of input. Throws FormatError on an unterminated quote.
  bool next(std::vector<std::string>& fields);
  std::size_t record_line() const { return record_line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
  std::size_t record_line_ = 0;
};

std::vector<std::vector<std::string>> parse(std::string_view text);

std::string escape(std::string_view field);
std::string row(const std::vector<std::string>& fields);

// Column lookup by header name.
class Header {
 public:
  Header() = default;
  explicit Header(std::vector<std::string> names);
  std::optional<std::size_t> find(std::string_view name) const;
  std::size_t require(std::string_view name) const;
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
};

}  // namespace metaphor::csv
