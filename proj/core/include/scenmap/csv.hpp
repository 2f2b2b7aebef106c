#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace scenmap::csv {

using Row = std::vector<std::string>;

/// A parsed CSV document. The first record is always the header.
struct Document {
  Row header;
  std::vector<Row> rows;

  /// Index of `name` in the header, or -1.
  int column(std::string_view name) const;
};

/// RFC-4180 reader: quoted fields, doubled quotes, embedded newlines, CRLF or LF.
/// A leading UTF-8 byte-order mark is skipped. Every data row must have the
/// header's width.
Document parse(std::string_view text);

/// Quotes a field only when it contains a comma, quote, CR or LF.
std::string escape(std::string_view field);

void write_row(std::ostream& out, const Row& row);
std::string write(const Document& doc);

}  // namespace scenmap::csv
