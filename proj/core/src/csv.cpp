#include "scenmap/csv.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "numfmt.hpp"
#include "scenmap/error.hpp"

namespace scenmap {
namespace csv {

int Document::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  return -1;
}

Document parse(std::string_view text) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);

  std::vector<Row> records;
  Row record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;  // distinguishes an empty trailing line from an empty field
  std::size_t line = 1;

  auto end_record = [&] {
    record.push_back(std::move(field));
    field.clear();
    records.push_back(std::move(record));
    record.clear();
    field_started = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty()) {
          throw Error(ErrorKind::invalid_input, fmt::format("csv line {}: stray quote inside unquoted field", line));
        }
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        record.push_back(std::move(field));
        field.clear();
        field_started = true;
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
        [[fallthrough]];
      case '\n':
        end_record();
        ++line;
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (in_quotes) throw Error(ErrorKind::invalid_input, "csv: unterminated quoted field");
  if (field_started || !record.empty()) end_record();

  if (records.empty()) throw Error(ErrorKind::invalid_input, "csv: missing header row");

  Document doc;
  doc.header = std::move(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    auto& row = records[r];
    if (row.size() == 1 && row[0].empty() && doc.header.size() != 1) continue;  // blank line
    if (row.size() != doc.header.size()) {
      throw Error(ErrorKind::invalid_input,
                  fmt::format("csv record {}: expected {} fields, found {}", r + 1, doc.header.size(), row.size()));
    }
    doc.rows.push_back(std::move(row));
  }
  return doc;
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_row(std::ostream& out, const Row& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out << ',';
    out << escape(row[i]);
  }
  out << '\n';
}

std::string write(const Document& doc) {
  std::ostringstream out;
  write_row(out, doc.header);
  for (const auto& row : doc.rows) write_row(out, row);
  return out.str();
}

}  // namespace csv

namespace detail {

std::string format_sig(double value, int digits) {
  if (value == 0.0) return "0";  // also folds -0
  return fmt::format("{:.{}g}", value, digits);
}

std::string format_fixed(double value, int decimals) {
  std::string s = fmt::format("{:.{}f}", value, decimals);
  // "-0.000000" reads as a sign flip that is not there.
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

std::string format_optional(const std::optional<double>& value, int digits) {
  return value ? format_sig(*value, digits) : std::string();
}

double round_sig(double value, int digits) {
  if (!std::isfinite(value) || value == 0.0) return value;
  return std::stod(fmt::format("{:.{}g}", value, digits));
}

std::string_view trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t");
  return text.substr(first, last - first + 1);
}

std::optional<double> parse_double(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  std::string buffer(text);
  std::size_t used = 0;
  try {
    const double v = std::stod(buffer, &used);
    if (used != buffer.size()) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::optional<long long> parse_integer(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  std::string buffer(text);
  std::size_t used = 0;
  try {
    const long long v = std::stoll(buffer, &used, 10);
    if (used != buffer.size()) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace detail
}  // namespace scenmap
