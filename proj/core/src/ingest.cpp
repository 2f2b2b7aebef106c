#include "scenmap/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <tuple>
#include <unordered_set>

#include <fmt/format.h>

#include "numfmt.hpp"
#include "scenmap/csv.hpp"
#include "scenmap/error.hpp"

namespace scenmap {

std::string_view to_string(Orientation o) noexcept {
  return o == Orientation::descending ? "descending" : "ascending";
}

Orientation parse_orientation(std::string_view text) {
  if (text == "descending") return Orientation::descending;
  if (text == "ascending") return Orientation::ascending;
  throw Error(ErrorKind::invalid_input, fmt::format("unknown orientation '{}'", text));
}

void SurveySchema::validate() const {
  if (scale_points < 2) {
    throw Error(ErrorKind::invalid_input, fmt::format("scale needs at least 2 points, has {}", scale_points));
  }
  if (dimensions.empty()) throw Error(ErrorKind::invalid_input, "schema declares no dimensions");
  std::set<std::string> names;
  for (std::size_t i = 0; i < dimensions.size(); ++i) {
    if (dimensions[i].index != static_cast<int>(i) + 1) {
      throw Error(ErrorKind::invalid_input,
                  fmt::format("dimension indices must be contiguous from 1; position {} has index {}", i + 1,
                              dimensions[i].index));
    }
    if (dimensions[i].name.empty()) throw Error(ErrorKind::invalid_input, "dimension with empty name");
    if (!names.insert(dimensions[i].name).second) {
      throw Error(ErrorKind::duplicate, fmt::format("dimension '{}' declared twice", dimensions[i].name));
    }
  }
  if (id_column.empty()) throw Error(ErrorKind::invalid_input, "id column name is empty");
  topics.validate();
}

Orientation SurveySchema::orientation_of(int dimension_index) const {
  for (const auto& d : dimensions) {
    if (d.index == dimension_index) return d.orientation.value_or(orientation);
  }
  return orientation;
}

const Dimension* SurveySchema::find_dimension(std::string_view name) const {
  for (const auto& d : dimensions) {
    if (d.name == name) return &d;
  }
  return nullptr;
}

std::vector<std::string> SurveySchema::dimension_names() const {
  std::vector<std::string> out;
  for (const auto& d : dimensions) out.push_back(d.name);
  return out;
}

double rescale(int value, int scale_points, Orientation orientation) {
  if (scale_points < 2) throw Error(ErrorKind::invalid_input, fmt::format("scale needs at least 2 points, has {}", scale_points));
  if (value < 1 || value > scale_points) {
    throw Error(ErrorKind::out_of_range, fmt::format("response {} outside [1, {}]", value, scale_points));
  }
  // Written as 1 - 2(v-1)/(k-1) so both endpoints and the odd-k midpoint are exact.
  const double descending = 1.0 - 2.0 * static_cast<double>(value - 1) / static_cast<double>(scale_points - 1);
  if (orientation == Orientation::descending) return descending;
  return descending == 0.0 ? 0.0 : -descending;
}

double inverse_rescale(double fraction, int scale_points, Orientation orientation) {
  if (scale_points < 2) throw Error(ErrorKind::invalid_input, fmt::format("scale needs at least 2 points, has {}", scale_points));
  const double f = orientation == Orientation::descending ? fraction : -fraction;
  return 1.0 + (1.0 - f) * static_cast<double>(scale_points - 1) / 2.0;
}

namespace ingest {

std::optional<CellKey> parse_cell_column(std::string_view name) {
  // a{N}_matrix_{M}, decimal N and M
  constexpr std::string_view infix = "_matrix_";
  if (name.size() < 1 + 1 + infix.size() + 1 || name[0] != 'a') return std::nullopt;
  const auto at = name.find(infix);
  if (at == std::string_view::npos) return std::nullopt;
  const auto topic = name.substr(1, at - 1);
  const auto dim = name.substr(at + infix.size());
  auto digits = [](std::string_view s) {
    return !s.empty() && s.size() <= 9 && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
  };
  if (!digits(topic) || !digits(dim)) return std::nullopt;
  return CellKey{std::stoi(std::string(topic)), std::stoi(std::string(dim))};
}

std::string cell_column_name(CellKey key) { return fmt::format("a{}_matrix_{}", key.topic, key.dimension); }

const WideRow* WideTable::find(std::string_view id) const {
  for (const auto& r : rows) {
    if (r.id == id) return &r;
  }
  return nullptr;
}

int WideTable::user_column(std::string_view name) const {
  for (std::size_t i = 0; i < user_columns.size(); ++i) {
    if (user_columns[i] == name) return static_cast<int>(i);
  }
  return -1;
}

std::vector<std::string> LongTable::participants() const {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const auto& o : observations) {
    if (seen.insert(o.participant_id).second) out.push_back(o.participant_id);
  }
  return out;
}

std::vector<std::string> LongTable::dimension_order() const {
  std::vector<std::string> out = dimensions;
  std::unordered_set<std::string> seen(out.begin(), out.end());
  for (const auto& o : observations) {
    if (seen.insert(o.dimension).second) out.push_back(o.dimension);
  }
  return out;
}

WideTable parse_wide(std::string_view csv_text, const SurveySchema& schema) {
  schema.validate();
  const auto doc = csv::parse(csv_text);
  const int id_col = doc.column(schema.id_column);
  if (id_col < 0) {
    throw Error(ErrorKind::invalid_input, fmt::format("input has no id column '{}'", schema.id_column));
  }

  WideTable table;
  table.id_column = schema.id_column;
  table.dimension_names = schema.dimension_names();
  table.units = Units::raw;

  const int dim_count = static_cast<int>(schema.dimensions.size());
  const int topic_count = static_cast<int>(schema.topics.size());
  std::vector<std::size_t> cell_src;
  std::vector<std::size_t> user_src;
  std::set<CellKey> seen_cells;
  for (std::size_t c = 0; c < doc.header.size(); ++c) {
    if (static_cast<int>(c) == id_col) continue;
    const auto& name = doc.header[c];
    if (const auto key = parse_cell_column(name)) {
      if (key->dimension < 1 || key->dimension > dim_count) {
        throw Error(ErrorKind::out_of_range,
                    fmt::format("column '{}': dimension {} outside [1, {}]", name, key->dimension, dim_count));
      }
      if (key->topic < 1 || (topic_count > 0 && key->topic > topic_count)) {
        throw Error(ErrorKind::out_of_range, topic_count > 0
                        ? fmt::format("column '{}': topic {} outside [1, {}]", name, key->topic, topic_count)
                        : fmt::format("column '{}': topic index must be positive", name));
      }
      if (!seen_cells.insert(*key).second) {
        throw Error(ErrorKind::duplicate, fmt::format("column '{}' appears twice", name));
      }
      table.cell_columns.push_back(*key);
      cell_src.push_back(c);
    } else {
      table.user_columns.push_back(name);
      user_src.push_back(c);
    }
  }

  std::unordered_set<std::string> ids;
  for (std::size_t r = 0; r < doc.rows.size(); ++r) {
    const auto& src = doc.rows[r];
    WideRow row;
    row.id = src[static_cast<std::size_t>(id_col)];
    if (!ids.insert(row.id).second) {
      throw Error(ErrorKind::duplicate, fmt::format("row {}: participant id '{}' is not unique", r + 1, row.id));
    }
    for (std::size_t u : user_src) row.user_values.push_back(src[u]);
    row.cells.reserve(cell_src.size());
    for (std::size_t i = 0; i < cell_src.size(); ++i) {
      const std::string& text = src[cell_src[i]];
      if (detail::trim(text).empty() || text == "NA") {
        row.cells.push_back(std::nullopt);
        continue;
      }
      const auto v = detail::parse_integer(text);
      if (!v) {
        throw Error(ErrorKind::invalid_input, fmt::format("row {} (id '{}'), column '{}': '{}' is not an integer response",
                                                          r + 1, row.id, doc.header[cell_src[i]], text));
      }
      if (*v < 1 || *v > schema.scale_points) {
        throw Error(ErrorKind::out_of_range, fmt::format("row {} (id '{}'), column '{}': response {} outside [1, {}]",
                                                         r + 1, row.id, doc.header[cell_src[i]], *v,
                                                         schema.scale_points));
      }
      row.cells.push_back(static_cast<double>(*v));
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

LongTable to_long(const WideTable& wide, const SurveySchema& schema) {
  LongTable out;
  out.dimensions = schema.dimension_names();
  out.user_columns = wide.user_columns;
  out.observations.reserve(wide.rows.size() * wide.cell_columns.size());

  const int dim_count = static_cast<int>(schema.dimensions.size());
  for (const auto& key : wide.cell_columns) {
    if (key.dimension < 1 || key.dimension > dim_count) {
      throw Error(ErrorKind::out_of_range, fmt::format("cell {} has no dimension in the schema", cell_column_name(key)));
    }
  }

  for (const auto& row : wide.rows) {
    out.user_values.emplace(row.id, row.user_values);
    for (std::size_t i = 0; i < wide.cell_columns.size(); ++i) {
      const CellKey key = wide.cell_columns[i];
      Observation obs{row.id, key.topic, schema.dimensions[static_cast<std::size_t>(key.dimension - 1)].name,
                      std::nullopt};
      if (const auto& v = row.cells[i]) {
        if (wide.units == Units::rescaled) {
          obs.value = *v;
        } else {
          const double rounded = std::round(*v);
          if (rounded != *v) {
            throw Error(ErrorKind::invalid_input,
                        fmt::format("participant '{}', {}: raw response {} is not an integer", row.id,
                                    cell_column_name(key), *v));
          }
          obs.value = rescale(static_cast<int>(rounded), schema.scale_points, schema.orientation_of(key.dimension));
        }
      }
      out.observations.push_back(std::move(obs));
    }
  }
  return out;
}

WideTable to_wide(const LongTable& table) {
  WideTable out;
  out.units = Units::rescaled;
  out.dimension_names = table.dimension_order();
  out.user_columns = table.user_columns;

  std::map<std::string, int, std::less<>> dim_index;
  for (std::size_t i = 0; i < out.dimension_names.size(); ++i) dim_index[out.dimension_names[i]] = static_cast<int>(i) + 1;

  std::map<CellKey, std::size_t> column_of;
  std::unordered_map<std::string, std::size_t> row_of;
  std::set<std::tuple<std::string, int, int>> seen;

  // Columns and rows in order of first appearance.
  for (const auto& o : table.observations) {
    const CellKey key{o.topic, dim_index.at(o.dimension)};
    if (!seen.emplace(o.participant_id, key.topic, key.dimension).second) {
      throw Error(ErrorKind::duplicate, fmt::format("participant '{}' has two observations for topic {}, dimension '{}'",
                                                    o.participant_id, o.topic, o.dimension));
    }
    if (column_of.emplace(key, out.cell_columns.size()).second) out.cell_columns.push_back(key);
    if (row_of.emplace(o.participant_id, out.rows.size()).second) {
      WideRow row;
      row.id = o.participant_id;
      if (const auto it = table.user_values.find(o.participant_id); it != table.user_values.end()) {
        row.user_values = it->second;
      } else {
        row.user_values.assign(table.user_columns.size(), std::string());
      }
      out.rows.push_back(std::move(row));
    }
  }

  // Cells absent from the long table stay missing.
  for (auto& row : out.rows) row.cells.assign(out.cell_columns.size(), std::nullopt);
  for (const auto& o : table.observations) {
    const CellKey key{o.topic, dim_index.at(o.dimension)};
    out.rows[row_of.at(o.participant_id)].cells[column_of.at(key)] = o.value;
  }
  return out;
}

std::string write_long(const LongTable& table) {
  csv::Document doc;
  doc.header = {"participant_id", "topic", "dimension", "value"};
  doc.rows.reserve(table.observations.size());
  for (const auto& o : table.observations) {
    doc.rows.push_back({o.participant_id, std::to_string(o.topic), o.dimension,
                        o.value ? detail::format_fixed(*o.value, 6) : std::string()});
  }
  return csv::write(doc);
}

LongTable parse_long(std::string_view csv_text) {
  const auto doc = csv::parse(csv_text);
  const int pid = doc.column("participant_id");
  const int topic = doc.column("topic");
  const int dim = doc.column("dimension");
  const int value = doc.column("value");
  if (pid < 0 || topic < 0 || dim < 0 || value < 0) {
    throw Error(ErrorKind::invalid_input, "long table needs columns participant_id,topic,dimension,value");
  }
  LongTable out;
  std::set<std::tuple<std::string, int, std::string>> seen;
  for (std::size_t r = 0; r < doc.rows.size(); ++r) {
    const auto& row = doc.rows[r];
    const auto t = detail::parse_integer(row[static_cast<std::size_t>(topic)]);
    if (!t || *t < 1) {
      throw Error(ErrorKind::invalid_input, fmt::format("long row {}: bad topic '{}'", r + 1, row[static_cast<std::size_t>(topic)]));
    }
    Observation o{row[static_cast<std::size_t>(pid)], static_cast<int>(*t), row[static_cast<std::size_t>(dim)], std::nullopt};
    const auto& text = row[static_cast<std::size_t>(value)];
    if (!detail::trim(text).empty() && text != "NA") {
      const auto v = detail::parse_double(text);
      if (!v) throw Error(ErrorKind::invalid_input, fmt::format("long row {}: value '{}' is not a number", r + 1, text));
      if (*v < -1.0 || *v > 1.0) {
        throw Error(ErrorKind::out_of_range, fmt::format("long row {}: value {} outside [-1, 1]", r + 1, *v));
      }
      o.value = *v;
    }
    if (!seen.emplace(o.participant_id, o.topic, o.dimension).second) {
      throw Error(ErrorKind::duplicate, fmt::format("long row {}: repeated observation for participant '{}', topic {}, '{}'",
                                                    r + 1, o.participant_id, o.topic, o.dimension));
    }
    out.observations.push_back(std::move(o));
  }
  out.dimensions = out.dimension_order();
  return out;
}

std::string write_wide(const WideTable& table) {
  csv::Document doc;
  doc.header.push_back(table.id_column);
  for (const auto& key : table.cell_columns) doc.header.push_back(cell_column_name(key));
  for (const auto& u : table.user_columns) doc.header.push_back(u);
  for (const auto& row : table.rows) {
    csv::Row out{row.id};
    for (const auto& cell : row.cells) {
      if (!cell) {
        out.emplace_back();
      } else if (table.units == Units::raw) {
        out.push_back(std::to_string(static_cast<long long>(std::llround(*cell))));
      } else {
        out.push_back(detail::format_fixed(*cell, 6));
      }
    }
    out.insert(out.end(), row.user_values.begin(), row.user_values.end());
    doc.rows.push_back(std::move(out));
  }
  return csv::write(doc);
}

}  // namespace ingest
}  // namespace scenmap
