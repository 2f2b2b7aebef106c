#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "scenmap/design.hpp"

namespace scenmap {

/// Which raw endpoint maps to +1. Descending: raw 1 -> +1, raw k -> -1.
enum class Orientation { descending, ascending };

std::string_view to_string(Orientation o) noexcept;
Orientation parse_orientation(std::string_view text);

struct Dimension {
  int index = 0;  // 1-based, the M in aN_matrix_M
  std::string name;
  std::optional<Orientation> orientation;  // overrides the schema default
};

struct SurveySchema {
  int scale_points = 7;
  Orientation orientation = Orientation::descending;
  std::vector<Dimension> dimensions;
  design::TopicCatalog topics;
  design::FactorModel factors;
  std::string id_column = "id";

  void validate() const;
  Orientation orientation_of(int dimension_index) const;
  const Dimension* find_dimension(std::string_view name) const;
  std::vector<std::string> dimension_names() const;
};

/// Maps a raw response in [1, k] onto [-1, +1]. Affine, strictly monotone,
/// with the odd-k midpoint landing exactly on zero.
double rescale(int value, int scale_points, Orientation orientation);

/// Continuous inverse of `rescale`: the raw position of a signed fraction.
double inverse_rescale(double fraction, int scale_points, Orientation orientation);

namespace ingest {

/// Address of one response cell: topic N and dimension M of `aN_matrix_M`.
struct CellKey {
  int topic = 0;
  int dimension = 0;

  friend bool operator==(const CellKey&, const CellKey&) = default;
  friend auto operator<=>(const CellKey&, const CellKey&) = default;
};

/// Parses `a{N}_matrix_{M}`; nullopt for any other column name.
std::optional<CellKey> parse_cell_column(std::string_view name);
std::string cell_column_name(CellKey key);

enum class Units { raw, rescaled };

struct WideRow {
  std::string id;
  std::vector<std::string> user_values;            // parallel to WideTable::user_columns
  std::vector<std::optional<double>> cells;        // parallel to WideTable::cell_columns
};

/// One row per participant. Cells hold raw integers straight after parsing and
/// signed fractions after a trip through the long format.
struct WideTable {
  std::string id_column = "id";
  std::vector<std::string> dimension_names;  // dimension index M -> name at M-1
  std::vector<std::string> user_columns;
  std::vector<CellKey> cell_columns;
  std::vector<WideRow> rows;
  Units units = Units::raw;

  const WideRow* find(std::string_view id) const;
  int user_column(std::string_view name) const;
};

struct Observation {
  std::string participant_id;
  int topic = 0;
  std::string dimension;
  std::optional<double> value;
};

/// One observation per (participant, topic, dimension). User variables ride
/// along when the table was produced from a WideTable; they are not part of
/// the long CSV.
struct LongTable {
  std::vector<std::string> dimensions;  // declared order
  std::vector<Observation> observations;
  std::vector<std::string> user_columns;
  std::unordered_map<std::string, std::vector<std::string>> user_values;

  /// Participant ids in order of first appearance.
  std::vector<std::string> participants() const;
  /// `dimensions` followed by any further names seen in the observations.
  std::vector<std::string> dimension_order() const;
};

WideTable parse_wide(std::string_view csv_text, const SurveySchema& schema);
LongTable to_long(const WideTable& wide, const SurveySchema& schema);
WideTable to_wide(const LongTable& table);

/// `participant_id,topic,dimension,value`; six decimals, empty when missing.
std::string write_long(const LongTable& table);
LongTable parse_long(std::string_view csv_text);

/// Id column, then response cells, then user variables.
std::string write_wide(const WideTable& table);

}  // namespace ingest
}  // namespace scenmap
