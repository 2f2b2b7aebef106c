#pragma once

#include <string>
#include <string_view>

#include "scenmap/design.hpp"
#include "scenmap/ingest.hpp"
#include "scenmap/simulate.hpp"

namespace scenmap::config {

inline constexpr int kSchemaFormatVersion = 1;

/// Survey schema JSON:
///   { "version": 1, "scale_points": 7, "orientation": "descending", "id_column": "id",
///     "dimensions": [ "risk" | {"index": 1, "name": "risk", "orientation": "ascending"} ],
///     "topics":  [ {"index": 1, "label": "...", "description": "...", "cell_id": 0} ],
///     "factors": [ {"name": "...", "levels": ["...", "..."]} ] }
/// Only `dimensions` is required.
SurveySchema parse_schema(std::string_view json_text);

/// Ground truth JSON:
///   { "version": 1, "scale_points": 7, "orientation": "descending",
///     "dimensions": ["risk", "utility"], "trait_sd": 0.1 | [0.1, 0.2],
///     "missing_rate": 0.0,
///     "topics": [ {"index": 1, "label": "...", "mean": {"risk": -0.4, ...},
///                  "sd": {"risk": 0.3, ...} | 0.3} ] }
simulate::GroundTruth parse_truth(std::string_view json_text);

/// Inverse of `parse_schema`; always writes the object form of dimensions and topics.
std::string write_schema(const SurveySchema& schema);

}  // namespace scenmap::config
