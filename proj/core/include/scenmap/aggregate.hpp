#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "scenmap/design.hpp"
#include "scenmap/ingest.hpp"
#include "scenmap/stats.hpp"

namespace scenmap::aggregate {

/// Undefined (empty-set) statistics stay nullopt and serialize as empty fields.
using Stat = std::optional<double>;

struct DimensionStats {
  std::string dimension;
  Stat mean;
  Stat sd;
  int n = 0;
};

struct DimensionSummary {
  std::vector<DimensionStats> dimensions;

  const DimensionStats* find(std::string_view name) const;
};

struct ParticipantCell {
  Stat mean;
  Stat median;
  Stat sd;
  int n = 0;
};

struct ParticipantRow {
  std::string id;
  std::vector<ParticipantCell> cells;     // parallel to ParticipantSummary::dimensions
  std::vector<std::string> user_values;   // parallel to ParticipantSummary::user_columns
};

/// Perspective 1: each participant's evaluations averaged across topics.
struct ParticipantSummary {
  std::string id_column = "id";
  std::vector<std::string> dimensions;
  std::vector<std::string> user_columns;
  std::vector<ParticipantRow> rows;

  int dimension(std::string_view name) const;
  stats::Column dimension_means(std::string_view name) const;
  /// Numeric view of a user variable; empty strings are missing.
  stats::Column user_variable(std::string_view name) const;
};

struct TopicCell {
  Stat mean;
  Stat sd;
  int n = 0;
};

struct TopicRow {
  int topic = 0;
  std::string label;
  std::vector<TopicCell> cells;  // parallel to TopicSummary::dimensions
};

/// Perspective 2: each topic's evaluations averaged across participants.
struct TopicSummary {
  std::vector<std::string> dimensions;
  std::vector<TopicRow> rows;  // ascending topic index

  int dimension(std::string_view name) const;
  stats::Column means(std::string_view name) const;
  const TopicRow* find(int topic) const;
  void attach_labels(const design::TopicCatalog& catalog);
};

DimensionSummary grand_means(const ingest::LongTable& table);

ParticipantSummary by_participant(const ingest::LongTable& table, const ingest::WideTable& wide);

TopicSummary by_topic(const ingest::LongTable& table);
/// Same, but every catalog topic gets a row (undefined when unrated) and a label.
TopicSummary by_topic(const ingest::LongTable& table, const design::TopicCatalog& catalog);

struct UserCorrelation {
  std::string dimension;  // correlated via the participant's mean on it
  std::string variable;
  stats::CorrelationReport report;
};

std::vector<UserCorrelation> user_factor_correlations(const ParticipantSummary& summary,
                                                      const std::vector<std::string>& variables);

/// Participants x topics ratings of one dimension, for ICC.
stats::RatingMatrix rating_matrix(const ingest::LongTable& table, std::string_view dimension);

std::string write_dimension_summary(const DimensionSummary& summary);
std::string write_participant_summary(const ParticipantSummary& summary);
std::string write_topic_summary(const TopicSummary& summary);
TopicSummary parse_topic_summary(std::string_view csv_text);

}  // namespace scenmap::aggregate
