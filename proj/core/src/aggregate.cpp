#include "scenmap/aggregate.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>

#include <fmt/format.h>

#include "numfmt.hpp"
#include "scenmap/csv.hpp"
#include "scenmap/error.hpp"

namespace scenmap::aggregate {

namespace {

int index_of(const std::vector<std::string>& names, std::string_view name) {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return static_cast<int>(i);
  }
  return -1;
}

int present_count(const stats::Column& values) {
  return static_cast<int>(std::count_if(values.begin(), values.end(), [](const auto& v) { return v.has_value(); }));
}

}  // namespace

const DimensionStats* DimensionSummary::find(std::string_view name) const {
  for (const auto& d : dimensions) {
    if (d.dimension == name) return &d;
  }
  return nullptr;
}

int ParticipantSummary::dimension(std::string_view name) const { return index_of(dimensions, name); }

stats::Column ParticipantSummary::dimension_means(std::string_view name) const {
  const int d = dimension(name);
  if (d < 0) throw Error(ErrorKind::invalid_input, fmt::format("unknown dimension '{}'", name));
  stats::Column out;
  for (const auto& row : rows) out.push_back(row.cells[static_cast<std::size_t>(d)].mean);
  return out;
}

stats::Column ParticipantSummary::user_variable(std::string_view name) const {
  const int u = index_of(user_columns, name);
  if (u < 0) throw Error(ErrorKind::invalid_input, fmt::format("unknown user variable '{}'", name));
  stats::Column out;
  for (const auto& row : rows) {
    const auto& text = row.user_values[static_cast<std::size_t>(u)];
    if (detail::trim(text).empty() || text == "NA") {
      out.push_back(std::nullopt);
      continue;
    }
    const auto v = detail::parse_double(text);
    if (!v) {
      throw Error(ErrorKind::invalid_input,
                  fmt::format("user variable '{}' is not numeric (participant '{}' has '{}')", name, row.id, text));
    }
    out.push_back(*v);
  }
  return out;
}

int TopicSummary::dimension(std::string_view name) const { return index_of(dimensions, name); }

stats::Column TopicSummary::means(std::string_view name) const {
  const int d = dimension(name);
  if (d < 0) throw Error(ErrorKind::invalid_input, fmt::format("unknown dimension '{}'", name));
  stats::Column out;
  for (const auto& row : rows) out.push_back(row.cells[static_cast<std::size_t>(d)].mean);
  return out;
}

const TopicRow* TopicSummary::find(int topic) const {
  for (const auto& row : rows) {
    if (row.topic == topic) return &row;
  }
  return nullptr;
}

void TopicSummary::attach_labels(const design::TopicCatalog& catalog) {
  for (auto& row : rows) {
    if (const auto* t = catalog.find(row.topic)) row.label = t->label;
  }
}

DimensionSummary grand_means(const ingest::LongTable& table) {
  const auto dims = table.dimension_order();
  std::vector<stats::Column> values(dims.size());
  std::unordered_map<std::string, std::size_t> slot;
  for (std::size_t i = 0; i < dims.size(); ++i) slot.emplace(dims[i], i);
  for (const auto& o : table.observations) values[slot.at(o.dimension)].push_back(o.value);

  DimensionSummary out;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    out.dimensions.push_back(
        DimensionStats{dims[i], stats::mean(values[i]), stats::sample_sd(values[i]), present_count(values[i])});
  }
  return out;
}

ParticipantSummary by_participant(const ingest::LongTable& table, const ingest::WideTable& wide) {
  ParticipantSummary out;
  out.id_column = wide.id_column;
  out.dimensions = table.dimension_order();
  out.user_columns = wide.user_columns;

  std::unordered_map<std::string, std::size_t> row_of;
  for (std::size_t r = 0; r < wide.rows.size(); ++r) row_of.emplace(wide.rows[r].id, r);
  std::unordered_map<std::string, std::size_t> dim_of;
  for (std::size_t d = 0; d < out.dimensions.size(); ++d) dim_of.emplace(out.dimensions[d], d);

  std::vector<std::vector<stats::Column>> values(wide.rows.size(), std::vector<stats::Column>(out.dimensions.size()));
  for (const auto& o : table.observations) {
    const auto it = row_of.find(o.participant_id);
    if (it == row_of.end()) {
      throw Error(ErrorKind::invalid_input,
                  fmt::format("participant '{}' appears in the long table but not in the wide table", o.participant_id));
    }
    values[it->second][dim_of.at(o.dimension)].push_back(o.value);
  }

  out.rows.reserve(wide.rows.size());
  for (std::size_t r = 0; r < wide.rows.size(); ++r) {
    ParticipantRow row{wide.rows[r].id, {}, wide.rows[r].user_values};
    for (const auto& v : values[r]) {
      row.cells.push_back(ParticipantCell{stats::mean(v), stats::median(v), stats::sample_sd(v), present_count(v)});
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

namespace {

TopicSummary summarize_topics(const ingest::LongTable& table, const std::vector<int>& topics) {
  TopicSummary out;
  out.dimensions = table.dimension_order();
  std::unordered_map<std::string, std::size_t> dim_of;
  for (std::size_t d = 0; d < out.dimensions.size(); ++d) dim_of.emplace(out.dimensions[d], d);
  std::unordered_map<int, std::size_t> row_of;
  for (std::size_t i = 0; i < topics.size(); ++i) row_of.emplace(topics[i], i);

  std::vector<std::vector<stats::Column>> values(topics.size(), std::vector<stats::Column>(out.dimensions.size()));
  for (const auto& o : table.observations) {
    const auto it = row_of.find(o.topic);
    if (it == row_of.end()) {
      throw Error(ErrorKind::out_of_range, fmt::format("topic {} is not in the catalog", o.topic));
    }
    values[it->second][dim_of.at(o.dimension)].push_back(o.value);
  }
  for (std::size_t i = 0; i < topics.size(); ++i) {
    TopicRow row{topics[i], {}, {}};
    for (const auto& v : values[i]) {
      row.cells.push_back(TopicCell{stats::mean(v), stats::sample_sd(v), present_count(v)});
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

}  // namespace

TopicSummary by_topic(const ingest::LongTable& table) {
  std::set<int> topics;
  for (const auto& o : table.observations) topics.insert(o.topic);
  return summarize_topics(table, std::vector<int>(topics.begin(), topics.end()));
}

TopicSummary by_topic(const ingest::LongTable& table, const design::TopicCatalog& catalog) {
  std::vector<int> topics;
  for (const auto& t : catalog.topics) topics.push_back(t.index);
  auto out = summarize_topics(table, topics);
  out.attach_labels(catalog);
  return out;
}

std::vector<UserCorrelation> user_factor_correlations(const ParticipantSummary& summary,
                                                      const std::vector<std::string>& variables) {
  std::vector<UserCorrelation> out;
  for (const auto& var : variables) {
    const auto column = summary.user_variable(var);
    for (const auto& dim : summary.dimensions) {
      try {
        out.push_back(UserCorrelation{dim, var, stats::pearson(summary.dimension_means(dim), column)});
      } catch (const Error& e) {
        throw Error(e.kind(), fmt::format("{} mean vs '{}': {}", dim, var, e.what()));
      }
    }
  }
  return out;
}

stats::RatingMatrix rating_matrix(const ingest::LongTable& table, std::string_view dimension) {
  const auto participants = table.participants();
  std::set<int> topic_set;
  for (const auto& o : table.observations) {
    if (o.dimension == dimension) topic_set.insert(o.topic);
  }
  if (topic_set.empty()) throw Error(ErrorKind::invalid_input, fmt::format("no observations for dimension '{}'", dimension));
  const std::vector<int> topics(topic_set.begin(), topic_set.end());

  std::unordered_map<std::string, std::size_t> rater_of;
  for (std::size_t i = 0; i < participants.size(); ++i) rater_of.emplace(participants[i], i);
  std::unordered_map<int, std::size_t> target_of;
  for (std::size_t i = 0; i < topics.size(); ++i) target_of.emplace(topics[i], i);

  stats::RatingMatrix m(participants.size(), topics.size());
  for (const auto& o : table.observations) {
    if (o.dimension != dimension) continue;
    m.at(rater_of.at(o.participant_id), target_of.at(o.topic)) = o.value;
  }
  return m;
}

std::string write_dimension_summary(const DimensionSummary& summary) {
  csv::Document doc;
  doc.header = {"dimension", "mean", "sd", "n"};
  for (const auto& d : summary.dimensions) {
    doc.rows.push_back({d.dimension, detail::format_optional(d.mean), detail::format_optional(d.sd), std::to_string(d.n)});
  }
  return csv::write(doc);
}

std::string write_participant_summary(const ParticipantSummary& summary) {
  csv::Document doc;
  doc.header.push_back(summary.id_column);
  for (const auto& d : summary.dimensions) {
    doc.header.push_back(d + "_mean");
    doc.header.push_back(d + "_median");
    doc.header.push_back(d + "_sd");
  }
  for (const auto& u : summary.user_columns) doc.header.push_back(u);
  for (const auto& row : summary.rows) {
    csv::Row out{row.id};
    for (const auto& c : row.cells) {
      out.push_back(detail::format_optional(c.mean));
      out.push_back(detail::format_optional(c.median));
      out.push_back(detail::format_optional(c.sd));
    }
    out.insert(out.end(), row.user_values.begin(), row.user_values.end());
    doc.rows.push_back(std::move(out));
  }
  return csv::write(doc);
}

std::string write_topic_summary(const TopicSummary& summary) {
  csv::Document doc;
  doc.header.push_back("topic");
  for (const auto& d : summary.dimensions) {
    doc.header.push_back(d + "_mean");
    doc.header.push_back(d + "_sd");
    doc.header.push_back(d + "_n");
  }
  for (const auto& row : summary.rows) {
    csv::Row out{std::to_string(row.topic)};
    for (const auto& c : row.cells) {
      out.push_back(detail::format_optional(c.mean));
      out.push_back(detail::format_optional(c.sd));
      out.push_back(std::to_string(c.n));
    }
    doc.rows.push_back(std::move(out));
  }
  return csv::write(doc);
}

TopicSummary parse_topic_summary(std::string_view csv_text) {
  const auto doc = csv::parse(csv_text);
  if (doc.header.empty() || doc.header[0] != "topic") {
    throw Error(ErrorKind::invalid_input, "topic summary must start with a 'topic' column");
  }
  TopicSummary out;
  struct Columns {
    int mean = -1, sd = -1, n = -1;
  };
  std::vector<Columns> columns;
  auto slot = [&](std::string_view dim) -> Columns& {
    int d = out.dimension(dim);
    if (d < 0) {
      out.dimensions.emplace_back(dim);
      columns.emplace_back();
      d = static_cast<int>(out.dimensions.size()) - 1;
    }
    return columns[static_cast<std::size_t>(d)];
  };
  for (std::size_t c = 1; c < doc.header.size(); ++c) {
    const std::string_view name = doc.header[c];
    const auto cut = name.rfind('_');
    if (cut == std::string_view::npos) continue;
    const auto suffix = name.substr(cut + 1);
    const auto dim = name.substr(0, cut);
    if (suffix == "mean") slot(dim).mean = static_cast<int>(c);
    else if (suffix == "sd") slot(dim).sd = static_cast<int>(c);
    else if (suffix == "n") slot(dim).n = static_cast<int>(c);
  }
  for (std::size_t d = 0; d < columns.size(); ++d) {
    if (columns[d].mean < 0) {
      throw Error(ErrorKind::invalid_input, fmt::format("topic summary lacks '{}_mean'", out.dimensions[d]));
    }
  }

  auto number = [&](const csv::Row& row, int col) -> Stat {
    if (col < 0) return std::nullopt;
    const auto& text = row[static_cast<std::size_t>(col)];
    if (detail::trim(text).empty() || text == "NA") return std::nullopt;
    const auto v = detail::parse_double(text);
    if (!v) throw Error(ErrorKind::invalid_input, fmt::format("topic summary: '{}' is not a number", text));
    return v;
  };
  std::set<int> seen;
  for (const auto& row : doc.rows) {
    const auto t = detail::parse_integer(row[0]);
    if (!t || *t < 1) throw Error(ErrorKind::invalid_input, fmt::format("topic summary: bad topic '{}'", row[0]));
    if (!seen.insert(static_cast<int>(*t)).second) {
      throw Error(ErrorKind::duplicate, fmt::format("topic summary: topic {} listed twice", *t));
    }
    TopicRow out_row{static_cast<int>(*t), {}, {}};
    for (const auto& c : columns) {
      const auto n = number(row, c.n);
      out_row.cells.push_back(TopicCell{number(row, c.mean), number(row, c.sd), n ? static_cast<int>(*n) : 0});
    }
    out.rows.push_back(std::move(out_row));
  }
  std::sort(out.rows.begin(), out.rows.end(), [](const auto& a, const auto& b) { return a.topic < b.topic; });
  return out;
}

}  // namespace scenmap::aggregate
