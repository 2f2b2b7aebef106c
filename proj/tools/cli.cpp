#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "scenmap/aggregate.hpp"
#include "scenmap/config.hpp"
#include "scenmap/csv.hpp"
#include "scenmap/design.hpp"
#include "scenmap/error.hpp"
#include "scenmap/ingest.hpp"
#include "scenmap/simulate.hpp"
#include "scenmap/stats.hpp"
#include "scenmap/vizmap.hpp"

#ifndef SCENMAP_VERSION
#define SCENMAP_VERSION "0.3.0"
#endif

namespace scenmap::cli {

namespace {

namespace fs = std::filesystem;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, fmt::format("cannot read '{}'", path));
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Temp file in the target directory, then rename, so readers never see a partial file.
void write_atomic(const std::string& path, const std::string& content) {
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, fmt::format("cannot write '{}'", tmp.string()));
    out << content;
    out.flush();
    if (!out) throw Error(ErrorKind::io, fmt::format("short write to '{}'", tmp.string()));
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorKind::io, fmt::format("cannot move output into '{}'", path));
  }
}

void emit(const std::string& out_path, const std::string& content, std::ostream& out) {
  if (out_path.empty() || out_path == "-") {
    out << content;
  } else {
    write_atomic(out_path, content);
  }
}

struct Options {
  std::string schema, input, long_input, out, truth, table, svg, schema_out;
  std::uint64_t seed = 0;
  int n = 0;
  int participants = 0;
  int subset_size = 0;
  int max_attempts = design::kDefaultSelectionAttempts;
  std::string by = "topic";
  // stats
  std::string y;
  std::vector<std::string> xs;
  std::string dimension;
  std::string model = "twoway_agreement";
  std::vector<std::string> vars;
  // plan
  std::optional<double> confidence, z, sigma, margin;
  std::optional<int> sample_n;
  int simulate_replicates = 0;
  // map / profile
  std::string x_dim, y_dim, title;
  std::vector<double> x_range, y_range;
  std::vector<std::string> quadrant_labels, dims;
  bool no_regression = false, no_diagonal = false, error_bars = false;
  int width = 640, height = 640;
};

SurveySchema load_schema(const std::string& path) { return config::parse_schema(read_file(path)); }

ingest::LongTable load_long(const Options& o, const SurveySchema* schema) {
  if (!o.long_input.empty()) return ingest::parse_long(read_file(o.long_input));
  if (!schema) throw Error(ErrorKind::invalid_input, "--schema is required with --input");
  return ingest::to_long(ingest::parse_wide(read_file(o.input), *schema), *schema);
}

int cmd_design(const Options& o, std::ostream& out) {
  const auto schema = load_schema(o.schema);
  const auto space = design::build_space(schema.factors);
  std::vector<int> cells;
  if (o.n > 0) {
    cells = design::select_balanced(space, o.n, o.seed, o.max_attempts);
  } else {
    for (const auto& c : space.cells) cells.push_back(c.cell_id);
  }
  csv::Document doc;
  doc.header.push_back("cell_id");
  for (const auto& f : space.model.factors) doc.header.push_back(f.name);
  for (int id : cells) {
    const auto& cell = space.cells[static_cast<std::size_t>(id)];
    csv::Row row{std::to_string(id)};
    for (std::size_t f = 0; f < cell.levels.size(); ++f) {
      row.push_back(space.model.factors[f].levels[static_cast<std::size_t>(cell.levels[f])]);
    }
    doc.rows.push_back(std::move(row));
  }
  emit(o.out, csv::write(doc), out);
  return kExitOk;
}

int cmd_assign(const Options& o, std::ostream& out) {
  const auto schema = load_schema(o.schema);
  const auto assignment = design::assign_subsets(schema.topics, o.participants, o.subset_size, o.seed);
  csv::Document doc;
  doc.header = {"participant", "topic"};
  for (std::size_t p = 0; p < assignment.subsets.size(); ++p) {
    for (int t : assignment.subsets[p]) doc.rows.push_back({std::to_string(p + 1), std::to_string(t)});
  }
  emit(o.out, csv::write(doc), out);
  return kExitOk;
}

int cmd_export_table(const Options& o, std::ostream& out) {
  emit(o.out, design::export_survey_table(load_schema(o.schema).topics), out);
  return kExitOk;
}

int cmd_ingest(const Options& o, std::ostream& out) {
  const auto schema = load_schema(o.schema);
  const auto wide = ingest::parse_wide(read_file(o.input), schema);
  emit(o.out, ingest::write_long(ingest::to_long(wide, schema)), out);
  return kExitOk;
}

int cmd_aggregate(const Options& o, std::ostream& out) {
  std::optional<SurveySchema> schema;
  if (!o.schema.empty()) schema = load_schema(o.schema);
  if (o.by == "participant") {
    if (!schema || o.input.empty()) {
      throw Error(ErrorKind::invalid_input, "--by participant needs --schema and the wide --input");
    }
    const auto wide = ingest::parse_wide(read_file(o.input), *schema);
    const auto table = ingest::to_long(wide, *schema);
    emit(o.out, aggregate::write_participant_summary(aggregate::by_participant(table, wide)), out);
    return kExitOk;
  }
  const auto table = load_long(o, schema ? &*schema : nullptr);
  if (o.by == "dimension") {
    emit(o.out, aggregate::write_dimension_summary(aggregate::grand_means(table)), out);
  } else {
    const auto summary = (schema && !schema->topics.topics.empty()) ? aggregate::by_topic(table, schema->topics)
                                                                   : aggregate::by_topic(table);
    emit(o.out, aggregate::write_topic_summary(summary), out);
  }
  return kExitOk;
}

stats::Column table_column(const csv::Document& doc, const std::string& name) {
  const int c = doc.column(name);
  if (c < 0) throw Error(ErrorKind::invalid_input, fmt::format("table has no column '{}'", name));
  stats::Column out;
  for (const auto& row : doc.rows) {
    const std::string& text = row[static_cast<std::size_t>(c)];
    if (text.empty() || text == "NA") {
      out.push_back(std::nullopt);
      continue;
    }
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != text.size()) {
      throw Error(ErrorKind::invalid_input, fmt::format("column '{}' holds non-numeric value '{}'", name, text));
    }
    out.push_back(v);
  }
  return out;
}

int cmd_regress(const Options& o, std::ostream& out) {
  const auto doc = csv::parse(read_file(o.table));
  std::vector<stats::Column> predictors;
  for (const auto& x : o.xs) predictors.push_back(table_column(doc, x));
  emit(o.out, stats::to_json(stats::ols(table_column(doc, o.y), predictors, o.xs)) + "\n", out);
  return kExitOk;
}

int cmd_correlate(const Options& o, std::ostream& out) {
  if (!o.vars.empty()) {
    // Perspective 1: participant dimension means against user variables.
    const auto schema = load_schema(o.schema);
    const auto wide = ingest::parse_wide(read_file(o.input), schema);
    const auto summary = aggregate::by_participant(ingest::to_long(wide, schema), wide);
    nlohmann::ordered_json doc = nlohmann::ordered_json::array();
    for (const auto& c : aggregate::user_factor_correlations(summary, o.vars)) {
      auto entry = nlohmann::ordered_json::parse(stats::to_json(c.report));
      entry["dimension"] = c.dimension;
      entry["variable"] = c.variable;
      doc.push_back(std::move(entry));
    }
    emit(o.out, doc.dump(2) + "\n", out);
    return kExitOk;
  }
  if (o.xs.size() != 1 || o.y.empty()) throw Error(ErrorKind::invalid_input, "correlate needs one --x and one --y column");
  const auto doc = csv::parse(read_file(o.table));
  emit(o.out, stats::to_json(stats::pearson(table_column(doc, o.xs.front()), table_column(doc, o.y))) + "\n", out);
  return kExitOk;
}

int cmd_icc(const Options& o, std::ostream& out) {
  std::optional<SurveySchema> schema;
  if (!o.schema.empty()) schema = load_schema(o.schema);
  const auto table = load_long(o, schema ? &*schema : nullptr);
  const auto report = stats::icc(aggregate::rating_matrix(table, o.dimension), stats::parse_icc_model(o.model));
  emit(o.out, stats::to_json(report) + "\n", out);
  return kExitOk;
}

int cmd_plan(const Options& o, std::ostream& out) {
  if (o.confidence.has_value() == o.z.has_value()) {
    throw Error(ErrorKind::invalid_input, "give exactly one of --confidence and --z");
  }
  if (!o.sigma) throw Error(ErrorKind::invalid_input, "--sigma is required");
  const stats::CriticalZ z{o.z ? *o.z : stats::critical_z(stats::Confidence{*o.confidence})};

  nlohmann::ordered_json doc;
  std::string headline;
  if (o.margin) {
    auto plan = stats::required_sample_size(z, *o.sigma, *o.margin);
    plan.confidence = o.confidence;
    doc = nlohmann::ordered_json::parse(stats::to_json(plan));
    headline = fmt::format("n = {}", plan.n);
  } else if (o.sample_n) {
    const double e = stats::achieved_margin(*o.sample_n, *o.sigma, z);
    if (o.confidence) doc["confidence"] = *o.confidence;
    doc["z"] = std::stod(fmt::format("{:.12g}", z.value));
    doc["sigma"] = *o.sigma;
    doc["n"] = *o.sample_n;
    doc["margin"] = std::stod(fmt::format("{:.12g}", e));
    headline = fmt::format("margin = {:.6g}", e);
  } else {
    throw Error(ErrorKind::invalid_input, "give --margin (sample size) or --n (achieved margin)");
  }

  if (o.simulate_replicates > 0) {
    const int n = doc["n"].get<int>();
    const auto study = simulate::margin_study(*o.sigma, n, o.simulate_replicates, z, o.seed);
    doc["simulation"] = {
        {"replicates", study.replicates},
        {"seed", o.seed},
        {"mean_half_width", std::stod(fmt::format("{:.12g}", study.mean_half_width))},
        {"coverage", std::stod(fmt::format("{:.12g}", study.coverage))},
    };
  }
  out << headline << "\n";
  emit(o.out, doc.dump(2) + "\n", out);
  return kExitOk;
}

int cmd_simulate(const Options& o, std::ostream& out) {
  const auto truth = config::parse_truth(read_file(o.truth));
  const auto wide = simulate::synthesize(truth, o.participants, o.seed);
  if (!o.schema_out.empty()) write_atomic(o.schema_out, config::write_schema(truth.schema()));
  emit(o.out, ingest::write_wide(wide), out);
  return kExitOk;
}

aggregate::TopicSummary load_topic_summary(const Options& o) {
  auto summary = aggregate::parse_topic_summary(read_file(o.table));
  if (!o.schema.empty()) summary.attach_labels(load_schema(o.schema).topics);
  return summary;
}

vizmap::Range to_range(const std::vector<double>& v, const char* flag) {
  if (v.empty()) return {};
  if (v.size() != 2) throw Error(ErrorKind::invalid_input, fmt::format("{} takes min,max", flag));
  return vizmap::Range{v[0], v[1]};
}

int cmd_map(const Options& o, std::ostream& out) {
  vizmap::MapOptions opts;
  opts.x = o.x_dim;
  opts.y = o.y_dim;
  opts.x_range = to_range(o.x_range, "--x-range");
  opts.y_range = to_range(o.y_range, "--y-range");
  opts.show_regression = !o.no_regression;
  opts.show_diagonal = !o.no_diagonal;
  opts.error_bars = o.error_bars;
  opts.width = o.width;
  opts.height = o.height;
  opts.title = o.title;
  if (!o.quadrant_labels.empty()) {
    if (o.quadrant_labels.size() != 4) {
      throw Error(ErrorKind::invalid_input, "--quadrant-labels takes four texts: top-left,top-right,bottom-left,bottom-right");
    }
    std::copy(o.quadrant_labels.begin(), o.quadrant_labels.end(), opts.quadrant_labels.begin());
  }
  emit(o.svg, vizmap::scatter_map(load_topic_summary(o), opts), out);
  return kExitOk;
}

int cmd_profile(const Options& o, std::ostream& out) {
  vizmap::ProfileOptions opts;
  opts.title = o.title;
  opts.width = o.width;
  emit(o.svg, vizmap::profile_chart(load_topic_summary(o), o.dims, opts), out);
  return kExitOk;
}

void error_line(std::ostream& err, std::string_view kind, std::string_view message) {
  nlohmann::ordered_json j;
  j["error"] = kind;
  j["message"] = message;
  err << j.dump() << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Micro-scenario survey toolkit: design, ingest, aggregate, analyse and map topic evaluations."};
  app.set_version_flag("--version", fmt::format("scenmap {} (schema format {})", SCENMAP_VERSION, config::kSchemaFormatVersion));
  app.require_subcommand(1);
  Options o;

  auto* design = app.add_subcommand("design", "Enumerate the factorial scenario space or a balanced subset of it");
  design->add_option("--schema", o.schema, "Schema JSON with factors[]")->required()->check(CLI::ExistingFile);
  design->add_option("--n", o.n, "Number of balanced cells to select (omit for the full space)");
  design->add_option("--seed", o.seed, "Random seed")->required();
  design->add_option("--max-attempts", o.max_attempts, "Restarts before declaring infeasibility");
  design->add_option("--out", o.out, "Output CSV (default stdout)");

  auto* assign = app.add_subcommand("assign", "Assign balanced random topic subsets to participants");
  assign->add_option("--schema", o.schema, "Schema JSON with topics[]")->required()->check(CLI::ExistingFile);
  assign->add_option("--participants", o.participants, "Participant count")->required();
  assign->add_option("--subset-size", o.subset_size, "Topics per participant")->required();
  assign->add_option("--seed", o.seed, "Random seed")->required();
  assign->add_option("--out", o.out, "Output CSV (participant,topic)");

  auto* export_table = app.add_subcommand("export-table", "Write the Loop & Merge topic table");
  export_table->add_option("--schema", o.schema, "Schema JSON with topics[]")->required()->check(CLI::ExistingFile);
  export_table->add_option("--out", o.out, "Output CSV (index,label,description)");

  auto* ingest_cmd = app.add_subcommand("ingest", "Convert a wide survey export to rescaled long format");
  ingest_cmd->add_option("--schema", o.schema, "Schema JSON")->required()->check(CLI::ExistingFile);
  ingest_cmd->add_option("--input", o.input, "Wide CSV with aN_matrix_M columns")->required()->check(CLI::ExistingFile);
  ingest_cmd->add_option("--out", o.out, "Long CSV output");

  auto* aggregate_cmd = app.add_subcommand("aggregate", "Grand means, per-participant or per-topic summaries");
  aggregate_cmd->add_option("--schema", o.schema, "Schema JSON")->check(CLI::ExistingFile);
  auto* agg_input = aggregate_cmd->add_option("--input", o.input, "Wide CSV")->check(CLI::ExistingFile);
  auto* agg_long = aggregate_cmd->add_option("--long", o.long_input, "Long CSV from `ingest`")->check(CLI::ExistingFile);
  agg_input->excludes(agg_long);
  aggregate_cmd->add_option("--by", o.by, "topic | participant | dimension")
      ->check(CLI::IsMember({"topic", "participant", "dimension"}));
  aggregate_cmd->add_option("--out", o.out, "Output CSV");

  auto* stats_cmd = app.add_subcommand("stats", "Regression, correlation and ICC");
  stats_cmd->require_subcommand(1);
  auto* regress = stats_cmd->add_subcommand("regress", "OLS with standardized betas");
  regress->add_option("--table", o.table, "Any CSV, e.g. a topic summary")->required()->check(CLI::ExistingFile);
  regress->add_option("--y", o.y, "Outcome column")->required();
  regress->add_option("--x", o.xs, "Predictor column (repeatable)")->required();
  regress->add_option("--out", o.out, "Report JSON");
  auto* correlate = stats_cmd->add_subcommand("correlate", "Pearson correlation");
  correlate->add_option("--table", o.table, "Any CSV")->check(CLI::ExistingFile);
  correlate->add_option("--x", o.xs, "First column");
  correlate->add_option("--y", o.y, "Second column");
  correlate->add_option("--schema", o.schema, "Schema JSON (with --var)")->check(CLI::ExistingFile);
  correlate->add_option("--input", o.input, "Wide CSV (with --var)")->check(CLI::ExistingFile);
  correlate->add_option("--var", o.vars, "User variable to correlate with participant means (repeatable)");
  correlate->add_option("--out", o.out, "Report JSON");
  auto* icc_cmd = stats_cmd->add_subcommand("icc", "Intraclass correlation of one dimension");
  icc_cmd->add_option("--schema", o.schema, "Schema JSON")->check(CLI::ExistingFile);
  auto* icc_input = icc_cmd->add_option("--input", o.input, "Wide CSV")->check(CLI::ExistingFile);
  auto* icc_long = icc_cmd->add_option("--long", o.long_input, "Long CSV")->check(CLI::ExistingFile);
  icc_input->excludes(icc_long);
  icc_cmd->add_option("--dimension", o.dimension, "Dimension name")->required();
  icc_cmd->add_option("--model", o.model, "oneway | twoway_consistency | twoway_agreement");
  icc_cmd->add_option("--out", o.out, "Report JSON");

  auto* plan = app.add_subcommand("plan", "Sample size for a target margin of error, or the margin reached by n");
  plan->add_option("--confidence", o.confidence, "Confidence level, e.g. 0.95");
  plan->add_option("--z", o.z, "Explicit critical value, e.g. 1.96");
  plan->add_option("--sigma", o.sigma, "Assumed population sd (scale units)")->required();
  plan->add_option("--margin", o.margin, "Target margin of error");
  plan->add_option("--n", o.sample_n, "Sample size (reports the achieved margin)");
  plan->add_option("--simulate", o.simulate_replicates, "Monte Carlo replicates validating the plan");
  plan->add_option("--seed", o.seed, "Seed for --simulate");
  plan->add_option("--out", o.out, "Plan JSON");

  auto* simulate_cmd = app.add_subcommand("simulate", "Synthesize a wide survey export from a ground truth");
  simulate_cmd->add_option("--truth", o.truth, "Ground-truth JSON")->required()->check(CLI::ExistingFile);
  simulate_cmd->add_option("--participants", o.participants, "Participant count")->required();
  simulate_cmd->add_option("--seed", o.seed, "Random seed")->required();
  simulate_cmd->add_option("--out", o.out, "Wide CSV output");
  simulate_cmd->add_option("--schema-out", o.schema_out, "Also write the matching schema JSON");

  auto* map = app.add_subcommand("map", "Two-dimensional topic map (SVG)");
  map->add_option("--by-topic", o.table, "Topic summary CSV")->required()->check(CLI::ExistingFile);
  map->add_option("--schema", o.schema, "Schema JSON for topic labels")->check(CLI::ExistingFile);
  map->add_option("--x", o.x_dim, "x-axis dimension")->required();
  map->add_option("--y", o.y_dim, "y-axis dimension")->required();
  map->add_option("--svg", o.svg, "Output SVG (default stdout)");
  map->add_option("--x-range", o.x_range, "min,max")->delimiter(',');
  map->add_option("--y-range", o.y_range, "min,max")->delimiter(',');
  map->add_option("--quadrant-labels", o.quadrant_labels, "top-left,top-right,bottom-left,bottom-right")->delimiter(',');
  map->add_flag("--no-regression", o.no_regression, "Omit the regression line");
  map->add_flag("--no-diagonal", o.no_diagonal, "Omit the identity diagonal");
  map->add_flag("--error-bars", o.error_bars, "Draw +-1 sd bars");
  map->add_option("--title", o.title, "Chart title");
  map->add_option("--width", o.width, "Canvas width");
  map->add_option("--height", o.height, "Canvas height");

  auto* profile = app.add_subcommand("profile", "Per-topic mean/sd profile chart (SVG)");
  profile->add_option("--by-topic", o.table, "Topic summary CSV")->required()->check(CLI::ExistingFile);
  profile->add_option("--schema", o.schema, "Schema JSON for topic labels")->check(CLI::ExistingFile);
  profile->add_option("--dims", o.dims, "Dimensions, first one orders the rows")->required()->delimiter(',');
  profile->add_option("--svg", o.svg, "Output SVG (default stdout)");
  profile->add_option("--title", o.title, "Chart title");
  profile->add_option("--width", o.width, "Canvas width");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (design->parsed()) return cmd_design(o, out);
    if (assign->parsed()) return cmd_assign(o, out);
    if (export_table->parsed()) return cmd_export_table(o, out);
    if (ingest_cmd->parsed()) return cmd_ingest(o, out);
    if (aggregate_cmd->parsed()) {
      if (o.input.empty() && o.long_input.empty()) {
        err << "aggregate: one of --input or --long is required\n";
        return kExitUsage;
      }
      return cmd_aggregate(o, out);
    }
    if (regress->parsed()) return cmd_regress(o, out);
    if (correlate->parsed()) {
      if (o.vars.empty() && o.table.empty()) {
        err << "correlate: give --table with --x/--y, or --schema/--input with --var\n";
        return kExitUsage;
      }
      if (!o.vars.empty() && (o.schema.empty() || o.input.empty())) {
        err << "correlate: --var needs --schema and --input\n";
        return kExitUsage;
      }
      return cmd_correlate(o, out);
    }
    if (icc_cmd->parsed()) {
      if (o.input.empty() && o.long_input.empty()) {
        err << "icc: one of --input or --long is required\n";
        return kExitUsage;
      }
      return cmd_icc(o, out);
    }
    if (plan->parsed()) return cmd_plan(o, out);
    if (simulate_cmd->parsed()) return cmd_simulate(o, out);
    if (map->parsed()) return cmd_map(o, out);
    if (profile->parsed()) return cmd_profile(o, out);
  } catch (const Error& e) {
    error_line(err, to_string(e.kind()), e.what());
    return kExitDataError;
  } catch (const std::exception& e) {
    error_line(err, "internal", e.what());
    return kExitDataError;
  }
  return kExitUsage;
}

}  // namespace scenmap::cli
