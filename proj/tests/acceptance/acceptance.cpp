// Acceptance suite. Prints one PASS/FAIL line per criterion and exits nonzero
// if any selected criterion fails. `acceptance 4 5` runs a subset.

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "oracles.hpp"
#include "scenmap/aggregate.hpp"
#include "scenmap/config.hpp"
#include "scenmap/design.hpp"
#include "scenmap/error.hpp"
#include "scenmap/ingest.hpp"
#include "scenmap/simulate.hpp"
#include "scenmap/stats.hpp"
#include "scenmap/vizmap.hpp"
#include "svg_probe.hpp"

namespace {

using namespace scenmap;

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void expect(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      notes.push_back("failed: " + what);
    }
  }
  void near(double got, double want, double tol, const std::string& what) {
    const bool ok = std::abs(got - want) <= tol;
    if (!ok) {
      pass = false;
      notes.push_back(fmt::format("failed: {} = {:.12g}, want {:.12g} +- {:g}", what, got, want, tol));
    }
  }
  void note(const std::string& text) { notes.push_back(text); }
};

std::string slurp(const std::string& name) {
  std::ifstream in(std::string(SCENMAP_FIXTURE_DIR) + "/" + name, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "missing fixture " + name);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

bool same(const std::optional<double>& a, const std::optional<double>& b, double tol) {
  if (a.has_value() != b.has_value()) return false;
  return !a || std::abs(*a - *b) <= tol;
}

// --- 1 --------------------------------------------------------------------

Outcome rescaling_exactness() {
  Outcome o;
  const auto d = Orientation::descending;
  o.expect(rescale(1, 7, d) == 1.0, "rescale(1) == +1.0");
  o.expect(rescale(4, 7, d) == 0.0, "rescale(4) == 0.0");
  o.expect(rescale(7, 7, d) == -1.0, "rescale(7) == -1.0");
  o.note(fmt::format("(1,4,7) -> ({}, {}, {})", rescale(1, 7, d), rescale(4, 7, d), rescale(7, 7, d)));
  return o;
}

// --- 2 --------------------------------------------------------------------

// Brute-force recomputation straight from the raw wide table.
Outcome oracle_equivalence_on(std::mt19937_64& rng, int tables) {
  Outcome o;
  constexpr double tol = 1e-12;
  int compared = 0;
  for (int trial = 0; trial < tables; ++trial) {
    const auto survey = testing::random_survey(rng);
    const auto& w = survey.wide;
    const auto& schema = survey.schema;
    const int k = schema.scale_points;

    std::map<std::string, std::vector<double>> by_dim;
    std::map<std::pair<std::string, std::string>, std::vector<double>> by_part;
    std::map<std::pair<int, std::string>, std::vector<double>> by_top;
    for (const auto& row : w.rows) {
      for (std::size_t c = 0; c < w.cell_columns.size(); ++c) {
        const auto& key = w.cell_columns[c];
        const auto& dim = schema.dimensions[static_cast<std::size_t>(key.dimension - 1)];
        by_dim[dim.name];
        by_part[{row.id, dim.name}];
        by_top[{key.topic, dim.name}];
        if (!row.cells[c]) continue;
        double v = 1.0 - 2.0 * (*row.cells[c] - 1.0) / (k - 1.0);
        if (dim.orientation.value_or(schema.orientation) == Orientation::ascending) v = -v;
        by_dim[dim.name].push_back(v);
        by_part[{row.id, dim.name}].push_back(v);
        by_top[{key.topic, dim.name}].push_back(v);
      }
    }

    const auto table = ingest::to_long(w, schema);
    const auto g = aggregate::grand_means(table);
    for (const auto& [name, values] : by_dim) {
      const auto want = testing::brute_moments(values);
      const auto* got = g.find(name);
      o.expect(got && got->n == want.n && same(got->mean, want.mean, tol) && same(got->sd, want.sd, tol),
               fmt::format("table {} grand mean of {}", trial, name));
      ++compared;
    }
    const auto ps = aggregate::by_participant(table, w);
    for (const auto& row : ps.rows) {
      for (std::size_t d = 0; d < ps.dimensions.size(); ++d) {
        const auto want = testing::brute_moments(by_part.at({row.id, ps.dimensions[d]}));
        const auto& got = row.cells[d];
        o.expect(got.n == want.n && same(got.mean, want.mean, tol) && same(got.sd, want.sd, tol) &&
                     same(got.median, want.median, tol),
                 fmt::format("table {} participant {} {}", trial, row.id, ps.dimensions[d]));
        ++compared;
      }
    }
    const auto ts = aggregate::by_topic(table);
    for (const auto& row : ts.rows) {
      for (std::size_t d = 0; d < ts.dimensions.size(); ++d) {
        const auto want = testing::brute_moments(by_top.at({row.topic, ts.dimensions[d]}));
        const auto& got = row.cells[d];
        o.expect(got.n == want.n && same(got.mean, want.mean, tol) && same(got.sd, want.sd, tol),
                 fmt::format("table {} topic {} {}", trial, row.topic, ts.dimensions[d]));
        ++compared;
      }
    }
    o.expect(ts.rows.size() == schema.topics.topics.size(), fmt::format("table {} topic row count", trial));
  }
  o.note(fmt::format("{} tables, {} statistics compared", tables, compared));
  return o;
}

Outcome oracle_equivalence() {
  std::mt19937_64 rng(0x0aC1e);
  return oracle_equivalence_on(rng, 100);
}

// --- 3 --------------------------------------------------------------------

Outcome round_trip() {
  Outcome o;
  std::mt19937_64 rng(31337);
  int failures = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto survey = testing::random_survey(rng);
    const auto& w = survey.wide;
    const auto back = ingest::to_wide(ingest::to_long(w, survey.schema));
    bool ok = back.rows.size() == w.rows.size() && back.cell_columns.size() == w.cell_columns.size() &&
              back.user_columns == w.user_columns;
    for (std::size_t r = 0; ok && r < w.rows.size(); ++r) {
      ok = back.rows[r].id == w.rows[r].id && back.rows[r].user_values == w.rows[r].user_values;
      for (std::size_t c = 0; ok && c < w.cell_columns.size(); ++c) {
        const auto key = w.cell_columns[c];
        const auto& name = w.dimension_names[static_cast<std::size_t>(key.dimension - 1)];
        const auto& bkey = back.cell_columns[c];
        ok = bkey.topic == key.topic &&
             back.dimension_names[static_cast<std::size_t>(bkey.dimension - 1)] == name &&
             back.rows[r].cells[c].has_value() == w.rows[r].cells[c].has_value();
        if (ok && w.rows[r].cells[c]) {
          ok = *back.rows[r].cells[c] == rescale(static_cast<int>(*w.rows[r].cells[c]), survey.schema.scale_points,
                                                 survey.schema.orientation_of(key.dimension));
        }
      }
    }
    if (!ok) ++failures;
  }
  o.expect(failures == 0, fmt::format("{} of 1000 round trips lost structure", failures));
  o.note("1000 cases");
  return o;
}

// --- 4 --------------------------------------------------------------------

Outcome sample_size_formula() {
  Outcome o;
  const auto plan = stats::required_sample_size(stats::Confidence{0.95}, 1.276, 0.25);
  o.expect(plan.n == 100, fmt::format("required_sample_size(0.95, 1.276, 0.25) = {} (raw {:.6f}, z {:.9f}), want 100",
                                      plan.n, plan.raw, plan.z));
  const double e = stats::achieved_margin(100, 1.276, stats::Confidence{0.95});
  o.near(e, 0.250, 0.001, "achieved_margin(100, 1.276, 0.95)");
  o.note(fmt::format("n = {}, achieved margin at 100 = {:.6f}", plan.n, e));
  return o;
}

// --- 5 --------------------------------------------------------------------

Outcome monte_carlo_margin() {
  Outcome o;
  const auto z = stats::CriticalZ{stats::critical_z(stats::Confidence{0.95})};
  const auto study = simulate::margin_study(1.276, 100, 1000, z, 20240514);
  o.near(study.mean_half_width, 0.25, 0.03, "mean 95% CI half-width");
  o.note(fmt::format("mean half-width {:.4f}, coverage {:.3f}", study.mean_half_width, study.coverage));
  return o;
}

// --- 6 --------------------------------------------------------------------

Outcome example_reproduction() {
  // The study's open dataset could not be fetched, so this runs the fallback:
  // the oracle suite again plus the committed synthetic fixture checked
  // against independently computed values.
  Outcome o;
  o.note("open dataset unavailable; synthetic fixture fallback");
  std::mt19937_64 rng(606);
  auto suite = oracle_equivalence_on(rng, 100);
  o.expect(suite.pass, "oracle suite");

  constexpr double tol = 1e-9;
  const auto schema = config::parse_schema(slurp("medical_schema.json"));
  const auto wide = ingest::parse_wide(slurp("medical_wide.csv"), schema);
  const auto table = ingest::to_long(wide, schema);
  const auto g = aggregate::grand_means(table);
  o.near(*g.find("risk")->mean, -0.387062566277837, tol, "grand mean risk");
  o.near(*g.find("utility")->mean, 0.449091229927651, tol, "grand mean utility");
  o.near(*g.find("valence")->mean, 0.491423519009726, tol, "grand mean valence");
  o.near(*g.find("risk")->sd, 0.470841583159457, tol, "sd risk");
  o.expect(g.find("risk")->n == 3772 && g.find("utility")->n == 3778 && g.find("valence")->n == 3770, "valid counts");

  const auto ts = aggregate::by_topic(table, schema.topics);
  const auto r = stats::pearson(ts.means("risk"), ts.means("utility"));
  o.near(r.r, -0.523869937668396, tol, "pearson(risk, utility) over topic means");
  o.near(r.p, 0.0177489927920101, tol, "two-tailed p");
  o.expect(r.n == 20, "20 topics");

  const auto fit = stats::ols(ts.means("valence"), {ts.means("risk"), ts.means("utility")}, {"risk", "utility"});
  o.near(fit.intercept, 0.0722193732603745, tol, "intercept");
  o.near(fit.coefficients[0], -0.084206938196988, tol, "b_risk");
  o.near(fit.coefficients[1], 0.862402533106926, tol, "b_utility");
  o.near(fit.r_squared, 0.979993164929141, tol, "R^2");
  o.near(fit.betas[0], -0.112062385069164, tol, "beta_risk");
  o.near(fit.betas[1], 0.926627125741956, tol, "beta_utility");

  const auto ps = aggregate::by_participant(table, wide);
  const auto& p1 = ps.rows.front().cells[static_cast<std::size_t>(ps.dimension("risk"))];
  o.near(*p1.mean, -0.216666666666667, tol, "participant 1 risk mean");
  o.near(*p1.median, -0.333333333333333, tol, "participant 1 risk median");
  o.near(*p1.sd, 0.614398388764944, tol, "participant 1 risk sd");
  o.note(fmt::format("fixture r = {:.4f}, R^2 = {:.4f}", r.r, fit.r_squared));
  return o;
}

// --- 7 --------------------------------------------------------------------

stats::RatingMatrix matrix(const std::vector<std::vector<double>>& rows) {
  stats::RatingMatrix m(rows.size(), rows[0].size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t t = 0; t < rows[r].size(); ++t) m.at(r, t) = rows[r][t];
  return m;
}

Outcome icc_edges() {
  Outcome o;
  using stats::IccModel;
  const auto perfect = matrix({{1, -1.0 / 3, 2.0 / 3, 0}, {1, -1.0 / 3, 2.0 / 3, 0}, {1, -1.0 / 3, 2.0 / 3, 0}});
  for (auto model : {IccModel::oneway, IccModel::twoway_consistency, IccModel::twoway_agreement}) {
    const auto r = stats::icc(perfect, model);
    o.near(r.single, 1.0, 1e-9, "perfect agreement single " + stats::to_string(model));
    o.near(r.average, 1.0, 1e-9, "perfect agreement average " + stats::to_string(model));
  }

  const auto fixture = matrix({{1, 3, 2, 6}, {2, 4, 2, 7}, {1, 5, 4, 6}});
  const auto a = stats::icc(fixture, IccModel::twoway_agreement);
  const auto c = stats::icc(fixture, IccModel::twoway_consistency);
  const auto w = stats::icc(fixture, IccModel::oneway);
  o.near(a.mean_squares.between_targets, 13.6388888888889, 1e-9, "MS targets");
  o.near(a.mean_squares.between_raters, 1.08333333333333, 1e-9, "MS raters");
  o.near(a.mean_squares.residual, 0.638888888888891, 1e-9, "MS residual");
  o.near(a.mean_squares.within_targets, 0.75, 1e-9, "MS within");
  o.near(w.single, 0.85137614678899, 1e-9, "ICC(1,1)");
  o.near(w.average, 0.945010183299389, 1e-9, "ICC(1,k)");
  o.near(a.single, 0.852459016393442, 1e-9, "ICC(2,1)");
  o.near(a.average, 0.945454545454545, 1e-9, "ICC(2,k)");
  o.near(c.single, 0.871508379888268, 1e-9, "ICC(3,1)");
  o.near(c.average, 0.95315682281059, 1e-9, "ICC(3,k)");

  bool raised = false;
  try {
    stats::icc(matrix({{0.5, 0.5, 0.5}, {0.5, 0.5, 0.5}}));
  } catch (const Error& e) {
    raised = e.kind() == ErrorKind::degenerate;
  }
  o.expect(raised, "constant matrix raises a degenerate error");
  return o;
}

// --- 8 --------------------------------------------------------------------

bool balanced(const design::ScenarioSpace& space, const std::vector<int>& ids) {
  for (std::size_t f = 0; f < space.model.factors.size(); ++f) {
    std::vector<int> counts(space.model.factors[f].levels.size(), 0);
    for (int id : ids) ++counts[static_cast<std::size_t>(space.cells[static_cast<std::size_t>(id)].levels[f])];
    if (std::set<int>(counts.begin(), counts.end()).size() != 1) return false;
  }
  return true;
}

Outcome balanced_design() {
  Outcome o;
  auto factor = [](const std::string& name, int levels) {
    design::Factor f{name, {}};
    for (int l = 0; l < levels; ++l) f.levels.push_back(std::to_string(l + 1));
    return f;
  };
  struct Case {
    design::FactorModel model;
    int n;
  };
  const std::vector<Case> cases{
      {{{factor("a", 3), factor("b", 3), factor("c", 3)}}, 9},
      {{{factor("a", 4), factor("b", 4), factor("c", 4)}}, 16},
      {{{factor("a", 2), factor("b", 3), factor("c", 2)}}, 6},
      {{{factor("a", 3), factor("b", 3), factor("c", 3), factor("d", 3)}}, 9},
  };
  int subsets = 0;
  for (const auto& c : cases) {
    const auto space = design::build_space(c.model);
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const auto ids = design::select_balanced(space, c.n, seed);
      ++subsets;
      o.expect(static_cast<int>(ids.size()) == c.n && std::set<int>(ids.begin(), ids.end()).size() == ids.size(),
               fmt::format("distinct cells, n={} seed={}", c.n, seed));
      o.expect(balanced(space, ids), fmt::format("balanced levels, n={} seed={}", c.n, seed));
    }
  }
  const auto space = design::build_space({{factor("a", 3), factor("b", 2)}});
  for (int n : {0, 4, 5, 7, 12}) {
    bool raised = false;
    try {
      design::select_balanced(space, n, 1);
    } catch (const Error& e) {
      raised = e.kind() == ErrorKind::infeasible || e.kind() == ErrorKind::out_of_range;
    }
    o.expect(raised, fmt::format("infeasible n={} raises", n));
  }
  o.note(fmt::format("{} subsets across 100 seeds", subsets));
  return o;
}

// --- 9 --------------------------------------------------------------------

Outcome svg_geometry() {
  Outcome o;
  const auto schema = config::parse_schema(slurp("medical_schema.json"));
  const auto table = ingest::to_long(ingest::parse_wide(slurp("medical_wide.csv"), schema), schema);
  const auto summary = aggregate::by_topic(table, schema.topics);

  for (const auto& [x, y] : std::vector<std::pair<std::string, std::string>>{{"risk", "utility"}, {"utility", "valence"}}) {
    vizmap::MapOptions opts;
    opts.x = x;
    opts.y = y;
    opts.title = x + " vs " + y;
    const auto svg = vizmap::scatter_map(summary, opts);
    o.expect(svg == vizmap::scatter_map(summary, opts), "byte-identical output");
    std::unique_ptr<testing::SvgProbe> probe;
    try {
      probe = std::make_unique<testing::SvgProbe>(svg);
    } catch (const std::exception& e) {
      o.expect(false, std::string("XML parse: ") + e.what());
      continue;
    }
    o.expect(probe->with_prefix("circle", "topic-").size() == summary.rows.size(), "marker count equals topic count");
    const auto fit = stats::ols(summary.means(y), {summary.means(x)}, {x});
    const auto* line = probe->by_id("regression-line");
    o.expect(line != nullptr, "regression line present");
    if (line) {
      o.near(line->number("data-slope"), fit.coefficients[0], 1e-6, x + "/" + y + " slope");
      o.near(line->number("data-intercept"), fit.intercept, 1e-6, x + "/" + y + " intercept");
    }
  }
  return o;
}

struct Criterion {
  int id;
  const char* title;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "rescaling exactness", rescaling_exactness},
      {2, "pipeline oracle equivalence", oracle_equivalence},
      {3, "wide/long round trip", round_trip},
      {4, "sample-size formula", sample_size_formula},
      {5, "Monte Carlo margin validation", monte_carlo_margin},
      {6, "example reproduction", example_reproduction},
      {7, "ICC edge behavior", icc_edges},
      {8, "balanced design", balanced_design},
      {9, "SVG geometry", svg_geometry},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::stoi(argv[i]));

  int failed = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome result;
    try {
      result = c.run();
    } catch (const std::exception& e) {
      result.pass = false;
      result.note(std::string("exception: ") + e.what());
    }
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    std::cout << fmt::format("{} criterion {}: {} ({:.0f} ms)\n", result.pass ? "PASS" : "FAIL", c.id, c.title, ms);
    for (const auto& n : result.notes) std::cout << "    " << n << "\n";
    if (!result.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
