#include "scenmap/design.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "numfmt.hpp"
#include "scenmap/csv.hpp"
#include "scenmap/error.hpp"

namespace scenmap::design {

void FactorModel::validate() const {
  if (factors.empty()) throw Error(ErrorKind::invalid_input, "factor model has no factors");
  std::set<std::string> names;
  for (const auto& f : factors) {
    if (f.name.empty()) throw Error(ErrorKind::invalid_input, "factor with empty name");
    if (!names.insert(f.name).second) {
      throw Error(ErrorKind::duplicate, fmt::format("factor '{}' declared twice", f.name));
    }
    if (f.levels.size() < 2) {
      throw Error(ErrorKind::invalid_input, fmt::format("factor '{}' needs at least 2 levels, has {}", f.name,
                                                        f.levels.size()));
    }
    std::set<std::string> levels(f.levels.begin(), f.levels.end());
    if (levels.size() != f.levels.size()) {
      throw Error(ErrorKind::duplicate, fmt::format("factor '{}' repeats a level name", f.name));
    }
  }
}

void TopicCatalog::validate() const {
  std::set<std::string> labels;
  for (std::size_t i = 0; i < topics.size(); ++i) {
    const auto& t = topics[i];
    if (t.index != static_cast<int>(i) + 1) {
      throw Error(ErrorKind::invalid_input,
                  fmt::format("topic indices must be contiguous from 1; position {} has index {}", i + 1, t.index));
    }
    if (!labels.insert(t.label).second) {
      throw Error(ErrorKind::duplicate, fmt::format("topic label '{}' is used twice", t.label));
    }
  }
}

const Topic* TopicCatalog::find(int index) const {
  if (index < 1 || index > static_cast<int>(topics.size())) return nullptr;
  return &topics[static_cast<std::size_t>(index - 1)];
}

std::vector<int> Assignment::topic_counts(std::size_t topic_count) const {
  std::vector<int> counts(topic_count, 0);
  for (const auto& subset : subsets) {
    for (int t : subset) {
      if (t >= 1 && static_cast<std::size_t>(t) <= topic_count) ++counts[static_cast<std::size_t>(t - 1)];
    }
  }
  return counts;
}

ScenarioSpace build_space(const FactorModel& model) {
  model.validate();
  ScenarioSpace space{model, {}};

  std::size_t total = 1;
  for (const auto& f : model.factors) total *= f.levels.size();
  space.cells.reserve(total);

  std::vector<int> odometer(model.factors.size(), 0);
  for (std::size_t id = 0; id < total; ++id) {
    space.cells.push_back(Cell{static_cast<int>(id), odometer});
    for (std::size_t f = model.factors.size(); f-- > 0;) {
      if (++odometer[f] < static_cast<int>(model.factors[f].levels.size())) break;
      odometer[f] = 0;
    }
  }
  return space;
}

std::vector<int> select_balanced(const ScenarioSpace& space, int n, std::uint64_t seed, int max_attempts) {
  const auto& factors = space.model.factors;
  if (n < 1 || static_cast<std::size_t>(n) > space.size()) {
    throw Error(ErrorKind::infeasible,
                fmt::format("cannot select {} cells from a space of {}", n, space.size()));
  }
  std::vector<int> quota;
  for (const auto& f : factors) {
    const int levels = static_cast<int>(f.levels.size());
    if (n % levels != 0) {
      throw Error(ErrorKind::infeasible,
                  fmt::format("{} cells cannot be balanced over factor '{}' with {} levels", n, f.name, levels));
    }
    quota.push_back(n / levels);
  }

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(space.size());
  std::vector<std::vector<int>> counts(factors.size());
  std::vector<int> chosen;

  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t f = 0; f < factors.size(); ++f) counts[f].assign(factors[f].levels.size(), 0);
    chosen.clear();

    for (std::size_t idx : order) {
      const Cell& cell = space.cells[idx];
      bool fits = true;
      for (std::size_t f = 0; f < factors.size() && fits; ++f) {
        fits = counts[f][static_cast<std::size_t>(cell.levels[f])] < quota[f];
      }
      if (!fits) continue;
      for (std::size_t f = 0; f < factors.size(); ++f) ++counts[f][static_cast<std::size_t>(cell.levels[f])];
      chosen.push_back(cell.cell_id);
      if (static_cast<int>(chosen.size()) == n) {
        std::sort(chosen.begin(), chosen.end());
        return chosen;
      }
    }
  }
  throw Error(ErrorKind::infeasible,
              fmt::format("no balanced subset of {} cells found within {} attempts", n, max_attempts));
}

Assignment assign_subsets(const TopicCatalog& catalog, int participants, int subset_size, std::uint64_t seed) {
  catalog.validate();
  const int topic_count = static_cast<int>(catalog.size());
  if (subset_size < 1 || subset_size > topic_count) {
    throw Error(ErrorKind::out_of_range,
                fmt::format("subset size {} outside [1, {}]", subset_size, topic_count));
  }
  if (participants < 0) throw Error(ErrorKind::out_of_range, "participant count is negative");

  Assignment out;
  out.seed = seed;
  out.subset_size = subset_size;
  out.subsets.reserve(static_cast<std::size_t>(participants));

  std::mt19937_64 rng(seed);
  std::vector<int> counts(static_cast<std::size_t>(topic_count), 0);
  std::vector<int> order(static_cast<std::size_t>(topic_count));

  for (int p = 0; p < participants; ++p) {
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    // Stable sort keeps the random order among equally used topics.
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return counts[static_cast<std::size_t>(a)] < counts[static_cast<std::size_t>(b)];
    });
    std::vector<int> subset(order.begin(), order.begin() + subset_size);
    for (int t : subset) ++counts[static_cast<std::size_t>(t)];
    for (int& t : subset) t += 1;
    std::sort(subset.begin(), subset.end());
    out.subsets.push_back(std::move(subset));
  }
  return out;
}

std::string export_survey_table(const TopicCatalog& catalog) {
  catalog.validate();
  csv::Document doc;
  doc.header = {"index", "label", "description"};
  for (const auto& t : catalog.topics) doc.rows.push_back({std::to_string(t.index), t.label, t.description});
  return csv::write(doc);
}

TopicCatalog parse_survey_table(std::string_view text) {
  const auto doc = csv::parse(text);
  const int index = doc.column("index");
  const int label = doc.column("label");
  const int description = doc.column("description");
  if (index < 0 || label < 0 || description < 0) {
    throw Error(ErrorKind::invalid_input, "survey table needs columns index,label,description");
  }
  TopicCatalog catalog;
  for (const auto& row : doc.rows) {
    const auto i = detail::parse_integer(row[static_cast<std::size_t>(index)]);
    if (!i) throw Error(ErrorKind::invalid_input, fmt::format("topic index '{}' is not an integer", row[0]));
    catalog.topics.push_back(Topic{static_cast<int>(*i), row[static_cast<std::size_t>(label)],
                                   row[static_cast<std::size_t>(description)], std::nullopt});
  }
  catalog.validate();
  return catalog;
}

}  // namespace scenmap::design
