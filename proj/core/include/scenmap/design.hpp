#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace scenmap::design {

struct Factor {
  std::string name;
  std::vector<std::string> levels;
};

/// Factors spanning the scenario space. Each factor needs at least two
/// levels; factor names and level names within a factor are unique.
struct FactorModel {
  std::vector<Factor> factors;

  void validate() const;
};

struct Cell {
  int cell_id = 0;
  std::vector<int> levels;  // one level index per factor
};

struct ScenarioSpace {
  FactorModel model;
  std::vector<Cell> cells;

  std::size_t size() const { return cells.size(); }
};

struct Topic {
  int index = 0;  // 1-based
  std::string label;
  std::string description;
  std::optional<int> cell_id;
};

/// Topics with contiguous indices 1..T and unique labels.
struct TopicCatalog {
  std::vector<Topic> topics;

  void validate() const;
  std::size_t size() const { return topics.size(); }
  const Topic* find(int index) const;
};

struct Assignment {
  std::vector<std::vector<int>> subsets;  // per participant, ascending topic indices
  std::uint64_t seed = 0;
  int subset_size = 0;

  /// How often each topic index 1..T was assigned.
  std::vector<int> topic_counts(std::size_t topic_count) const;
};

inline constexpr int kDefaultSelectionAttempts = 10'000;

/// Full factorial enumeration; the last factor varies fastest.
ScenarioSpace build_space(const FactorModel& model);

/// Picks `n` cells such that each level of each factor occurs exactly
/// n / levels(factor) times. Randomized greedy construction, restarted up to
/// `max_attempts` times before reporting infeasibility.
std::vector<int> select_balanced(const ScenarioSpace& space, int n, std::uint64_t seed,
                                 int max_attempts = kDefaultSelectionAttempts);

/// Gives every participant `subset_size` distinct topics, always drawing from
/// the least-assigned topics so per-topic counts never differ by more than one.
Assignment assign_subsets(const TopicCatalog& catalog, int participants, int subset_size,
                          std::uint64_t seed);

/// Loop & Merge table: `index,label,description`.
std::string export_survey_table(const TopicCatalog& catalog);
TopicCatalog parse_survey_table(std::string_view text);

}  // namespace scenmap::design
