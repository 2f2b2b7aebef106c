#include "scenmap/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include <fmt/format.h>

#include "scenmap/error.hpp"

namespace scenmap::simulate {

namespace {

// mt19937_64 and seed_seq are fully specified by the standard; the
// distributions below are written out so output does not depend on the
// standard library's distribution algorithms.
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t substream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(substream), static_cast<std::uint32_t>(substream >> 32),
                      0x5ce9u};
    engine_.seed(seq);
  }

  // (0, 1)
  double uniform() {
    double u;
    do {
      u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    } while (u == 0.0);
    return u;
  }

  double normal() {
    if (spare_) {
      const double z = *spare_;
      spare_.reset();
      return z;
    }
    const double radius = std::sqrt(-2.0 * std::log(uniform()));
    const double angle = 2.0 * std::numbers::pi * uniform();
    spare_ = radius * std::sin(angle);
    return radius * std::cos(angle);
  }

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

}  // namespace

void GroundTruth::validate() const {
  if (scale_points < 2) throw Error(ErrorKind::invalid_input, "ground truth: scale needs at least 2 points");
  if (dimensions.empty()) throw Error(ErrorKind::invalid_input, "ground truth: no dimensions");
  if (std::set<std::string>(dimensions.begin(), dimensions.end()).size() != dimensions.size()) {
    throw Error(ErrorKind::duplicate, "ground truth: dimension names repeat");
  }
  if (topics.empty()) throw Error(ErrorKind::invalid_input, "ground truth: no topics");
  const std::size_t m = dimensions.size();
  if (trait_sds.size() != m) {
    throw Error(ErrorKind::invalid_input, fmt::format("ground truth: {} trait sds for {} dimensions", trait_sds.size(), m));
  }
  for (double s : trait_sds) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw Error(ErrorKind::out_of_range, "ground truth: trait sd must be >= 0");
  }
  if (!(missing_rate >= 0.0 && missing_rate < 1.0)) {
    throw Error(ErrorKind::out_of_range, fmt::format("ground truth: missing rate {} outside [0, 1)", missing_rate));
  }
  for (std::size_t i = 0; i < topics.size(); ++i) {
    const auto& t = topics[i];
    if (t.index != static_cast<int>(i) + 1) {
      throw Error(ErrorKind::invalid_input, fmt::format("ground truth: topic at position {} has index {}", i + 1, t.index));
    }
    if (t.means.size() != m || t.sds.size() != m) {
      throw Error(ErrorKind::invalid_input, fmt::format("ground truth: topic {} needs {} means and sds", t.index, m));
    }
    for (std::size_t d = 0; d < m; ++d) {
      if (!(t.means[d] >= -1.0 && t.means[d] <= 1.0)) {
        throw Error(ErrorKind::out_of_range,
                    fmt::format("ground truth: topic {} {} mean {} outside [-1, 1]", t.index, dimensions[d], t.means[d]));
      }
      if (!(t.sds[d] >= 0.0) || !std::isfinite(t.sds[d])) {
        throw Error(ErrorKind::out_of_range, fmt::format("ground truth: topic {} {} sd must be >= 0", t.index, dimensions[d]));
      }
    }
  }
}

SurveySchema GroundTruth::schema() const {
  SurveySchema s;
  s.scale_points = scale_points;
  s.orientation = orientation;
  for (std::size_t d = 0; d < dimensions.size(); ++d) {
    s.dimensions.push_back(Dimension{static_cast<int>(d) + 1, dimensions[d], std::nullopt});
  }
  for (const auto& t : topics) {
    s.topics.topics.push_back(
        design::Topic{t.index, t.label.empty() ? fmt::format("topic {}", t.index) : t.label, {}, std::nullopt});
  }
  return s;
}

int discretize(double fraction, int scale_points, Orientation orientation) {
  const double raw = inverse_rescale(fraction, scale_points, orientation);
  return static_cast<int>(std::clamp(std::round(raw), 1.0, static_cast<double>(scale_points)));
}

ingest::WideTable synthesize(const GroundTruth& truth, int participants, std::uint64_t seed) {
  truth.validate();
  if (participants < 1) throw Error(ErrorKind::out_of_range, "need at least one participant");

  ingest::WideTable table;
  table.id_column = "id";
  table.dimension_names = truth.dimensions;
  table.units = ingest::Units::raw;
  const std::size_t m = truth.dimensions.size();
  for (const auto& t : truth.topics) {
    for (std::size_t d = 0; d < m; ++d) table.cell_columns.push_back(ingest::CellKey{t.index, static_cast<int>(d) + 1});
  }

  table.rows.reserve(static_cast<std::size_t>(participants));
  std::vector<double> shift(m);
  for (int p = 1; p <= participants; ++p) {
    Stream stream(seed, static_cast<std::uint64_t>(p));
    for (std::size_t d = 0; d < m; ++d) shift[d] = truth.trait_sds[d] * stream.normal();

    ingest::WideRow row;
    row.id = std::to_string(p);
    row.cells.reserve(table.cell_columns.size());
    for (const auto& t : truth.topics) {
      for (std::size_t d = 0; d < m; ++d) {
        const double latent = t.means[d] + shift[d] + t.sds[d] * stream.normal();
        const bool missing = stream.uniform() < truth.missing_rate;
        if (missing) {
          row.cells.push_back(std::nullopt);
        } else {
          row.cells.push_back(static_cast<double>(discretize(latent, truth.scale_points, truth.orientation)));
        }
      }
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

MarginStudy margin_study(double sigma, int sample_size, int replicates, stats::CriticalZ z,
                         std::uint64_t seed, int scale_points) {
  if (!(sigma > 0.0)) throw Error(ErrorKind::out_of_range, "sigma must be positive");
  if (sample_size < 2) throw Error(ErrorKind::out_of_range, "sample size must be at least 2");
  if (replicates < 1) throw Error(ErrorKind::out_of_range, "need at least one replicate");

  GroundTruth truth;
  truth.scale_points = scale_points;
  truth.dimensions = {"item"};
  truth.trait_sds = {0.0};
  // sigma is given in raw scale points; one raw point is 2 / (k - 1) rescaled units.
  truth.topics = {TopicTruth{1, "item", {0.0}, {sigma * 2.0 / static_cast<double>(scale_points - 1)}}};

  MarginStudy out;
  out.replicates = replicates;
  out.sample_size = sample_size;
  out.sigma = sigma;
  out.z = z.value;
  if (!(out.z > 0.0)) throw Error(ErrorKind::out_of_range, "Z must be positive");
  const double centre = (static_cast<double>(scale_points) + 1.0) / 2.0;

  double width_sum = 0.0;
  int covered = 0;
  std::mt19937_64 seeds(seed);
  for (int r = 0; r < replicates; ++r) {
    const auto table = synthesize(truth, sample_size, seeds());
    stats::Column values;
    values.reserve(table.rows.size());
    for (const auto& row : table.rows) values.push_back(row.cells.front());
    const double m = *stats::mean(values);
    const double half_width = out.z * *stats::sample_sd(values) / std::sqrt(static_cast<double>(sample_size));
    width_sum += half_width;
    if (std::abs(m - centre) <= half_width) ++covered;
  }
  out.mean_half_width = width_sum / replicates;
  out.coverage = static_cast<double>(covered) / replicates;
  return out;
}

}  // namespace scenmap::simulate
