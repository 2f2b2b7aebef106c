#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scenmap/ingest.hpp"
#include "scenmap/stats.hpp"

namespace scenmap::simulate {

struct TopicTruth {
  int index = 0;
  std::string label;
  std::vector<double> means;  // per dimension, in [-1, +1]
  std::vector<double> sds;    // per dimension, rescaled units
};

/// Latent response model: topic mean + participant trait shift + noise,
/// discretized to the nearest raw scale point and clamped.
struct GroundTruth {
  int scale_points = 7;
  Orientation orientation = Orientation::descending;
  std::vector<std::string> dimensions;
  std::vector<TopicTruth> topics;
  std::vector<double> trait_sds;  // per dimension
  double missing_rate = 0.0;

  void validate() const;
  /// A schema under which synthesized tables parse and rescale correctly.
  SurveySchema schema() const;
};

/// Deterministic per seed; participant p draws from its own sub-stream, so
/// adding participants never changes the earlier rows.
ingest::WideTable synthesize(const GroundTruth& truth, int participants, std::uint64_t seed);

/// Nearest scale point for a latent signed fraction, clamped to [1, k].
int discretize(double fraction, int scale_points, Orientation orientation);

struct MarginStudy {
  int replicates = 0;
  int sample_size = 0;
  double sigma = 0.0;           // assumed population sd, raw scale units
  double z = 0.0;
  double mean_half_width = 0.0; // average of z * s / sqrt(n), raw scale units
  double coverage = 0.0;        // share of intervals containing the population mean
};

/// Draws `replicates` samples of `sample_size` respondents on one 7-point item
/// centred on the scale midpoint and reports the empirical interval width.
MarginStudy margin_study(double sigma, int sample_size, int replicates, stats::CriticalZ z,
                         std::uint64_t seed, int scale_points = 7);

}  // namespace scenmap::simulate
