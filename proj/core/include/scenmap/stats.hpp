#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace scenmap::stats {

/// A numeric variable with explicit missing entries.
using Column = std::vector<std::optional<double>>;

Column to_column(std::span<const double> values);

struct CorrelationReport {
  double r = 0.0;
  int n = 0;
  int df = 0;
  double t = 0.0;
  double p = 1.0;  // two-tailed
};

/// Pearson product-moment correlation over pairwise-complete entries, with a
/// Student-t significance test on n - 2 degrees of freedom.
CorrelationReport pearson(const Column& x, const Column& y);
CorrelationReport pearson(std::span<const double> x, std::span<const double> y);

struct RegressionReport {
  double intercept = 0.0;
  std::vector<std::string> predictors;
  std::vector<double> coefficients;  // raw slopes, one per predictor
  std::vector<double> betas;         // standardized: b_j * sd(x_j) / sd(y)
  double r_squared = 0.0;
  double residual_sd = 0.0;          // sqrt(SSres / (n - p - 1))
  int n = 0;
  std::vector<double> fitted;        // over the listwise-complete rows
  std::vector<double> residuals;
};

/// Least squares with an intercept, solved by Householder QR. Rows with any
/// missing entry are dropped first. Unnamed predictors are called x1, x2, ...
RegressionReport ols(const Column& y, const std::vector<Column>& predictors,
                     std::vector<std::string> names = {});

enum class IccModel { oneway, twoway_consistency, twoway_agreement };

std::string to_string(IccModel model);
IccModel parse_icc_model(std::string_view text);

/// Raters (participants) by targets (topics); row-major.
struct RatingMatrix {
  std::size_t raters = 0;
  std::size_t targets = 0;
  std::vector<std::optional<double>> cells;

  RatingMatrix() = default;
  RatingMatrix(std::size_t rater_count, std::size_t target_count)
      : raters(rater_count), targets(target_count), cells(rater_count * target_count) {}

  std::optional<double>& at(std::size_t rater, std::size_t target) {
    return cells[rater * targets + target];
  }
  const std::optional<double>& at(std::size_t rater, std::size_t target) const {
    return cells[rater * targets + target];
  }
};

struct MeanSquares {
  double between_targets = 0.0;
  double between_raters = 0.0;
  double residual = 0.0;
  double within_targets = 0.0;  // pooled rater + residual, used by the one-way model
};

struct IccReport {
  IccModel model = IccModel::twoway_agreement;
  double single = 0.0;   // one rater
  double average = 0.0;  // mean of all raters
  MeanSquares mean_squares;
  int raters = 0;   // after listwise deletion
  int targets = 0;
};

/// Shrout-Fleiss intraclass correlation. Raters with any missing rating are
/// dropped before the two-way ANOVA decomposition.
IccReport icc(const RatingMatrix& ratings, IccModel model = IccModel::twoway_agreement);

struct Confidence {
  double level = 0.95;
};

struct CriticalZ {
  double value = 1.96;
};

/// Two-sided standard-normal critical value, e.g. 1.959964 for 0.95.
double critical_z(Confidence confidence);

struct SampleSizePlan {
  double z = 0.0;
  double sigma = 0.0;
  double margin = 0.0;
  double raw = 0.0;  // (z * sigma / margin)^2 before rounding up
  int n = 0;
  std::optional<double> confidence;
};

SampleSizePlan required_sample_size(CriticalZ z, double sigma, double margin);
SampleSizePlan required_sample_size(Confidence confidence, double sigma, double margin);

/// Confidence-interval half-width reached with n respondents.
double achieved_margin(int n, double sigma, CriticalZ z);
double achieved_margin(int n, double sigma, Confidence confidence);

double student_t_two_tailed_p(double t, double df);

// Descriptives over the present entries. Sample sd uses n - 1.
std::optional<double> mean(const Column& values);
std::optional<double> sample_sd(const Column& values);
std::optional<double> median(const Column& values);

/// JSON with stable field names, numbers rounded to 12 significant digits.
std::string to_json(const CorrelationReport& report);
std::string to_json(const RegressionReport& report);
std::string to_json(const IccReport& report);
std::string to_json(const SampleSizePlan& plan);

}  // namespace scenmap::stats
