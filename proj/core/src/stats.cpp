#include "scenmap/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>

#include "json.hpp"
#include "numfmt.hpp"
#include "scenmap/error.hpp"

namespace scenmap::stats {

namespace {

struct PairedSample {
  std::vector<double> x;
  std::vector<double> y;
};

PairedSample complete_pairs(const Column& x, const Column& y) {
  if (x.size() != y.size()) {
    throw Error(ErrorKind::invalid_input, fmt::format("vectors differ in length ({} vs {})", x.size(), y.size()));
  }
  PairedSample out;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] && y[i]) {
      out.x.push_back(*x[i]);
      out.y.push_back(*y[i]);
    }
  }
  return out;
}

double mean_of(std::span<const double> v) {
  double sum = 0.0;
  for (double d : v) sum += d;
  return sum / static_cast<double>(v.size());
}

// Sum of squared deviations, two-pass.
double centered_ss(std::span<const double> v, double m) {
  double ss = 0.0;
  for (double d : v) ss += (d - m) * (d - m);
  return ss;
}

}  // namespace

Column to_column(std::span<const double> values) { return Column(values.begin(), values.end()); }

std::optional<double> mean(const Column& values) {
  double sum = 0.0;
  int n = 0;
  for (const auto& v : values) {
    if (v) {
      sum += *v;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

std::optional<double> sample_sd(const Column& values) {
  std::vector<double> present;
  for (const auto& v : values) {
    if (v) present.push_back(*v);
  }
  if (present.size() < 2) return std::nullopt;
  const double m = mean_of(present);
  return std::sqrt(centered_ss(present, m) / static_cast<double>(present.size() - 1));
}

std::optional<double> median(const Column& values) {
  std::vector<double> present;
  for (const auto& v : values) {
    if (v) present.push_back(*v);
  }
  if (present.empty()) return std::nullopt;
  std::sort(present.begin(), present.end());
  const std::size_t mid = present.size() / 2;
  if (present.size() % 2 == 1) return present[mid];
  return present[mid - 1] + (present[mid] - present[mid - 1]) / 2.0;
}

double student_t_two_tailed_p(double t, double df) {
  if (std::isinf(t)) return 0.0;
  if (std::isnan(t) || !(df > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  const boost::math::students_t dist(df);
  return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
}

CorrelationReport pearson(const Column& x, const Column& y) {
  const auto pairs = complete_pairs(x, y);
  const std::size_t n = pairs.x.size();
  if (n < 3) {
    throw Error(ErrorKind::invalid_input, fmt::format("correlation needs at least 3 complete pairs, has {}", n));
  }
  const double mx = mean_of(pairs.x);
  const double my = mean_of(pairs.y);
  const double sxx = centered_ss(pairs.x, mx);
  const double syy = centered_ss(pairs.y, my);
  if (sxx == 0.0 || syy == 0.0) {
    throw Error(ErrorKind::degenerate, sxx == 0.0 ? "first variable has zero variance" : "second variable has zero variance");
  }
  double sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) sxy += (pairs.x[i] - mx) * (pairs.y[i] - my);

  CorrelationReport out;
  out.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  out.n = static_cast<int>(n);
  out.df = out.n - 2;
  const double denom = 1.0 - out.r * out.r;
  out.t = denom > 0.0 ? out.r * std::sqrt(static_cast<double>(out.df)) / std::sqrt(denom)
                      : std::copysign(std::numeric_limits<double>::infinity(), out.r);
  out.p = student_t_two_tailed_p(out.t, out.df);
  return out;
}

CorrelationReport pearson(std::span<const double> x, std::span<const double> y) {
  return pearson(to_column(x), to_column(y));
}

RegressionReport ols(const Column& y, const std::vector<Column>& predictors, std::vector<std::string> names) {
  const std::size_t p = predictors.size();
  if (p == 0) throw Error(ErrorKind::invalid_input, "regression needs at least one predictor");
  if (names.empty()) {
    for (std::size_t j = 0; j < p; ++j) names.push_back(fmt::format("x{}", j + 1));
  }
  if (names.size() != p) throw Error(ErrorKind::invalid_input, "predictor names do not match predictor count");
  for (std::size_t j = 0; j < p; ++j) {
    if (predictors[j].size() != y.size()) {
      throw Error(ErrorKind::invalid_input, fmt::format("predictor '{}' has {} values, outcome has {}", names[j],
                                                        predictors[j].size(), y.size()));
    }
  }

  // Listwise deletion.
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < y.size(); ++i) {
    bool complete = y[i].has_value();
    for (std::size_t j = 0; j < p && complete; ++j) complete = predictors[j][i].has_value();
    if (complete) rows.push_back(i);
  }
  const std::size_t n = rows.size();
  const std::size_t cols = p + 1;
  if (n <= cols) {
    throw Error(ErrorKind::invalid_input,
                fmt::format("regression with {} predictors needs more than {} complete rows, has {}", p, cols, n));
  }

  // Column-major design matrix [1 | X].
  std::vector<double> a(n * cols);
  std::vector<double> rhs(n);
  auto at = [&](std::size_t i, std::size_t j) -> double& { return a[j * n + i]; };
  for (std::size_t i = 0; i < n; ++i) {
    at(i, 0) = 1.0;
    for (std::size_t j = 0; j < p; ++j) at(i, j + 1) = *predictors[j][rows[i]];
    rhs[i] = *y[rows[i]];
  }
  const std::vector<double> design = a;
  const std::vector<double> outcome = rhs;

  std::vector<double> column_norm(cols, 0.0);
  for (std::size_t j = 0; j < cols; ++j) {
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) ss += at(i, j) * at(i, j);
    column_norm[j] = std::sqrt(ss);
  }

  // Householder QR; R overwrites the upper triangle, Q^T is applied to rhs.
  std::vector<double> diag(cols);
  for (std::size_t k = 0; k < cols; ++k) {
    double norm = 0.0;
    for (std::size_t i = k; i < n; ++i) norm += at(i, k) * at(i, k);
    norm = std::sqrt(norm);
    if (norm <= 1e-10 * column_norm[k] || column_norm[k] == 0.0) {
      if (k == 0) throw Error(ErrorKind::rank_deficient, "intercept column is degenerate");
      throw Error(ErrorKind::rank_deficient,
                  fmt::format("predictor '{}' is collinear with the intercept or earlier predictors", names[k - 1]));
    }
    const double alpha = at(k, k) > 0.0 ? -norm : norm;
    // v = x - alpha e1, stored in place below the diagonal
    at(k, k) -= alpha;
    double vnorm2 = 0.0;
    for (std::size_t i = k; i < n; ++i) vnorm2 += at(i, k) * at(i, k);
    for (std::size_t j = k + 1; j < cols; ++j) {
      double dot = 0.0;
      for (std::size_t i = k; i < n; ++i) dot += at(i, k) * at(i, j);
      const double s = 2.0 * dot / vnorm2;
      for (std::size_t i = k; i < n; ++i) at(i, j) -= s * at(i, k);
    }
    double dot = 0.0;
    for (std::size_t i = k; i < n; ++i) dot += at(i, k) * rhs[i];
    const double s = 2.0 * dot / vnorm2;
    for (std::size_t i = k; i < n; ++i) rhs[i] -= s * at(i, k);
    diag[k] = alpha;
  }

  std::vector<double> b(cols);
  for (std::size_t k = cols; k-- > 0;) {
    double sum = rhs[k];
    for (std::size_t j = k + 1; j < cols; ++j) sum -= at(k, j) * b[j];
    b[k] = sum / diag[k];
  }

  RegressionReport out;
  out.n = static_cast<int>(n);
  out.predictors = std::move(names);
  out.intercept = b[0];
  out.coefficients.assign(b.begin() + 1, b.end());
  out.fitted.resize(n);
  out.residuals.resize(n);
  double ss_res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double f = 0.0;
    for (std::size_t j = 0; j < cols; ++j) f += design[j * n + i] * b[j];
    out.fitted[i] = f;
    out.residuals[i] = outcome[i] - f;
    ss_res += out.residuals[i] * out.residuals[i];
  }
  const double my = mean_of(outcome);
  const double ss_tot = centered_ss(outcome, my);
  if (ss_tot == 0.0) throw Error(ErrorKind::degenerate, "outcome has zero variance");
  out.r_squared = std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0);
  out.residual_sd = std::sqrt(ss_res / static_cast<double>(n - cols));

  const double sd_y = std::sqrt(ss_tot / static_cast<double>(n - 1));
  for (std::size_t j = 0; j < p; ++j) {
    std::span<const double> xj(design.data() + (j + 1) * n, n);
    const double sd_x = std::sqrt(centered_ss(xj, mean_of(xj)) / static_cast<double>(n - 1));
    out.betas.push_back(out.coefficients[j] * sd_x / sd_y);
  }
  return out;
}

std::string to_string(IccModel model) {
  switch (model) {
    case IccModel::oneway: return "oneway";
    case IccModel::twoway_consistency: return "twoway_consistency";
    case IccModel::twoway_agreement: return "twoway_agreement";
  }
  return "unknown";
}

IccModel parse_icc_model(std::string_view text) {
  if (text == "oneway") return IccModel::oneway;
  if (text == "twoway_consistency") return IccModel::twoway_consistency;
  if (text == "twoway_agreement") return IccModel::twoway_agreement;
  throw Error(ErrorKind::invalid_input,
              fmt::format("unknown ICC model '{}' (oneway, twoway_consistency, twoway_agreement)", text));
}

IccReport icc(const RatingMatrix& ratings, IccModel model) {
  if (ratings.cells.size() != ratings.raters * ratings.targets) {
    throw Error(ErrorKind::invalid_input, "rating matrix size does not match its shape");
  }
  std::vector<std::size_t> kept;
  for (std::size_t r = 0; r < ratings.raters; ++r) {
    bool complete = true;
    for (std::size_t t = 0; t < ratings.targets && complete; ++t) complete = ratings.at(r, t).has_value();
    if (complete) kept.push_back(r);
  }
  const std::size_t k = kept.size();
  const std::size_t n = ratings.targets;
  if (k < 2 || n < 2) {
    throw Error(ErrorKind::invalid_input,
                fmt::format("ICC needs at least 2 complete raters and 2 targets, has {} and {}", k, n));
  }

  auto x = [&](std::size_t rater, std::size_t target) { return *ratings.at(kept[rater], target); };
  double grand = 0.0;
  std::vector<double> target_mean(n, 0.0);
  std::vector<double> rater_mean(k, 0.0);
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t t = 0; t < n; ++t) {
      const double v = x(r, t);
      grand += v;
      target_mean[t] += v;
      rater_mean[r] += v;
    }
  }
  const double kn = static_cast<double>(k * n);
  grand /= kn;
  for (auto& m : target_mean) m /= static_cast<double>(k);
  for (auto& m : rater_mean) m /= static_cast<double>(n);

  double ss_targets = 0.0;
  for (double m : target_mean) ss_targets += (m - grand) * (m - grand);
  ss_targets *= static_cast<double>(k);
  double ss_raters = 0.0;
  for (double m : rater_mean) ss_raters += (m - grand) * (m - grand);
  ss_raters *= static_cast<double>(n);
  double ss_total = 0.0;
  double ss_error = 0.0;
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t t = 0; t < n; ++t) {
      const double d = x(r, t) - grand;
      ss_total += d * d;
      const double e = x(r, t) - target_mean[t] - rater_mean[r] + grand;
      ss_error += e * e;
    }
  }
  if (ss_total == 0.0 || ss_targets <= 1e-12 * ss_total) {
    throw Error(ErrorKind::degenerate, "ratings show no between-topic variance; ICC is undefined");
  }

  const double kd = static_cast<double>(k);
  const double nd = static_cast<double>(n);
  IccReport out;
  out.model = model;
  out.raters = static_cast<int>(k);
  out.targets = static_cast<int>(n);
  auto& ms = out.mean_squares;
  ms.between_targets = ss_targets / (nd - 1.0);
  ms.between_raters = ss_raters / (kd - 1.0);
  ms.residual = ss_error / ((nd - 1.0) * (kd - 1.0));
  ms.within_targets = (ss_raters + ss_error) / (nd * (kd - 1.0));

  const double msr = ms.between_targets;
  switch (model) {
    case IccModel::oneway:
      out.single = (msr - ms.within_targets) / (msr + (kd - 1.0) * ms.within_targets);
      out.average = (msr - ms.within_targets) / msr;
      break;
    case IccModel::twoway_consistency:
      out.single = (msr - ms.residual) / (msr + (kd - 1.0) * ms.residual);
      out.average = (msr - ms.residual) / msr;
      break;
    case IccModel::twoway_agreement:
      out.single = (msr - ms.residual) /
                   (msr + (kd - 1.0) * ms.residual + kd * (ms.between_raters - ms.residual) / nd);
      out.average = (msr - ms.residual) / (msr + (ms.between_raters - ms.residual) / nd);
      break;
  }
  return out;
}

double critical_z(Confidence confidence) {
  if (!(confidence.level > 0.0 && confidence.level < 1.0)) {
    throw Error(ErrorKind::out_of_range, fmt::format("confidence level {} outside (0, 1)", confidence.level));
  }
  const boost::math::normal standard;
  return boost::math::quantile(standard, 1.0 - (1.0 - confidence.level) / 2.0);
}

namespace {

void require_positive(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw Error(ErrorKind::out_of_range, fmt::format("{} must be positive and finite, got {}", what, value));
  }
}

}  // namespace

SampleSizePlan required_sample_size(CriticalZ z, double sigma, double margin) {
  require_positive(z.value, "Z");
  require_positive(sigma, "sigma");
  require_positive(margin, "margin of error");
  SampleSizePlan plan;
  plan.z = z.value;
  plan.sigma = sigma;
  plan.margin = margin;
  const double ratio = z.value * sigma / margin;
  plan.raw = ratio * ratio;
  // Round up; the relative slack only absorbs representation error on exact integers.
  plan.n = std::max(1, static_cast<int>(std::ceil(plan.raw * (1.0 - 1e-12))));
  return plan;
}

SampleSizePlan required_sample_size(Confidence confidence, double sigma, double margin) {
  auto plan = required_sample_size(CriticalZ{critical_z(confidence)}, sigma, margin);
  plan.confidence = confidence.level;
  return plan;
}

double achieved_margin(int n, double sigma, CriticalZ z) {
  if (n < 1) throw Error(ErrorKind::out_of_range, fmt::format("sample size must be at least 1, got {}", n));
  require_positive(sigma, "sigma");
  require_positive(z.value, "Z");
  return z.value * sigma / std::sqrt(static_cast<double>(n));
}

double achieved_margin(int n, double sigma, Confidence confidence) {
  return achieved_margin(n, sigma, CriticalZ{critical_z(confidence)});
}

namespace {

using nlohmann::ordered_json;

ordered_json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return detail::round_sig(v, 12);
}

ordered_json numbers(const std::vector<double>& values) {
  ordered_json out = ordered_json::array();
  for (double v : values) out.push_back(number(v));
  return out;
}

}  // namespace

std::string to_json(const CorrelationReport& report) {
  ordered_json j;
  j["r"] = number(report.r);
  j["n"] = report.n;
  j["df"] = report.df;
  j["t"] = number(report.t);
  j["p"] = number(report.p);
  return j.dump(2);
}

std::string to_json(const RegressionReport& report) {
  ordered_json j;
  j["n"] = report.n;
  j["intercept"] = number(report.intercept);
  j["predictors"] = report.predictors;
  j["coefficients"] = numbers(report.coefficients);
  j["betas"] = numbers(report.betas);
  j["r_squared"] = number(report.r_squared);
  j["residual_sd"] = number(report.residual_sd);
  return j.dump(2);
}

std::string to_json(const IccReport& report) {
  ordered_json j;
  j["model"] = to_string(report.model);
  j["icc_single"] = number(report.single);
  j["icc_average"] = number(report.average);
  j["raters"] = report.raters;
  j["targets"] = report.targets;
  j["mean_squares"] = {
      {"between_targets", number(report.mean_squares.between_targets)},
      {"between_raters", number(report.mean_squares.between_raters)},
      {"residual", number(report.mean_squares.residual)},
      {"within_targets", number(report.mean_squares.within_targets)},
  };
  return j.dump(2);
}

std::string to_json(const SampleSizePlan& plan) {
  ordered_json j;
  if (plan.confidence) j["confidence"] = number(*plan.confidence);
  j["z"] = number(plan.z);
  j["sigma"] = number(plan.sigma);
  j["margin"] = number(plan.margin);
  j["raw"] = number(plan.raw);
  j["n"] = plan.n;
  return j.dump(2);
}

}  // namespace scenmap::stats
