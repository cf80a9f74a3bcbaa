#include "soniguide/analysis.hpp"

#include "soniguide/error.hpp"
#include "soniguide/random.hpp"
#include "soniguide/special_functions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace soniguide {

double path_length(const Trial& trial) {
  if (trial.samples.empty()) throw ValidationError("path length of an empty trial");
  Eigen::Matrix3Xd points(3, static_cast<Eigen::Index>(trial.samples.size()));
  for (std::size_t i = 0; i < trial.samples.size(); ++i) points.col(static_cast<Eigen::Index>(i)) = trial.samples[i].pos;
  return path_length(points);
}

Precision precision(const Trial& trial, const Vec3& target) {
  const Vec3 error = trial.click_pos - target;
  return {error.norm(), std::abs(error.x()), std::abs(error.y()), std::abs(error.z())};
}

double quantile(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw ValidationError("quantile of empty data");
  const double rank = p * static_cast<double>(sorted.size() - 1);
  const auto lower = static_cast<std::size_t>(std::floor(rank));
  const std::size_t upper = std::min(lower + 1, sorted.size() - 1);
  const double frac = rank - static_cast<double>(lower);
  return sorted[lower] + frac * (sorted[upper] - sorted[lower]);
}

FilterReport iqr_filter(std::span<const double> values) {
  if (values.size() < 4) throw ValidationError("outlier filtering needs at least 4 values");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());

  FilterReport report;
  report.q1 = quantile(sorted, 0.25);
  report.q3 = quantile(sorted, 0.75);
  report.iqr = report.q3 - report.q1;
  report.lower_fence = report.q1 - 1.5 * report.iqr;
  report.upper_fence = report.q3 + 1.5 * report.iqr;
  report.kept_mask.reserve(values.size());
  for (double v : values) {
    const bool keep = v >= report.lower_fence && v <= report.upper_fence;
    report.kept_mask.push_back(keep);
    (keep ? report.kept : report.removed).push_back(v);
  }
  return report;
}

std::string_view to_string(Measure m) {
  switch (m) {
    case Measure::Time:
      return "time";
    case Measure::Length:
      return "length";
    case Measure::Prec:
      return "prec";
    case Measure::PrecX:
      return "prec_x";
    case Measure::PrecY:
      return "prec_y";
    case Measure::PrecZ:
      return "prec_z";
  }
  return "?";
}

std::string_view unit_of(Measure m) { return m == Measure::Time ? "s" : "cm"; }

double DecadeMetrics::value(Measure m) const {
  switch (m) {
    case Measure::Time:
      return time;
    case Measure::Length:
      return length;
    case Measure::Prec:
      return prec;
    case Measure::PrecX:
      return prec_x;
    case Measure::PrecY:
      return prec_y;
    case Measure::PrecZ:
      return prec_z;
  }
  return 0.0;
}

Eigen::Matrix<double, 6, 1> DecadeMetrics::vector() const {
  Eigen::Matrix<double, 6, 1> v;
  for (std::size_t i = 0; i < kAllMeasures.size(); ++i) v[static_cast<Eigen::Index>(i)] = value(kAllMeasures[i]);
  return v;
}

std::array<DecadeMetrics, 3> decade_metrics(const Session& session) {
  session.validate();
  std::array<DecadeMetrics, 3> out;
  for (int d = 0; d < 3; ++d) {
    DecadeMetrics& m = out[static_cast<std::size_t>(d)];
    m.decade = d + 1;
    m.mode = session.order.mode_for_decade(d + 1);
    for (int i = 0; i < kTrialsPerDecade; ++i) {
      const Trial& trial = session.trials[static_cast<std::size_t>(d * kTrialsPerDecade + i)];
      const Precision p = precision(trial);
      m.time += trial.click_t;
      m.length += path_length(trial);
      m.prec += p.prec;
      m.prec_x += p.x;
      m.prec_y += p.y;
      m.prec_z += p.z;
    }
    m.prec /= kTrialsPerDecade;
    m.prec_x /= kTrialsPerDecade;
    m.prec_y /= kTrialsPerDecade;
    m.prec_z /= kTrialsPerDecade;
  }
  return out;
}

AnovaResult anova_oneway(std::span<const Eigen::VectorXd> groups) {
  if (groups.size() < 2) throw ValidationError("ANOVA needs at least 2 groups");
  Eigen::Index total = 0;
  double grand_sum = 0.0;
  for (const auto& g : groups) {
    if (g.size() < 2) throw ValidationError("ANOVA needs at least 2 values per group");
    if (!g.allFinite()) throw ValidationError("ANOVA values must be finite");
    total += g.size();
    grand_sum += g.sum();
  }
  const double grand_mean = grand_sum / static_cast<double>(total);

  AnovaResult r;
  r.df_between = static_cast<int>(groups.size()) - 1;
  r.df_within = static_cast<int>(total) - static_cast<int>(groups.size());

  const double first_mean = groups[0].mean();
  bool equal_means = true;
  for (const auto& g : groups) {
    const double mean = g.mean();
    equal_means = equal_means && mean == first_mean;
    r.ss_between += static_cast<double>(g.size()) * (mean - grand_mean) * (mean - grand_mean);
    r.ss_within += (g.array() - mean).square().sum();
  }
  if (equal_means) r.ss_between = 0.0;

  if (r.ss_between == 0.0) {
    r.f = 0.0;
    r.p = 1.0;
    r.partial_eta2 = 0.0;
    return r;
  }
  r.partial_eta2 = r.ss_between / (r.ss_between + r.ss_within);
  if (r.ss_within == 0.0) {
    r.f = std::numeric_limits<double>::infinity();
    r.p = 0.0;
    return r;
  }
  r.f = (r.ss_between / r.df_between) / (r.ss_within / r.df_within);
  r.p = f_survival(r.f, r.df_between, r.df_within);
  return r;
}

Sscp sscp(std::span<const Eigen::MatrixXd> groups) {
  if (groups.empty()) throw ValidationError("SSCP of no groups");
  const Eigen::Index vars = groups[0].cols();
  Eigen::Index total = 0;
  Eigen::RowVectorXd grand_sum = Eigen::RowVectorXd::Zero(vars);
  for (const auto& g : groups) {
    if (g.cols() != vars) throw ValidationError("all MANOVA groups need the same number of variables");
    if (g.rows() < 1) throw ValidationError("empty MANOVA group");
    if (!g.allFinite()) throw ValidationError("MANOVA values must be finite");
    total += g.rows();
    grand_sum += g.colwise().sum();
  }
  const Eigen::RowVectorXd grand_mean = grand_sum / static_cast<double>(total);

  Sscp s{Eigen::MatrixXd::Zero(vars, vars), Eigen::MatrixXd::Zero(vars, vars)};
  const Eigen::RowVectorXd first_mean = groups[0].colwise().mean();
  bool equal_means = true;
  for (const auto& g : groups) {
    const Eigen::RowVectorXd mean = g.colwise().mean();
    equal_means = equal_means && mean == first_mean;
    const Eigen::MatrixXd centered = g.rowwise() - mean;
    s.within += centered.transpose() * centered;
    const Eigen::RowVectorXd offset = mean - grand_mean;
    s.between += static_cast<double>(g.rows()) * offset.transpose() * offset;
  }
  if (equal_means) s.between.setZero();
  return s;
}

ManovaResult manova_oneway(std::span<const Eigen::MatrixXd> groups) {
  if (groups.size() < 2) throw ValidationError("MANOVA needs at least 2 groups");
  const Sscp s = sscp(groups);
  const auto vars = static_cast<double>(s.within.rows());
  Eigen::Index total = 0;
  for (const auto& g : groups) total += g.rows();
  const double hypothesis_df = static_cast<double>(groups.size()) - 1.0;
  const double error_df = static_cast<double>(total) - static_cast<double>(groups.size());
  if (static_cast<double>(total) <= vars + static_cast<double>(groups.size())) {
    throw ValidationError("MANOVA needs more observations than variables plus groups");
  }

  const Eigen::LLT<Eigen::MatrixXd> within_llt(s.within);
  const Eigen::VectorXd within_diag = within_llt.matrixL().toDenseMatrix().diagonal();
  if (within_llt.info() != Eigen::Success || (within_diag.array() <= 0.0).any() ||
      within_diag.minCoeff() <= 1e-10 * within_diag.maxCoeff()) {
    throw SingularMatrixError("within-groups SSCP matrix is singular; drop collinear or constant variables");
  }
  const Eigen::LLT<Eigen::MatrixXd> total_llt(s.within + s.between);
  const Eigen::VectorXd total_diag = total_llt.matrixL().toDenseMatrix().diagonal();

  ManovaResult r;
  r.wilks_lambda = std::exp(2.0 * (within_diag.array().log().sum() - total_diag.array().log().sum()));
  r.wilks_lambda = std::min(r.wilks_lambda, 1.0);

  const double p = vars;
  const double q = hypothesis_df;
  const double t = (p * p + q * q - 5.0) > 0.0 ? std::sqrt((p * p * q * q - 4.0) / (p * p + q * q - 5.0)) : 1.0;
  const double m = error_df - (p - q + 1.0) / 2.0;
  r.df1 = p * q;
  r.df2 = m * t - p * q / 2.0 + 1.0;
  const double root = std::pow(r.wilks_lambda, 1.0 / t);
  r.f_approx = r.wilks_lambda >= 1.0 ? 0.0 : (1.0 - root) / root * r.df2 / r.df1;
  r.p = r.f_approx <= 0.0 ? 1.0 : f_survival(r.f_approx, r.df1, r.df2);
  r.partial_eta2 = 1.0 - std::pow(r.wilks_lambda, 1.0 / std::min(p, q));
  return r;
}

namespace {

// C(n, k) saturating at `cap` + 1.
std::uint64_t binomial_capped(int n, int k, std::uint64_t cap) {
  k = std::min(k, n - k);
  double value = 1.0;
  for (int i = 1; i <= k; ++i) {
    value = value * (n - k + i) / i;
    if (value > static_cast<double>(cap)) return cap + 1;
  }
  return static_cast<std::uint64_t>(std::llround(value));
}

PairwiseComparison permutation_pair(const Eigen::VectorXd& a, const Eigen::VectorXd& b, int n_permutations, Rng& rng) {
  const auto na = static_cast<int>(a.size());
  const auto nb = static_cast<int>(b.size());
  const int n = na + nb;
  std::vector<double> pooled(a.data(), a.data() + na);
  pooled.insert(pooled.end(), b.data(), b.data() + nb);
  const double total = std::accumulate(pooled.begin(), pooled.end(), 0.0);

  PairwiseComparison out;
  out.mean_difference = a.mean() - b.mean();
  const double observed = std::abs(out.mean_difference);
  const double tolerance = 1e-12 * std::max(1.0, observed);
  const auto extreme = [&](double sum_a) {
    const double diff = sum_a / na - (total - sum_a) / nb;
    return std::abs(diff) >= observed - tolerance;
  };

  const std::uint64_t splits = binomial_capped(n, na, static_cast<std::uint64_t>(n_permutations));
  if (splits <= static_cast<std::uint64_t>(n_permutations)) {
    std::vector<bool> in_a(static_cast<std::size_t>(n), false);
    std::fill(in_a.begin(), in_a.begin() + na, true);
    std::uint64_t hits = 0;
    std::uint64_t count = 0;
    do {
      double sum_a = 0.0;
      for (int i = 0; i < n; ++i) {
        if (in_a[static_cast<std::size_t>(i)]) sum_a += pooled[static_cast<std::size_t>(i)];
      }
      hits += extreme(sum_a) ? 1 : 0;
      ++count;
    } while (std::prev_permutation(in_a.begin(), in_a.end()));
    out.p = static_cast<double>(hits) / static_cast<double>(count);
    out.exact = true;
    return out;
  }

  std::uint64_t hits = 0;
  std::vector<double> work = pooled;
  for (int r = 0; r < n_permutations; ++r) {
    shuffle(work.begin(), work.end(), rng);
    const double sum_a = std::accumulate(work.begin(), work.begin() + na, 0.0);
    hits += extreme(sum_a) ? 1 : 0;
  }
  out.p = static_cast<double>(hits + 1) / static_cast<double>(n_permutations + 1);
  return out;
}

}  // namespace

std::vector<PairwiseComparison> posthoc_pairwise(std::span<const Eigen::VectorXd> groups, int n_permutations,
                                                 std::uint64_t seed) {
  if (groups.size() < 2) throw ValidationError("post-hoc comparison needs at least 2 groups");
  if (n_permutations < 1) throw ValidationError("post-hoc comparison needs n_permutations >= 1");
  for (const auto& g : groups) {
    if (g.size() < 1) throw ValidationError("post-hoc comparison of an empty group");
  }
  Rng rng(seed);
  std::vector<PairwiseComparison> out;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    for (std::size_t j = i + 1; j < groups.size(); ++j) {
      PairwiseComparison c = permutation_pair(groups[i], groups[j], n_permutations, rng);
      c.first = static_cast<int>(i);
      c.second = static_cast<int>(j);
      out.push_back(c);
    }
  }
  return out;
}

BonferroniResult bonferroni(std::span<const double> p_values, double alpha) {
  if (p_values.empty()) throw ValidationError("Bonferroni correction needs at least one test");
  BonferroniResult r;
  r.threshold = alpha / static_cast<double>(p_values.size());
  for (double p : p_values) r.significant.push_back(p < r.threshold);
  return r;
}

}  // namespace soniguide
