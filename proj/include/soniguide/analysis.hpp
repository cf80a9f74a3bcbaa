#ifndef SONIGUIDE_ANALYSIS_HPP
#define SONIGUIDE_ANALYSIS_HPP

#include "soniguide/scene.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace soniguide {

// Length of a polyline given as a 3 x N matrix of points (one per column).
template <typename Derived>
typename Derived::Scalar path_length(const Eigen::MatrixBase<Derived>& points) {
  if (points.cols() < 2) return typename Derived::Scalar(0);
  const auto n = points.cols();
  return (points.rightCols(n - 1) - points.leftCols(n - 1)).colwise().norm().sum();
}

// Sum of distances between consecutive samples. Throws ValidationError if empty.
double path_length(const Trial& trial);

struct Precision {
  double prec = 0.0;  // Euclidean click error
  double x = 0.0;     // absolute per-axis errors
  double y = 0.0;
  double z = 0.0;
};

Precision precision(const Trial& trial, const Vec3& target);
inline Precision precision(const Trial& trial) { return precision(trial, trial.target); }

// Quantile of ascending `sorted` data by linear interpolation between the
// order statistics at rank p * (n - 1).
double quantile(std::span<const double> sorted, double p);

struct FilterReport {
  std::vector<double> kept;      // input order preserved
  std::vector<double> removed;
  std::vector<bool> kept_mask;   // per input value
  double q1 = 0.0;
  double q3 = 0.0;
  double iqr = 0.0;
  double lower_fence = 0.0;
  double upper_fence = 0.0;
};

// Removes values strictly outside [Q1 - 1.5 IQR, Q3 + 1.5 IQR].
// Throws ValidationError for fewer than 4 values.
FilterReport iqr_filter(std::span<const double> values);

enum class Measure { Time, Length, Prec, PrecX, PrecY, PrecZ };
inline constexpr std::array<Measure, 6> kAllMeasures = {Measure::Time,  Measure::Length, Measure::Prec,
                                                        Measure::PrecX, Measure::PrecY,  Measure::PrecZ};
std::string_view to_string(Measure m);
std::string_view unit_of(Measure m);

struct DecadeMetrics {
  int decade = 1;
  GuidanceMode mode = GuidanceMode::Auditory;
  double time = 0.0;    // s, summed over the decade's clicks
  double length = 0.0;  // cm, summed path lengths
  double prec = 0.0;    // cm, means over the 10 trials
  double prec_x = 0.0;
  double prec_y = 0.0;
  double prec_z = 0.0;

  double value(Measure m) const;
  Eigen::Matrix<double, 6, 1> vector() const;
};

// Validates the session first (throws ValidationError).
std::array<DecadeMetrics, 3> decade_metrics(const Session& session);

struct AnovaResult {
  double f = 0.0;
  int df_between = 0;
  int df_within = 0;
  double p = 1.0;
  double partial_eta2 = 0.0;
  double ss_between = 0.0;
  double ss_within = 0.0;
};

// One-way ANOVA. Each group needs >= 2 values.
AnovaResult anova_oneway(std::span<const Eigen::VectorXd> groups);

struct ManovaResult {
  double wilks_lambda = 1.0;
  double f_approx = 0.0;  // Rao's approximation
  double df1 = 0.0;
  double df2 = 0.0;
  double p = 1.0;
  double partial_eta2 = 0.0;  // 1 - lambda^(1/s), s = min(variables, groups - 1)
};

// Sum-of-squares-and-cross-products matrices; rows are observations.
struct Sscp {
  Eigen::MatrixXd within;
  Eigen::MatrixXd between;
};
Sscp sscp(std::span<const Eigen::MatrixXd> groups);

// One-way MANOVA with Wilks' lambda. Throws SingularMatrixError when the
// within-groups SSCP matrix is not positive definite.
ManovaResult manova_oneway(std::span<const Eigen::MatrixXd> groups);

struct PairwiseComparison {
  int first = 0;
  int second = 0;
  double mean_difference = 0.0;  // mean(first) - mean(second)
  double p = 1.0;
  bool exact = false;  // all relabelings enumerated
};

// Two-sided permutation test of the mean difference for every pair of groups.
// Pairs with at most `n_permutations` distinct relabelings are enumerated
// exactly (p = share of relabelings at least as extreme); the rest use
// `n_permutations` seeded draws with p = (hits + 1) / (n_permutations + 1).
std::vector<PairwiseComparison> posthoc_pairwise(std::span<const Eigen::VectorXd> groups, int n_permutations,
                                                 std::uint64_t seed);

struct BonferroniResult {
  double threshold = 0.0;
  std::vector<bool> significant;
};

BonferroniResult bonferroni(std::span<const double> p_values, double alpha);

struct ReportOptions {
  double alpha = 0.05;
  int n_permutations = 20000;
  std::uint64_t seed = 1;
};

struct CellStats {
  int decade = 1;
  Measure measure = Measure::Time;
  GuidanceMode mode = GuidanceMode::Auditory;
  int n = 0;        // values kept after outlier filtering
  int removed = 0;
  double mean = 0.0;
  double sd = 0.0;  // sample SD; NaN for n < 2
  std::vector<GuidanceMode> superscripts;  // modes this cell differs from significantly
};

struct MeasureTest {
  int decade = 1;
  Measure measure = Measure::Time;
  AnovaResult anova;
  bool significant = false;  // p below the Bonferroni-corrected alpha
  std::vector<PairwiseComparison> pairs;  // group indices follow kAllModes
};

struct DecadeTest {
  int decade = 1;
  int sessions_used = 0;  // after listwise outlier removal
  std::optional<ManovaResult> manova;
  double permutation_p = 1.0;  // label permutations with the outlier filtering redone each time
  bool manova_significant = false;
  bool tested = false;
};

// Per decade: IQR filtering per (mode, measure) group, descriptive mean/SD,
// then MANOVA over all six measures on the sessions without any outlier.
// Its significance is judged against label permutations that repeat the
// filtering, since filtering within groups shrinks the within-group
// scatter and inflates the parametric p. If it is significant, a per-measure ANOVA at alpha / 6 and pairwise
// permutation tests at alpha / 3 decide the superscripts.
struct StatsReport {
  ReportOptions options;
  double anova_threshold = 0.0;
  double pair_threshold = 0.0;
  std::vector<CellStats> cells;
  std::vector<MeasureTest> tests;
  std::vector<DecadeTest> decades;
  std::vector<std::string> warnings;

  const CellStats& cell(int decade, Measure m, GuidanceMode mode) const;
  bool any_superscript() const;
};

StatsReport report(std::span<const Session> sessions, const ReportOptions& options = {});

// Column schema documented in docs/formats.md.
std::string report_csv(const StatsReport& report);
std::string report_text(const StatsReport& report);

}  // namespace soniguide

#endif  // SONIGUIDE_ANALYSIS_HPP
