#include "soniguide/analysis.hpp"

#include "soniguide/error.hpp"
#include "soniguide/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

namespace soniguide {

namespace {

constexpr int kMinPerMode = 2;

std::size_t mode_slot(GuidanceMode mode) {
  return static_cast<std::size_t>(std::find(kAllModes.begin(), kAllModes.end(), mode) - kAllModes.begin());
}

std::string number(double v) {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string fixed(double v, int digits) {
  if (std::isnan(v)) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string join_modes(const std::vector<GuidanceMode>& modes, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < modes.size(); ++i) {
    if (i) out += sep;
    out += to_string(modes[i]);
  }
  return out;
}

double sample_sd(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

using Row = Eigen::Matrix<double, 6, 1>;

// Per-(mode, measure) IQR filtering followed by listwise deletion of every
// session with an outlier in any measure.
std::array<Eigen::MatrixXd, 3> clean_groups(const std::array<std::vector<Row>, 3>& rows) {
  std::array<Eigen::MatrixXd, 3> groups;
  std::vector<double> values;
  for (std::size_t mi = 0; mi < 3; ++mi) {
    const auto& g = rows[mi];
    std::vector<bool> keep(g.size(), true);
    if (g.size() >= 4) {
      for (Eigen::Index k = 0; k < 6; ++k) {
        values.clear();
        for (const Row& r : g) values.push_back(r[k]);
        const FilterReport f = iqr_filter(values);
        for (std::size_t i = 0; i < g.size(); ++i) keep[i] = keep[i] && f.kept_mask[i];
      }
    }
    const auto n = std::count(keep.begin(), keep.end(), true);
    groups[mi].resize(n, 6);
    Eigen::Index r = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (keep[i]) groups[mi].row(r++) = g[i].transpose();
    }
  }
  return groups;
}

// Share of label permutations whose cleaned groups give a Wilks' lambda at
// most the observed one, with the filtering redone for every relabeling.
double manova_permutation_p(const std::array<std::vector<Row>, 3>& rows, double observed, int n_permutations,
                            std::uint64_t seed) {
  std::vector<Row> pooled;
  std::vector<std::size_t> labels;
  for (std::size_t mi = 0; mi < 3; ++mi) {
    for (const Row& r : rows[mi]) {
      pooled.push_back(r);
      labels.push_back(mi);
    }
  }
  Rng rng(seed);
  int hits = 0;
  std::array<std::vector<Row>, 3> shuffled;
  for (int i = 0; i < n_permutations; ++i) {
    shuffle(labels.begin(), labels.end(), rng);
    for (auto& g : shuffled) g.clear();
    for (std::size_t j = 0; j < pooled.size(); ++j) shuffled[labels[j]].push_back(pooled[j]);
    const auto groups = clean_groups(shuffled);
    if (std::any_of(groups.begin(), groups.end(), [](const Eigen::MatrixXd& g) { return g.rows() < kMinPerMode; })) {
      continue;
    }
    try {
      if (manova_oneway(groups).wilks_lambda <= observed * (1.0 + 1e-12)) ++hits;
    } catch (const SingularMatrixError&) {
    }
  }
  return (hits + 1.0) / (n_permutations + 1.0);
}

}  // namespace

const CellStats& StatsReport::cell(int decade, Measure m, GuidanceMode mode) const {
  for (const auto& c : cells) {
    if (c.decade == decade && c.measure == m && c.mode == mode) return c;
  }
  throw ValidationError("no report cell for decade " + std::to_string(decade));
}

bool StatsReport::any_superscript() const {
  return std::any_of(cells.begin(), cells.end(), [](const CellStats& c) { return !c.superscripts.empty(); });
}

StatsReport report(std::span<const Session> sessions, const ReportOptions& options) {
  StatsReport out;
  out.options = options;
  out.anova_threshold = options.alpha / static_cast<double>(kAllMeasures.size());
  out.pair_threshold = options.alpha / 3.0;

  // metrics[decade][mode] -> one entry per session with that mode in that decade
  std::array<std::array<std::vector<DecadeMetrics>, 3>, 3> metrics;
  for (const Session& s : sessions) {
    for (const DecadeMetrics& m : decade_metrics(s)) {
      metrics[static_cast<std::size_t>(m.decade - 1)][mode_slot(m.mode)].push_back(m);
    }
  }

  std::uint64_t test_seed = options.seed;
  for (int decade = 1; decade <= 3; ++decade) {
    const auto& by_mode = metrics[static_cast<std::size_t>(decade - 1)];

    for (Measure measure : kAllMeasures) {
      for (std::size_t mi = 0; mi < 3; ++mi) {
        std::vector<double> values;
        for (const auto& m : by_mode[mi]) values.push_back(m.value(measure));

        CellStats cell;
        cell.decade = decade;
        cell.measure = measure;
        cell.mode = kAllModes[mi];
        std::vector<double> kept = values;
        if (values.size() >= 4) {
          const FilterReport f = iqr_filter(values);
          kept = f.kept;
          cell.removed = static_cast<int>(f.removed.size());
        }
        cell.n = static_cast<int>(kept.size());
        cell.mean = kept.empty() ? std::numeric_limits<double>::quiet_NaN()
                                 : std::accumulate(kept.begin(), kept.end(), 0.0) / static_cast<double>(kept.size());
        cell.sd = sample_sd(kept, cell.mean);
        out.cells.push_back(cell);
      }
    }

    DecadeTest dt;
    dt.decade = decade;
    std::array<std::vector<Row>, 3> rows;
    for (std::size_t mi = 0; mi < 3; ++mi) {
      for (const auto& m : by_mode[mi]) rows[mi].push_back(m.vector());
    }
    const std::array<Eigen::MatrixXd, 3> groups = clean_groups(rows);
    bool powered = true;
    for (const auto& g : groups) {
      dt.sessions_used += static_cast<int>(g.rows());
      if (g.rows() < kMinPerMode) powered = false;
    }
    if (!powered) {
      out.warnings.push_back("decade " + std::to_string(decade) + ": under-powered (fewer than " +
                             std::to_string(kMinPerMode) + " usable sessions for some mode); no inferential tests");
      out.decades.push_back(dt);
      continue;
    }

    dt.tested = true;
    try {
      dt.manova = manova_oneway(groups);
      dt.permutation_p = manova_permutation_p(rows, dt.manova->wilks_lambda, options.n_permutations, test_seed++);
      dt.manova_significant = dt.permutation_p < options.alpha;
    } catch (const Error& e) {
      out.warnings.push_back("decade " + std::to_string(decade) + ": MANOVA not computed: " + e.what());
    }

    for (std::size_t k = 0; k < kAllMeasures.size(); ++k) {
      std::array<Eigen::VectorXd, 3> columns;
      for (std::size_t mi = 0; mi < 3; ++mi) columns[mi] = groups[mi].col(static_cast<Eigen::Index>(k));

      MeasureTest mt;
      mt.decade = decade;
      mt.measure = kAllMeasures[k];
      mt.anova = anova_oneway(columns);
      mt.significant = mt.anova.p < out.anova_threshold;
      mt.pairs = posthoc_pairwise(columns, options.n_permutations, test_seed++);

      if (dt.manova_significant && mt.significant) {
        for (const auto& pair : mt.pairs) {
          if (pair.p >= out.pair_threshold) continue;
          const GuidanceMode a = kAllModes[static_cast<std::size_t>(pair.first)];
          const GuidanceMode b = kAllModes[static_cast<std::size_t>(pair.second)];
          for (auto& cell : out.cells) {
            if (cell.decade != decade || cell.measure != mt.measure) continue;
            if (cell.mode == a) cell.superscripts.push_back(b);
            if (cell.mode == b) cell.superscripts.push_back(a);
          }
        }
      }
      out.tests.push_back(mt);
    }
    out.decades.push_back(dt);
  }

  for (auto& cell : out.cells) {
    std::sort(cell.superscripts.begin(), cell.superscripts.end(),
              [](GuidanceMode x, GuidanceMode y) { return mode_slot(x) < mode_slot(y); });
  }
  return out;
}

std::string report_csv(const StatsReport& r) {
  std::ostringstream os;
  os << "decade,measure,mode,n,removed,mean,sd,superscript,anova_f,anova_df1,anova_df2,anova_p,partial_eta2,"
        "anova_significant,manova_lambda,manova_f,manova_df1,manova_df2,manova_p,manova_partial_eta2,manova_permutation_p\r\n";
  for (const auto& c : r.cells) {
    const MeasureTest* test = nullptr;
    for (const auto& t : r.tests) {
      if (t.decade == c.decade && t.measure == c.measure) test = &t;
    }
    const DecadeTest* dt = nullptr;
    for (const auto& d : r.decades) {
      if (d.decade == c.decade) dt = &d;
    }
    os << c.decade << ',' << to_string(c.measure) << ',' << to_string(c.mode) << ',' << c.n << ',' << c.removed << ','
       << number(c.mean) << ',' << number(c.sd) << ',' << csv_field(join_modes(c.superscripts, " ")) << ',';
    if (test) {
      os << number(test->anova.f) << ',' << test->anova.df_between << ',' << test->anova.df_within << ','
         << number(test->anova.p) << ',' << number(test->anova.partial_eta2) << ',' << (test->significant ? 1 : 0);
    } else {
      os << ",,,,,";
    }
    os << ',';
    if (dt && dt->manova) {
      const auto& m = *dt->manova;
      os << number(m.wilks_lambda) << ',' << number(m.f_approx) << ',' << number(m.df1) << ',' << number(m.df2) << ','
         << number(m.p) << ',' << number(m.partial_eta2) << ',' << number(dt->permutation_p);
    } else {
      os << ",,,,,,";
    }
    os << "\r\n";
  }
  return os.str();
}

std::string report_text(const StatsReport& r) {
  std::ostringstream os;
  char line[256];
  for (const auto& dt : r.decades) {
    os << "Decade " << dt.decade;
    if (dt.manova) {
      const auto& m = *dt.manova;
      std::snprintf(line, sizeof line, "  MANOVA: Wilks' lambda = %.3f, F(%.0f,%.1f) = %.2f, p = %.4g, permutation p = %.4g, "
                    "partial eta^2 = %.3f%s",
                    m.wilks_lambda, m.df1, m.df2, m.f_approx, m.p, dt.permutation_p, m.partial_eta2,
                    dt.manova_significant ? " *" : "");
      os << line;
    } else if (!dt.tested) {
      os << "  (not tested)";
    }
    os << "  [" << dt.sessions_used << " sessions]\n";
    std::snprintf(line, sizeof line, "  %-8s %-26s %-26s %-26s %s\n", "measure", "a", "v", "av", "ANOVA");
    os << line;
    for (Measure m : kAllMeasures) {
      std::string cols[3];
      for (std::size_t mi = 0; mi < 3; ++mi) {
        const CellStats& c = r.cell(dt.decade, m, kAllModes[mi]);
        const int digits = m == Measure::Time || m == Measure::Length ? 1 : 2;
        cols[mi] = fixed(c.mean, digits) + " +- " + fixed(c.sd, digits) + " " + std::string(unit_of(m));
        if (!c.superscripts.empty()) cols[mi] += " ^" + join_modes(c.superscripts, ",");
      }
      std::string anova = "-";
      for (const auto& t : r.tests) {
        if (t.decade == dt.decade && t.measure == m) {
          char buf[96];
          std::snprintf(buf, sizeof buf, "F(%d,%d) = %.2f, p = %.4g, eta^2 = %.2f%s", t.anova.df_between,
                        t.anova.df_within, t.anova.f, t.anova.p, t.anova.partial_eta2, t.significant ? " *" : "");
          anova = buf;
        }
      }
      std::snprintf(line, sizeof line, "  %-8s %-26s %-26s %-26s %s\n", std::string(to_string(m)).c_str(),
                    cols[0].c_str(), cols[1].c_str(), cols[2].c_str(), anova.c_str());
      os << line;
    }
    os << '\n';
  }
  std::snprintf(line, sizeof line,
                "alpha = %.3g; ANOVA threshold (Bonferroni over %zu measures) = %.4g; pairwise threshold = %.4g\n",
                r.options.alpha, kAllMeasures.size(), r.anova_threshold, r.pair_threshold);
  os << line;
  for (const auto& w : r.warnings) os << "warning: " << w << '\n';
  return os.str();
}

}  // namespace soniguide
