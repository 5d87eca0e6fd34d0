#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sandfire/errors.hpp"
#include "sandfire/fire_records.hpp"
#include "sandfire/histogram.hpp"
#include "sandfire/sandpile.hpp"
#include "sandfire/stats.hpp"
#include "sandfire/text.hpp"
#include "sandfire/version.hpp"

namespace sandfire {

// log10(class max acres) vs log10(mean yearly count) for one category.
// Class A never enters; zero-mean classes are dropped and recorded.
struct LogLogPoints {
  int category = 0;
  std::vector<Point> points;             // x ascending, at most 6 (classes B..G)
  std::vector<FireClass> excluded;       // zero-mean classes only
};

inline LogLogPoints build_log_points(const ClassAverageTable& table, int category) {
  const ClassAverages* found = nullptr;
  for (const ClassAverages& avg : table.categories) {
    if (avg.category == category) {
      found = &avg;
      break;
    }
  }
  if (!found) throw ConfigError("category " + std::to_string(category) + " not in table");

  LogLogPoints out;
  out.category = category;
  for (int c = 0; c < kFireClassCount; ++c) {
    const auto cls = static_cast<FireClass>(c);
    if (excluded_from_fits(cls)) continue;
    const double mean = found->mean_count[static_cast<std::size_t>(c)];
    if (mean <= 0.0) {
      out.excluded.push_back(cls);
      continue;
    }
    out.points.push_back({std::log10(representative_acres(cls)), std::log10(mean)});
  }
  if (out.points.size() < 3) {
    throw InsufficientDataError("category " + std::to_string(category) + " has only " +
                                std::to_string(out.points.size()) +
                                " usable class means (need 3)");
  }
  return out;
}

struct SlopeRiskReport {
  std::vector<int> categories;                         // 1-based ids in order
  std::vector<LogLogPoints> log_points;                // per category
  std::vector<RegressionFit> fits;                     // per category
  std::vector<std::vector<SlopeComparison>> pairwise;  // [i][j] by position; diagonal unused
  std::optional<RegressionFit> slopes_vs_burn_fit;
  std::vector<int> excluded_categories;                // categories left out of that fit
};

// One log-log fit per category plus the full pairwise slope-comparison matrix.
inline SlopeRiskReport fit_categories(const ClassAverageTable& table) {
  SlopeRiskReport report;
  for (const ClassAverages& avg : table.categories) {
    report.categories.push_back(avg.category);
    report.log_points.push_back(build_log_points(table, avg.category));
    report.fits.push_back(ols_fit(report.log_points.back().points));
  }

  const std::size_t k = report.fits.size();
  report.pairwise.assign(k, std::vector<SlopeComparison>(k));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      if (i == j) continue;
      report.pairwise[i][j] = compare_slopes(report.fits[i], report.fits[j]);
    }
  }
  return report;
}

inline SlopeRiskReport fit_all_categories(const FireDataset& dataset,
                                          const CategoryGrouping& grouping) {
  return fit_categories(average_counts(dataset, grouping));
}

// OLS of the per-category slope estimates on the median prescribed-burn
// acreage. Categories in `exclude` or without a median are left out.
inline RegressionFit slopes_vs_burn(const SlopeRiskReport& report,
                                    const std::map<int, double>& category_medians,
                                    const std::set<int>& exclude = {}) {
  std::vector<Point> points;
  for (std::size_t i = 0; i < report.categories.size(); ++i) {
    const int cat = report.categories[i];
    if (exclude.count(cat)) continue;
    auto it = category_medians.find(cat);
    if (it == category_medians.end()) continue;
    points.push_back({it->second, report.fits[i].slope});
  }
  if (points.size() < 3) {
    throw InsufficientDataError("slopes_vs_burn: only " + std::to_string(points.size()) +
                                " categories available (need 3)");
  }
  return ols_fit(points);
}

struct PeriodComparison {
  struct PairTest {
    int category_a = 0;
    int category_b = 0;
    TTestResult test;
  };
  std::vector<PairTest> prescribed_tests;    // pairs where both periods have >= 2 values
  std::vector<PairTest> total_burned_tests;  // same rule, on total burned acres
  std::optional<AnovaResult> total_burned_anova;
};

// Two-sample t on prescribed acres between every pair of periods that both
// recorded it, and a one-way ANOVA on total burned acres across periods.
inline PeriodComparison period_comparison(const FireDataset& dataset,
                                          const CategoryGrouping& grouping,
                                          TTestVariant variant = TTestVariant::Pooled) {
  if (grouping.method != CategoryGrouping::Method::ExplicitPeriods) {
    throw ConfigError("period_comparison requires an explicit-periods grouping");
  }

  std::map<int, const YearRecord*> by_year;
  for (const YearRecord& rec : dataset.records) by_year[rec.year] = &rec;

  std::vector<std::vector<double>> prescribed(static_cast<std::size_t>(grouping.category_count));
  std::vector<std::vector<double>> burned(static_cast<std::size_t>(grouping.category_count));
  std::vector<int> record_count(static_cast<std::size_t>(grouping.category_count), 0);
  for (const auto& [year, cat] : grouping.assignments) {
    const YearRecord* rec = by_year.at(year);
    ++record_count[static_cast<std::size_t>(cat - 1)];
    if (rec->prescribed_acres) prescribed[static_cast<std::size_t>(cat - 1)].push_back(*rec->prescribed_acres);
    if (rec->total_burned_acres) burned[static_cast<std::size_t>(cat - 1)].push_back(*rec->total_burned_acres);
  }
  for (int cat = 1; cat <= grouping.category_count; ++cat) {
    if (record_count[static_cast<std::size_t>(cat - 1)] < 2) {
      const auto& range = grouping.periods[static_cast<std::size_t>(cat - 1)];
      throw InsufficientDataError("period " + std::to_string(cat) + " (" +
                                  std::to_string(range.first) + "-" + std::to_string(range.second) +
                                  ") has fewer than 2 records");
    }
  }

  // Pairs whose statistic is undefined (all values identical) are skipped
  // rather than failing the whole comparison.
  PeriodComparison result;
  auto try_pair = [&](std::vector<PeriodComparison::PairTest>& out, int a, int b,
                      const std::vector<double>& va, const std::vector<double>& vb) {
    if (va.size() < 2 || vb.size() < 2) return;
    try {
      out.push_back({a, b, two_sample_t(va, vb, variant)});
    } catch (const UndefinedStatisticError&) {
    }
  };
  for (int a = 1; a <= grouping.category_count; ++a) {
    for (int b = a + 1; b <= grouping.category_count; ++b) {
      try_pair(result.prescribed_tests, a, b, prescribed[static_cast<std::size_t>(a - 1)],
               prescribed[static_cast<std::size_t>(b - 1)]);
      try_pair(result.total_burned_tests, a, b, burned[static_cast<std::size_t>(a - 1)],
               burned[static_cast<std::size_t>(b - 1)]);
    }
  }

  std::vector<std::vector<double>> anova_groups;
  for (const auto& g : burned) {
    if (g.size() >= 2) anova_groups.push_back(g);
  }
  if (anova_groups.size() >= 2) {
    try {
      result.total_burned_anova = one_way_anova(anova_groups);
    } catch (const UndefinedStatisticError&) {
    }
  }
  return result;
}

struct HistogramFitOptions {
  std::uint64_t min_count = 1;    // bins with fewer hits are skipped
  bool normalize_by_width = true;  // fit count density, recovering the exponent
};

// Log-log line through the histogram: log10(representative) vs
// log10(count / bin width). Width normalization makes the slope estimate the
// power-law exponent; raw counts over geometric bins would flatten it by one.
inline RegressionFit fit_histogram(const std::vector<HistogramBin>& bins,
                                   const HistogramFitOptions& options = {}) {
  std::vector<Point> points;
  for (const HistogramBin& bin : bins) {
    if (bin.count == 0 || bin.count < options.min_count) continue;
    const double y = options.normalize_by_width
                         ? static_cast<double>(bin.count) / (bin.upper - bin.lower)
                         : static_cast<double>(bin.count);
    points.push_back({std::log10(bin.representative), std::log10(y)});
  }
  if (points.size() < 3) {
    throw InsufficientDataError("histogram fit: only " + std::to_string(points.size()) +
                                " usable bins (need 3)");
  }
  return ols_fit(points);
}

inline RegressionFit analyze_event_sizes(const std::vector<AvalancheEvent>& events,
                                         const Binning& binning,
                                         const HistogramFitOptions& options = {}) {
  std::vector<std::uint64_t> sizes;
  sizes.reserve(events.size());
  for (const AvalancheEvent& ev : events) {
    if (ev.topplings > 0) sizes.push_back(ev.topplings);
  }
  if (sizes.size() < 100) {
    throw InsufficientDataError("run has " + std::to_string(sizes.size()) +
                                " nonzero events; at least 100 required");
  }
  return fit_histogram(histogram_sizes(sizes, binning), options);
}

// Applies the fire-data slope pipeline to simulated avalanches.
inline RegressionFit analyze_simulation(const SimulationRun& run, const Binning& binning,
                                        const HistogramFitOptions& options = {}) {
  return analyze_event_sizes(run.events, binning, options);
}

// ---- CSV emission ---------------------------------------------------------

struct EmitOptions {
  bool banner = true;
  std::uint64_t input_digest = 0;
};

namespace detail {

inline void append_banner(std::string& out, const EmitOptions& options) {
  if (!options.banner) return;
  out += "# sandfire ";
  out += kVersion;
  out += " input_digest=";
  out += hex16(options.input_digest);
  out += '\n';
}

}  // namespace detail

inline std::string render_table1_csv(const ClassAverageTable& table, const EmitOptions& options) {
  std::string out;
  detail::append_banner(out, options);
  out += "category,years,class_a,class_b,class_c,class_d,class_e,class_f,class_g\n";
  for (const ClassAverages& avg : table.categories) {
    out += std::to_string(avg.category);
    out += ',';
    out += std::to_string(avg.year_count);
    for (double m : avg.mean_count) {
      out += ',';
      out += format_double(m);
    }
    out += '\n';
  }
  return out;
}

inline std::string render_table2_csv(const SlopeRiskReport& report, const EmitOptions& options) {
  std::string out;
  detail::append_banner(out, options);
  out += "category,n_points,slope,intercept,se_slope,se_intercept,r_squared,t_stat,p_two_sided,"
         "excluded_classes\n";
  for (std::size_t i = 0; i < report.categories.size(); ++i) {
    const RegressionFit& fit = report.fits[i];
    out += std::to_string(report.categories[i]);
    out += ',' + std::to_string(fit.n);
    out += ',' + format_double(fit.slope);
    out += ',' + format_double(fit.intercept);
    out += ',' + format_double(fit.se_slope);
    out += ',' + format_double(fit.se_intercept);
    out += ',' + format_double(fit.r_squared);
    out += ',' + format_double(fit.t_stat);
    out += ',' + format_double(fit.p_two_sided);
    out += ',';
    for (FireClass c : report.log_points[i].excluded) out += class_label(c);
    out += '\n';
  }
  return out;
}

// Mirrors the published table layout: slopes on the diagonal, one-sided
// p-values above it, significance marks (p < 0.1) below.
inline std::string render_table3_csv(const SlopeRiskReport& report, const EmitOptions& options) {
  std::string out;
  detail::append_banner(out, options);
  out += "category";
  for (int cat : report.categories) out += ",cat_" + std::to_string(cat);
  out += '\n';
  for (std::size_t i = 0; i < report.categories.size(); ++i) {
    out += std::to_string(report.categories[i]);
    for (std::size_t j = 0; j < report.categories.size(); ++j) {
      out += ',';
      if (i == j) {
        out += format_double(report.fits[i].slope);
      } else if (i < j) {
        out += format_double(report.pairwise[i][j].p_one_sided);
      } else {
        out += report.pairwise[j][i].p_one_sided < 0.1 ? '*' : '-';
      }
    }
    out += '\n';
  }
  return out;
}

inline std::string render_fig2f_csv(const SlopeRiskReport& report,
                                    const std::map<int, double>& category_medians,
                                    const EmitOptions& options) {
  if (!report.slopes_vs_burn_fit) {
    throw ConfigError("fig2f rendering requires the slopes-vs-burn fit");
  }
  const RegressionFit& fit = *report.slopes_vs_burn_fit;
  std::string out;
  detail::append_banner(out, options);
  out += "category,median_prescribed_acres,slope,included,fitted_slope\n";
  for (std::size_t i = 0; i < report.categories.size(); ++i) {
    const int cat = report.categories[i];
    auto it = category_medians.find(cat);
    if (it == category_medians.end()) continue;
    const bool included =
        std::find(report.excluded_categories.begin(), report.excluded_categories.end(), cat) ==
        report.excluded_categories.end();
    out += std::to_string(cat);
    out += ',' + format_double(it->second);
    out += ',' + format_double(report.fits[i].slope);
    out += included ? ",1" : ",0";
    out += ',' + format_double(fit.intercept + fit.slope * it->second);
    out += '\n';
  }
  return out;
}

inline std::string render_fig_points_csv(const SlopeRiskReport& report, int category,
                                         const EmitOptions& options) {
  std::size_t idx = report.categories.size();
  for (std::size_t i = 0; i < report.categories.size(); ++i) {
    if (report.categories[i] == category) {
      idx = i;
      break;
    }
  }
  if (idx == report.categories.size()) {
    throw ConfigError("category " + std::to_string(category) + " not in report");
  }
  const RegressionFit& fit = report.fits[idx];
  std::string out;
  detail::append_banner(out, options);
  out += "log10_size_acres,log10_mean_count,fitted_log10_count\n";
  for (const Point& p : report.log_points[idx].points) {
    out += format_double(p.x);
    out += ',' + format_double(p.y);
    out += ',' + format_double(fit.intercept + fit.slope * p.x);
    out += '\n';
  }
  return out;
}

inline std::string render_period_tests_csv(const PeriodComparison& cmp,
                                           const EmitOptions& options) {
  std::string out;
  detail::append_banner(out, options);
  out += "test,period_a,period_b,statistic,df,p\n";
  for (const auto& pt : cmp.prescribed_tests) {
    out += "prescribed_t," + std::to_string(pt.category_a) + ',' + std::to_string(pt.category_b);
    out += ',' + format_double(pt.test.t);
    out += ',' + format_double(pt.test.df);
    out += ',' + format_double(pt.test.p_two_sided);
    out += '\n';
  }
  for (const auto& pt : cmp.total_burned_tests) {
    out += "total_burned_t," + std::to_string(pt.category_a) + ',' + std::to_string(pt.category_b);
    out += ',' + format_double(pt.test.t);
    out += ',' + format_double(pt.test.df);
    out += ',' + format_double(pt.test.p_two_sided);
    out += '\n';
  }
  if (cmp.total_burned_anova) {
    const AnovaResult& a = *cmp.total_burned_anova;
    out += "total_burned_anova,,," + format_double(a.f);
    out += ',' + std::to_string(a.df_between) + '/' + std::to_string(a.df_within);
    out += ',' + format_double(a.p);
    out += '\n';
  }
  return out;
}

}  // namespace sandfire
