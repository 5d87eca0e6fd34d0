#pragma once

#include <array>

#include "sandfire/fire_records.hpp"

namespace sandfire {

// Florida 1993-2019 wildfire class-count means by prescribed-burn quintile,
// plus the published fit metrics for the same analysis. Embedded so the
// `reproduce` command needs no external data.

inline ClassAverageTable florida_quintile_table() {
  // mean yearly fire counts, classes A..G
  static constexpr std::array<std::array<double, kFireClassCount>, 5> kMeans = {{
      {1145.17, 2572.67, 795.83, 109.50, 61.83, 23.17, 10.50},
      {680.00, 1621.60, 449.60, 46.80, 20.40, 7.20, 1.20},
      {986.60, 2381.20, 734.40, 97.20, 41.60, 13.80, 4.40},
      {764.80, 1964.40, 592.80, 73.80, 30.60, 10.20, 2.20},
      {534.00, 1392.50, 357.50, 36.83, 17.33, 5.33, 2.33},
  }};
  static constexpr std::array<int, 5> kYearCounts = {6, 5, 5, 5, 6};

  ClassAverageTable table;
  for (int q = 0; q < 5; ++q) {
    ClassAverages avg;
    avg.category = q + 1;
    avg.year_count = kYearCounts[static_cast<std::size_t>(q)];
    avg.mean_count = kMeans[static_cast<std::size_t>(q)];
    table.categories.push_back(avg);
  }
  return table;
}

struct ReferenceFit {
  double slope = 0.0;
  double se_slope = 0.0;
  double p = 0.0;
  double r_squared = 0.0;
};

// Published per-quintile fit metrics (slope, SE, two-sided p, R^2).
inline constexpr std::array<ReferenceFit, 5> kFloridaReferenceFits = {{
    {-0.8060, 0.0714, 0.00035, 0.9696},
    {-1.0139, 0.1034, 0.00061, 0.9601},
    {-0.9152, 0.0769, 0.00029, 0.9726},
    {-0.9687, 0.0904, 0.00043, 0.9663},
    {-0.9448, 0.0803, 0.00030, 0.9719},
}};

struct ReferencePairP {
  int category_a = 0;
  int category_b = 0;
  double p_one_sided = 0.0;
};

// Published pairwise one-sided p-values (df = 8).
inline constexpr std::array<ReferencePairP, 10> kFloridaReferencePairwiseP = {{
    {1, 2, 0.0683},
    {1, 3, 0.1641},
    {1, 4, 0.0978},
    {1, 5, 0.1163},
    {2, 3, 0.2329},
    {2, 4, 0.3754},
    {2, 5, 0.3061},
    {3, 4, 0.3321},
    {3, 5, 0.3984},
    {4, 5, 0.4241},
}};

// Reproduction tolerances; generous enough to absorb the fixture's 2-decimal
// rounding of the class means.
inline constexpr double kSlopeTolerance = 0.01;
inline constexpr double kSeTolerance = 0.003;
inline constexpr double kR2Tolerance = 0.005;
inline constexpr double kPairwisePTolerance = 0.003;

}  // namespace sandfire
