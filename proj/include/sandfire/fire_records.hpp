#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "sandfire/errors.hpp"
#include "sandfire/text.hpp"

namespace sandfire {

// Federal wildfire size classes. Each class is represented by its maximum
// acreage; open-ended class G is capped at 10,000 acres. Class A is kept in
// the data but excluded from log-log fits because small fires are heavily
// underreported.
enum class FireClass : int { A = 0, B, C, D, E, F, G };

inline constexpr int kFireClassCount = 7;
inline constexpr std::array<double, kFireClassCount> kClassRepresentativeAcres = {
    0.24, 9.9, 99.0, 299.0, 999.0, 4999.0, 10000.0};

constexpr double representative_acres(FireClass c) {
  return kClassRepresentativeAcres[static_cast<int>(c)];
}

constexpr bool excluded_from_fits(FireClass c) { return c == FireClass::A; }

constexpr char class_label(FireClass c) { return static_cast<char>('A' + static_cast<int>(c)); }

struct YearRecord {
  int year = 0;
  std::array<std::int64_t, kFireClassCount> counts{};  // A..G
  std::optional<double> prescribed_acres;
  std::optional<double> total_burned_acres;
};

struct FireDataset {
  std::string state_label;
  std::vector<YearRecord> records;  // sorted by year, years unique
};

inline constexpr std::string_view kDatasetHeader =
    "year,class_a,class_b,class_c,class_d,class_e,class_f,class_g,"
    "total_burned_acres,prescribed_acres";

// Parses the CSV schema above. Rows may arrive in any order; the dataset is
// sorted by year. The two acreage columns may be empty, meaning "not
// recorded" (never zero).
inline FireDataset parse_dataset(std::string_view csv, std::string state_label = "") {
  FireDataset dataset;
  dataset.state_label = std::move(state_label);

  std::vector<std::string_view> lines = split(csv, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty() || lines[0] != kDatasetHeader) {
    throw ParseError("row 1: header must be exactly '" + std::string(kDatasetHeader) + "'");
  }

  static constexpr std::array<std::string_view, 10> kColumns = {
      "year",    "class_a", "class_b", "class_c",            "class_d",
      "class_e", "class_f", "class_g", "total_burned_acres", "prescribed_acres"};

  std::set<int> seen_years;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const std::string row_name = "row " + std::to_string(li + 1);
    const std::string_view line = lines[li];
    if (line.empty()) continue;

    const auto fields = split(line, ',');
    if (fields.size() != kColumns.size()) {
      throw ParseError(row_name + ": expected " + std::to_string(kColumns.size()) +
                       " fields, found " + std::to_string(fields.size()));
    }

    YearRecord rec;
    rec.year = parse_number<int>(fields[0], row_name + ", column year");
    if (!seen_years.insert(rec.year).second) {
      throw ParseError(row_name + ": duplicate year " + std::to_string(rec.year));
    }
    for (int c = 0; c < kFireClassCount; ++c) {
      const std::string where = row_name + ", column " + std::string(kColumns[c + 1]);
      const auto count = parse_number<std::int64_t>(fields[static_cast<std::size_t>(c + 1)], where);
      if (count < 0) throw ParseError(where + ": negative count " + std::to_string(count));
      rec.counts[static_cast<std::size_t>(c)] = count;
    }
    auto parse_acres = [&](std::string_view field, std::string_view column) -> std::optional<double> {
      if (field.empty()) return std::nullopt;
      const std::string where = row_name + ", column " + std::string(column);
      const double v = parse_number<double>(field, where);
      if (v < 0.0) throw ParseError(where + ": negative acreage " + format_double(v));
      return v;
    };
    rec.total_burned_acres = parse_acres(fields[8], kColumns[8]);
    rec.prescribed_acres = parse_acres(fields[9], kColumns[9]);
    dataset.records.push_back(rec);
  }

  if (dataset.records.empty()) throw ParseError("dataset has no records");
  std::sort(dataset.records.begin(), dataset.records.end(),
            [](const YearRecord& a, const YearRecord& b) { return a.year < b.year; });
  return dataset;
}

inline std::string write_dataset(const FireDataset& dataset) {
  std::string out{kDatasetHeader};
  out += '\n';
  for (const YearRecord& rec : dataset.records) {
    out += std::to_string(rec.year);
    for (std::int64_t c : rec.counts) {
      out += ',';
      out += std::to_string(c);
    }
    out += ',';
    if (rec.total_burned_acres) out += format_double(*rec.total_burned_acres);
    out += ',';
    if (rec.prescribed_acres) out += format_double(*rec.prescribed_acres);
    out += '\n';
  }
  return out;
}

inline FireDataset load_dataset(const std::filesystem::path& path, std::string state_label = "") {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (state_label.empty()) state_label = path.stem().string();
  return parse_dataset(buf.str(), std::move(state_label));
}

// Year partition used by the analyses. Categories are 1-based, matching the
// quintile numbering used in reports.
struct CategoryGrouping {
  enum class Method { Quantile, ExplicitPeriods, AllYears };
  Method method = Method::AllYears;
  int category_count = 0;
  std::map<int, int> assignments;          // year -> category (1-based)
  std::map<int, double> category_medians;  // category -> median prescribed acres
  std::vector<std::pair<int, int>> periods;  // ExplicitPeriods only, inclusive year ranges

  std::vector<int> years_in(int category) const {
    std::vector<int> years;
    for (const auto& [year, cat] : assignments) {
      if (cat == category) years.push_back(year);
    }
    return years;
  }
};

// Splits n into `groups` quantile sizes. The remainder goes one extra year to
// the outermost groups first: group 1, then group g, then 2, then g-1, ...
inline std::vector<int> quantile_group_sizes(int n, int groups) {
  std::vector<int> sizes(static_cast<std::size_t>(groups), n / groups);
  std::vector<int> extra_order;
  int lo = 0, hi = groups - 1;
  while (lo <= hi) {
    extra_order.push_back(lo);
    if (hi != lo) extra_order.push_back(hi);
    ++lo;
    --hi;
  }
  for (int i = 0; i < n % groups; ++i) ++sizes[static_cast<std::size_t>(extra_order[static_cast<std::size_t>(i)])];
  return sizes;
}

// Groups years into `group_count` categories by ascending prescribed-burn
// acreage. Ties keep year order (records are year-sorted and the sort is
// stable), so the grouping does not depend on input row order.
inline CategoryGrouping assign_quantiles(const FireDataset& dataset, int group_count) {
  if (group_count < 2) throw ConfigError("quantile grouping needs at least 2 groups");

  std::vector<int> missing;
  for (const YearRecord& rec : dataset.records) {
    if (!rec.prescribed_acres) missing.push_back(rec.year);
  }
  if (!missing.empty()) {
    std::string msg = "years missing prescribed_acres:";
    for (int y : missing) msg += " " + std::to_string(y);
    throw ConfigError(msg);
  }

  const int n = static_cast<int>(dataset.records.size());
  if (n < group_count) {
    throw InsufficientDataError("cannot split " + std::to_string(n) + " years into " +
                                std::to_string(group_count) + " groups");
  }

  std::vector<const YearRecord*> order;
  order.reserve(dataset.records.size());
  for (const YearRecord& rec : dataset.records) order.push_back(&rec);
  std::stable_sort(order.begin(), order.end(), [](const YearRecord* a, const YearRecord* b) {
    return *a->prescribed_acres < *b->prescribed_acres;
  });

  CategoryGrouping grouping;
  grouping.method = CategoryGrouping::Method::Quantile;
  grouping.category_count = group_count;

  const std::vector<int> sizes = quantile_group_sizes(n, group_count);
  std::size_t pos = 0;
  for (int cat = 1; cat <= group_count; ++cat) {
    const int size = sizes[static_cast<std::size_t>(cat - 1)];
    std::vector<double> acres;
    for (int i = 0; i < size; ++i, ++pos) {
      grouping.assignments[order[pos]->year] = cat;
      acres.push_back(*order[pos]->prescribed_acres);
    }
    // acres is ascending by construction
    const std::size_t mid = acres.size() / 2;
    grouping.category_medians[cat] =
        acres.size() % 2 == 1 ? acres[mid] : 0.5 * (acres[mid - 1] + acres[mid]);
  }
  return grouping;
}

inline CategoryGrouping assign_periods(const FireDataset& dataset,
                                       const std::vector<std::pair<int, int>>& ranges) {
  if (ranges.size() < 1) throw ConfigError("period grouping needs at least 1 range");
  for (const auto& [start, end] : ranges) {
    if (start > end) {
      throw ConfigError("period " + std::to_string(start) + "-" + std::to_string(end) +
                        " is reversed");
    }
  }
  for (std::size_t i = 0; i < ranges.size(); ++i) {
    for (std::size_t j = i + 1; j < ranges.size(); ++j) {
      if (ranges[i].first <= ranges[j].second && ranges[j].first <= ranges[i].second) {
        throw ConfigError("periods overlap; years must belong to exactly one period");
      }
    }
  }

  CategoryGrouping grouping;
  grouping.method = CategoryGrouping::Method::ExplicitPeriods;
  grouping.category_count = static_cast<int>(ranges.size());
  grouping.periods = ranges;

  for (const YearRecord& rec : dataset.records) {
    for (std::size_t i = 0; i < ranges.size(); ++i) {
      if (rec.year >= ranges[i].first && rec.year <= ranges[i].second) {
        grouping.assignments[rec.year] = static_cast<int>(i) + 1;
        break;
      }
    }
  }

  for (int cat = 1; cat <= grouping.category_count; ++cat) {
    std::vector<double> acres;
    for (const YearRecord& rec : dataset.records) {
      auto it = grouping.assignments.find(rec.year);
      if (it != grouping.assignments.end() && it->second == cat && rec.prescribed_acres) {
        acres.push_back(*rec.prescribed_acres);
      }
    }
    if (acres.empty()) continue;
    std::sort(acres.begin(), acres.end());
    const std::size_t mid = acres.size() / 2;
    grouping.category_medians[cat] =
        acres.size() % 2 == 1 ? acres[mid] : 0.5 * (acres[mid - 1] + acres[mid]);
  }
  return grouping;
}

inline CategoryGrouping assign_all_years(const FireDataset& dataset) {
  CategoryGrouping grouping;
  grouping.method = CategoryGrouping::Method::AllYears;
  grouping.category_count = 1;
  std::vector<double> acres;
  for (const YearRecord& rec : dataset.records) {
    grouping.assignments[rec.year] = 1;
    if (rec.prescribed_acres) acres.push_back(*rec.prescribed_acres);
  }
  if (!acres.empty()) {
    std::sort(acres.begin(), acres.end());
    const std::size_t mid = acres.size() / 2;
    grouping.category_medians[1] =
        acres.size() % 2 == 1 ? acres[mid] : 0.5 * (acres[mid - 1] + acres[mid]);
  }
  return grouping;
}

struct ClassAverages {
  int category = 0;  // 1-based
  int year_count = 0;
  std::array<double, kFireClassCount> mean_count{};  // A..G
};

struct ClassAverageTable {
  std::vector<ClassAverages> categories;  // ordered by category
};

// Arithmetic mean of the raw class counts within each category. Class A is
// averaged like the rest; it is only dropped later, at fit time.
inline ClassAverageTable average_counts(const FireDataset& dataset,
                                        const CategoryGrouping& grouping) {
  ClassAverageTable table;
  std::map<int, const YearRecord*> by_year;
  for (const YearRecord& rec : dataset.records) by_year[rec.year] = &rec;

  for (int cat = 1; cat <= grouping.category_count; ++cat) {
    ClassAverages avg;
    avg.category = cat;
    for (const auto& [year, assigned] : grouping.assignments) {
      if (assigned != cat) continue;
      auto it = by_year.find(year);
      if (it == by_year.end()) continue;
      ++avg.year_count;
      for (int c = 0; c < kFireClassCount; ++c) {
        avg.mean_count[static_cast<std::size_t>(c)] +=
            static_cast<double>(it->second->counts[static_cast<std::size_t>(c)]);
      }
    }
    if (avg.year_count == 0) {
      throw InsufficientDataError("category " + std::to_string(cat) + " has no years");
    }
    for (double& m : avg.mean_count) m /= avg.year_count;
    table.categories.push_back(avg);
  }
  return table;
}

}  // namespace sandfire
