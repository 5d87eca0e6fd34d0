#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "sandfire/errors.hpp"
#include "sandfire/sandpile.hpp"

namespace sandfire {

struct HistogramBin {
  double lower = 0.0;  // inclusive
  double upper = 0.0;  // exclusive
  double representative = 0.0;  // geometric mean of the edges
  std::uint64_t count = 0;
};

// Geometric edges 1, r, r^2, ... covering [1, max size].
struct LogBinning {
  double ratio = 2.0;
};

// Caller-supplied ascending edges; values outside the span are dropped.
struct ExplicitEdges {
  std::vector<double> edges;
};

using Binning = std::variant<LogBinning, ExplicitEdges>;

namespace detail {

inline std::vector<HistogramBin> make_bins(const std::vector<double>& edges) {
  std::vector<HistogramBin> bins;
  bins.reserve(edges.size() - 1);
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    bins.push_back({edges[i], edges[i + 1], std::sqrt(edges[i] * edges[i + 1]), 0});
  }
  return bins;
}

}  // namespace detail

// Histogram of positive sizes. Geometric binning starts at 1 and extends one
// ratio past the largest observed size, so every size lands in a bin.
inline std::vector<HistogramBin> histogram_sizes(std::span<const std::uint64_t> sizes,
                                                 const Binning& binning) {
  std::vector<double> edges;
  if (const auto* log_bins = std::get_if<LogBinning>(&binning)) {
    if (!(log_bins->ratio > 1.0)) throw ConfigError("log binning ratio must be > 1");
    if (sizes.empty()) return {};
    std::uint64_t max_size = 1;
    for (std::uint64_t s : sizes) max_size = std::max(max_size, s);
    edges.push_back(1.0);
    while (edges.back() <= static_cast<double>(max_size)) {
      edges.push_back(edges.back() * log_bins->ratio);
    }
  } else {
    edges = std::get<ExplicitEdges>(binning).edges;
    if (edges.size() < 2) throw ConfigError("explicit binning needs at least 2 edges");
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
      if (!(edges[i] < edges[i + 1])) throw ConfigError("explicit bin edges must be ascending");
    }
    if (sizes.empty()) return {};
  }

  std::vector<HistogramBin> bins = detail::make_bins(edges);
  for (std::uint64_t s : sizes) {
    const double v = static_cast<double>(s);
    if (v < edges.front() || v >= edges.back()) continue;
    // last edge index with edge <= v
    std::size_t lo = 0, hi = edges.size() - 1;
    while (lo + 1 < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (edges[mid] <= v) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    ++bins[lo].count;
  }
  return bins;
}

// Avalanche-size histogram of a run. Events with zero topplings are excluded;
// the remaining counts sum to the number of nonzero events.
inline std::vector<HistogramBin> size_distribution(const SimulationRun& run,
                                                   const Binning& binning) {
  std::vector<std::uint64_t> sizes;
  sizes.reserve(run.events.size());
  for (const AvalancheEvent& ev : run.events) {
    if (ev.topplings > 0) sizes.push_back(ev.topplings);
  }
  return histogram_sizes(sizes, binning);
}

}  // namespace sandfire
