#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "sandfire/errors.hpp"
#include "sandfire/prng.hpp"
#include "sandfire/text.hpp"

namespace sandfire {

struct Site {
  int row = 0;
  int col = 0;
  friend bool operator==(const Site&, const Site&) = default;
};

struct DepositionPolicy {
  enum class Kind { UniformRandom, MaxIntent, MinIntent, FixedSite };
  Kind kind = Kind::UniformRandom;
  Site site{};  // FixedSite only

  static DepositionPolicy uniform_random() { return {Kind::UniformRandom, {}}; }
  static DepositionPolicy max_intent() { return {Kind::MaxIntent, {}}; }
  static DepositionPolicy min_intent() { return {Kind::MinIntent, {}}; }
  static DepositionPolicy fixed_site(Site s) { return {Kind::FixedSite, s}; }
};

struct InterventionPolicy {
  enum class Kind { None, PeriodicRemoval };
  Kind kind = Kind::None;
  std::uint64_t period = 0;           // deposits between removals (warmup deposits count)
  double top_fraction = 0.0;          // fraction of most-loaded cells targeted, (0, 1]
  int grains_removed_per_cell = 0;

  static InterventionPolicy none() { return {}; }
  static InterventionPolicy periodic_removal(std::uint64_t period, double top_fraction,
                                             int grains_per_cell) {
    return {Kind::PeriodicRemoval, period, top_fraction, grains_per_cell};
  }
};

// "policy" / "intervention" flag spellings, also used in the run JSON header.
std::string to_string(const DepositionPolicy& p);
DepositionPolicy parse_deposition_policy(std::string_view text);
std::string to_string(const InterventionPolicy& p);
InterventionPolicy parse_intervention_policy(std::string_view text);

struct LatticeConfig {
  int width = 50;
  int height = 50;
  int threshold = 4;
  std::uint64_t seed = 1;
  std::uint64_t warmup_deposits = 25000;  // default_warmup(50, 50)
  std::uint64_t measured_deposits = 200000;
  DepositionPolicy deposition{};
  InterventionPolicy intervention{};

  void validate() const;
};

// 10 deposits per cell; empirically past the stationary-density transient.
inline std::uint64_t default_warmup(int width, int height) {
  return 10ull * static_cast<std::uint64_t>(width) * static_cast<std::uint64_t>(height);
}

// Largest von Neumann in-grid degree on a width x height grid.
inline int max_neighbor_degree(int width, int height) {
  auto axis = [](int n) { return n >= 3 ? 2 : n - 1; };
  return axis(width) + axis(height);
}

inline void LatticeConfig::validate() const {
  if (width < 1 || height < 1) throw ConfigError("lattice dimensions must be >= 1");
  if (threshold < 1) throw ConfigError("threshold must be >= 1");
  if (threshold < max_neighbor_degree(width, height)) {
    // A toppling sheds `threshold` grains but hands one to each in-grid
    // neighbor, so below the maximum degree a cascade can feed itself forever.
    throw ConfigError("threshold " + std::to_string(threshold) +
                      " is below the lattice neighbor degree " +
                      std::to_string(max_neighbor_degree(width, height)) +
                      "; relaxation would not be guaranteed to terminate");
  }
  if (measured_deposits < 1) throw ConfigError("measured_deposits must be >= 1");
  if (deposition.kind == DepositionPolicy::Kind::FixedSite) {
    const Site s = deposition.site;
    if (s.row < 0 || s.row >= height || s.col < 0 || s.col >= width) {
      throw ConfigError("fixed deposition site (" + std::to_string(s.row) + "," +
                        std::to_string(s.col) + ") is outside the lattice");
    }
  }
  if (intervention.kind == InterventionPolicy::Kind::PeriodicRemoval) {
    if (intervention.period < 1) throw ConfigError("intervention period must be >= 1");
    if (!(intervention.top_fraction > 0.0 && intervention.top_fraction <= 1.0)) {
      throw ConfigError("intervention top_fraction must be in (0, 1]");
    }
    if (intervention.grains_removed_per_cell < 1) {
      throw ConfigError("intervention grains_removed_per_cell must be >= 1");
    }
  }
}

struct Lattice {
  int width = 0;
  int height = 0;
  std::vector<std::int32_t> grains;  // row-major height x width
  std::uint64_t total_deposited = 0;
  std::uint64_t total_dissipated = 0;
  std::uint64_t total_removed = 0;

  Lattice(int w, int h) : width(w), height(h), grains(static_cast<std::size_t>(w) * h, 0) {
    if (w < 1 || h < 1) throw ConfigError("lattice dimensions must be >= 1");
  }

  // Adopts an existing grain configuration; the grains count as deposited so
  // the conservation identity starts out satisfied.
  static Lattice from_grains(int w, int h, std::vector<std::int32_t> g) {
    Lattice lat(w, h);
    if (g.size() != lat.grains.size()) throw ConfigError("grain array does not match dimensions");
    lat.grains = std::move(g);
    lat.total_deposited = static_cast<std::uint64_t>(lat.grain_total());
    return lat;
  }

  int cells() const { return width * height; }
  int index(Site s) const { return s.row * width + s.col; }
  Site site(int idx) const { return {idx / width, idx % width}; }
  bool in_bounds(Site s) const {
    return s.row >= 0 && s.row < height && s.col >= 0 && s.col < width;
  }
  std::int32_t at(Site s) const { return grains[static_cast<std::size_t>(index(s))]; }

  void deposit(Site s) {
    ++grains[static_cast<std::size_t>(index(s))];
    ++total_deposited;
  }

  std::int64_t grain_total() const {
    return std::accumulate(grains.begin(), grains.end(), std::int64_t{0});
  }

  // total deposited == grains on lattice + dissipated + removed, exactly.
  bool conserves_grains() const {
    return total_deposited ==
           static_cast<std::uint64_t>(grain_total()) + total_dissipated + total_removed;
  }

  bool stable_under(int threshold) const {
    return std::all_of(grains.begin(), grains.end(),
                       [threshold](std::int32_t g) { return g < threshold; });
  }
};

struct AvalancheEvent {
  std::uint64_t topplings = 0;   // every individual cell-toppling, repeats included
  std::uint64_t area = 0;        // distinct cells toppled
  std::uint64_t dissipated = 0;  // grains lost off-lattice during the cascade
  friend bool operator==(const AvalancheEvent&, const AvalancheEvent&) = default;
};

// Reusable buffers for the hot relaxation loop.
struct RelaxScratch {
  std::vector<int> pending;
  std::vector<std::uint64_t> stamp;
  std::uint64_t event_id = 0;
};

namespace detail {

// Relaxes whatever is already queued in scratch.pending. Every cell at or
// above threshold must be queued on entry.
inline AvalancheEvent relax_pending(Lattice& lattice, int threshold, RelaxScratch& scratch) {
  const int w = lattice.width;
  const int h = lattice.height;
  auto& grains = lattice.grains;

  const std::uint64_t id = ++scratch.event_id;
  auto& pending = scratch.pending;

  AvalancheEvent ev;
  while (!pending.empty()) {
    const int idx = pending.back();
    pending.pop_back();
    if (grains[static_cast<std::size_t>(idx)] < threshold) continue;

    grains[static_cast<std::size_t>(idx)] -= threshold;
    ++ev.topplings;
    if (scratch.stamp[static_cast<std::size_t>(idx)] != id) {
      scratch.stamp[static_cast<std::size_t>(idx)] = id;
      ++ev.area;
    }

    int shed = 0;
    const int row = idx / w;
    const int col = idx % w;
    const int nbrs[4] = {row > 0 ? idx - w : -1, row + 1 < h ? idx + w : -1,
                         col > 0 ? idx - 1 : -1, col + 1 < w ? idx + 1 : -1};
    for (int nb : nbrs) {
      if (nb < 0) continue;
      ++shed;
      if (++grains[static_cast<std::size_t>(nb)] == threshold) pending.push_back(nb);
    }
    // Grains not handed to an in-grid neighbor leave the system. For the
    // standard threshold 4 this is exactly the off-edge loss.
    ev.dissipated += static_cast<std::uint64_t>(threshold - shed);
    if (grains[static_cast<std::size_t>(idx)] >= threshold) pending.push_back(idx);
  }

  lattice.total_dissipated += ev.dissipated;
  return ev;
}

inline void reset_scratch(const Lattice& lattice, RelaxScratch& scratch) {
  if (scratch.stamp.size() != lattice.grains.size()) {
    scratch.stamp.assign(lattice.grains.size(), 0);
    scratch.event_id = 0;
  }
  scratch.pending.clear();
}

}  // namespace detail

// Topples every cell at or above threshold until the lattice is stable.
// Each toppling subtracts `threshold` grains and hands one grain to each of
// the 4 von Neumann neighbors; grains crossing the boundary are dissipated.
inline AvalancheEvent stabilize(Lattice& lattice, int threshold, RelaxScratch& scratch) {
  detail::reset_scratch(lattice, scratch);
  for (int i = 0; i < lattice.cells(); ++i) {
    if (lattice.grains[static_cast<std::size_t>(i)] >= threshold) scratch.pending.push_back(i);
  }
  return detail::relax_pending(lattice, threshold, scratch);
}

inline AvalancheEvent stabilize(Lattice& lattice, const LatticeConfig& config) {
  RelaxScratch scratch;
  return stabilize(lattice, config.threshold, scratch);
}

// Picks the deposit target. Max/min ties break to the lowest row-major index.
inline Site choose_site(const Lattice& lattice, const DepositionPolicy& policy, SplitMix64& rng) {
  switch (policy.kind) {
    case DepositionPolicy::Kind::UniformRandom: {
      const int idx = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(lattice.cells())));
      return lattice.site(idx);
    }
    case DepositionPolicy::Kind::MaxIntent: {
      int best = 0;
      for (int i = 1; i < lattice.cells(); ++i) {
        if (lattice.grains[static_cast<std::size_t>(i)] >
            lattice.grains[static_cast<std::size_t>(best)]) {
          best = i;
        }
      }
      return lattice.site(best);
    }
    case DepositionPolicy::Kind::MinIntent: {
      int best = 0;
      for (int i = 1; i < lattice.cells(); ++i) {
        if (lattice.grains[static_cast<std::size_t>(i)] <
            lattice.grains[static_cast<std::size_t>(best)]) {
          best = i;
        }
      }
      return lattice.site(best);
    }
    case DepositionPolicy::Kind::FixedSite:
      if (!lattice.in_bounds(policy.site)) {
        throw ConfigError("fixed deposition site is outside the lattice");
      }
      return policy.site;
  }
  throw ConfigError("unknown deposition policy");
}

// Removes grains from the most-loaded cells without triggering topplings.
// Targets ceil(top_fraction * cells) cells, ties broken by lowest row-major
// index; each loses at most grains_removed_per_cell, clamped at zero.
inline std::uint64_t apply_intervention(Lattice& lattice, const InterventionPolicy& policy) {
  if (policy.kind == InterventionPolicy::Kind::None) return 0;

  const int n = lattice.cells();
  const double raw = policy.top_fraction * n;
  // Values within 1e-9 of an integer count as that integer, so e.g. 0.1 * 30
  // targets 3 cells rather than 4.
  const double rounded = std::nearbyint(raw);
  const int k = std::clamp(
      static_cast<int>(std::fabs(raw - rounded) < 1e-9 ? rounded : std::ceil(raw)), 1, n);

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](int a, int b) {
    const auto ga = lattice.grains[static_cast<std::size_t>(a)];
    const auto gb = lattice.grains[static_cast<std::size_t>(b)];
    return ga != gb ? ga > gb : a < b;
  });

  std::uint64_t removed = 0;
  for (int i = 0; i < k; ++i) {
    auto& g = lattice.grains[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
    const std::int32_t take = std::min(g, policy.grains_removed_per_cell);
    g -= take;
    removed += static_cast<std::uint64_t>(take);
  }
  lattice.total_removed += removed;
  return removed;
}

struct RunTotals {
  std::uint64_t deposited = 0;
  std::uint64_t dissipated = 0;
  std::uint64_t removed = 0;
  std::uint64_t remaining_grains = 0;
};

struct SimulationRun {
  LatticeConfig config{};
  std::vector<AvalancheEvent> events;  // one per measured deposit
  std::uint64_t final_checksum = 0;
  RunTotals totals{};
};

inline std::uint64_t lattice_checksum(const Lattice& lattice) {
  std::uint64_t h = kFnv1aOffset;
  h = fnv1a_u64(h, static_cast<std::uint64_t>(lattice.width));
  h = fnv1a_u64(h, static_cast<std::uint64_t>(lattice.height));
  for (std::int32_t g : lattice.grains) h = fnv1a_u64(h, static_cast<std::uint64_t>(g));
  return h;
}

// Drives the full deposit -> relax -> intervene loop from an empty lattice.
// Only post-warmup avalanches are recorded. Deterministic given the config.
inline SimulationRun run_simulation(const LatticeConfig& config) {
  config.validate();

  Lattice lattice(config.width, config.height);
  SplitMix64 rng(config.seed);
  RelaxScratch scratch;

  SimulationRun run;
  run.config = config;
  run.events.reserve(static_cast<std::size_t>(config.measured_deposits));

  const std::uint64_t total = config.warmup_deposits + config.measured_deposits;
  const bool periodic = config.intervention.kind == InterventionPolicy::Kind::PeriodicRemoval;
  for (std::uint64_t i = 1; i <= total; ++i) {
    const Site site = choose_site(lattice, config.deposition, rng);
    lattice.deposit(site);
    // The lattice is stable before every deposit (interventions only remove
    // grains), so the cascade can only start at the deposit site.
    detail::reset_scratch(lattice, scratch);
    const int idx = lattice.index(site);
    if (lattice.grains[static_cast<std::size_t>(idx)] >= config.threshold) {
      scratch.pending.push_back(idx);
    }
    const AvalancheEvent ev = detail::relax_pending(lattice, config.threshold, scratch);
    if (periodic && i % config.intervention.period == 0) {
      apply_intervention(lattice, config.intervention);
    }
    if (i > config.warmup_deposits) run.events.push_back(ev);
  }

  run.final_checksum = lattice_checksum(lattice);
  run.totals = {lattice.total_deposited, lattice.total_dissipated, lattice.total_removed,
                static_cast<std::uint64_t>(lattice.grain_total())};
  return run;
}

inline std::string to_string(const DepositionPolicy& p) {
  switch (p.kind) {
    case DepositionPolicy::Kind::UniformRandom: return "random";
    case DepositionPolicy::Kind::MaxIntent: return "max";
    case DepositionPolicy::Kind::MinIntent: return "min";
    case DepositionPolicy::Kind::FixedSite:
      return "fixed:" + std::to_string(p.site.row) + "," + std::to_string(p.site.col);
  }
  return "random";
}

inline DepositionPolicy parse_deposition_policy(std::string_view text) {
  if (text == "random") return DepositionPolicy::uniform_random();
  if (text == "max") return DepositionPolicy::max_intent();
  if (text == "min") return DepositionPolicy::min_intent();
  if (text.starts_with("fixed:")) {
    const auto parts = split(text.substr(6), ',');
    if (parts.size() != 2) throw ConfigError("policy 'fixed' takes ROW,COL coordinates");
    Site s{parse_number<int>(parts[0], "policy fixed row"),
           parse_number<int>(parts[1], "policy fixed col")};
    return DepositionPolicy::fixed_site(s);
  }
  throw ConfigError("unknown deposition policy '" + std::string(text) +
                    "' (expected random | max | min | fixed:ROW,COL)");
}

inline std::string to_string(const InterventionPolicy& p) {
  if (p.kind == InterventionPolicy::Kind::None) return "none";
  return "periodic:" + std::to_string(p.period) + "," + format_double(p.top_fraction) + "," +
         std::to_string(p.grains_removed_per_cell);
}

inline InterventionPolicy parse_intervention_policy(std::string_view text) {
  if (text == "none") return InterventionPolicy::none();
  if (text.starts_with("periodic:")) {
    const auto parts = split(text.substr(9), ',');
    if (parts.size() != 3) {
      throw ConfigError("intervention 'periodic' takes PERIOD,TOP_FRACTION,GRAINS_PER_CELL");
    }
    return InterventionPolicy::periodic_removal(
        parse_number<std::uint64_t>(parts[0], "intervention period"),
        parse_number<double>(parts[1], "intervention top_fraction"),
        parse_number<int>(parts[2], "intervention grains_per_cell"));
  }
  throw ConfigError("unknown intervention '" + std::string(text) +
                    "' (expected none | periodic:PERIOD,FRACTION,GRAINS)");
}

}  // namespace sandfire
