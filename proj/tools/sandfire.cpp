// sandfire CLI: sandpile simulation, wildfire class-count analysis, and the
// embedded-fixture reproduction report.
//
// Exit codes: 0 success, 1 reproduction mismatch or internal error,
// 2 usage/config, 3 I/O, 4 insufficient data.

#include <cstdio>
#include <filesystem>
#include <future>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sandfire/errors.hpp"
#include "sandfire/fixtures.hpp"
#include "sandfire/pipeline.hpp"
#include "sandfire/run_io.hpp"
#include "sandfire/version.hpp"

namespace fs = std::filesystem;
using namespace sandfire;

namespace {

struct SimulateArgs {
  int width = 50;
  int height = 50;
  int threshold = 4;
  std::uint64_t seed = 1;
  std::uint64_t warmup = 0;
  bool warmup_given = false;
  std::uint64_t deposits = 200000;
  std::string policy = "random";
  std::string intervention = "none";
  int runs = 1;
  std::string out = ".";
  bool no_banner = false;
};

struct AnalyzeArgs {
  std::string data;
  std::string from_run;
  std::string groups = "quintile";
  std::string exclude;  // default: "2" for quintile groupings, empty otherwise
  bool exclude_given = false;
  double ratio = 2.0;
  std::uint64_t min_count = 10;
  bool raw_counts = false;
  std::string out = ".";
  bool no_banner = false;
};

struct ReproduceArgs {
  std::string out;
  bool no_banner = false;
};

struct TTailArgs {
  double t = 0.0;
  int df = 1;
  bool two_sided = false;
};

fs::path ensure_out_dir(const std::string& out) {
  fs::path dir(out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create output directory: " + dir.string());
  }
  return dir;
}

int cmd_simulate(const SimulateArgs& args) {
  LatticeConfig base;
  base.width = args.width;
  base.height = args.height;
  base.threshold = args.threshold;
  base.seed = args.seed;
  base.warmup_deposits =
      args.warmup_given ? args.warmup : default_warmup(args.width, args.height);
  base.measured_deposits = args.deposits;
  base.deposition = parse_deposition_policy(args.policy);
  base.intervention = parse_intervention_policy(args.intervention);
  base.validate();
  if (args.runs < 1) throw ConfigError("--runs must be >= 1");

  const fs::path dir = ensure_out_dir(args.out);

  std::vector<LatticeConfig> configs;
  for (int k = 0; k < args.runs; ++k) {
    LatticeConfig cfg = base;
    cfg.seed = base.seed + static_cast<std::uint64_t>(k);
    configs.push_back(cfg);
  }

  // Independent seeds; safe to run concurrently, merged in seed order.
  std::vector<std::future<SimulationRun>> futures;
  for (const LatticeConfig& cfg : configs) {
    futures.push_back(std::async(args.runs > 1 ? std::launch::async : std::launch::deferred,
                                 [cfg] { return run_simulation(cfg); }));
  }

  for (int k = 0; k < args.runs; ++k) {
    const SimulationRun run = futures[static_cast<std::size_t>(k)].get();
    std::cout << "seed: " << run.config.seed << "\n";

    const std::string stem = args.runs == 1 ? "run" : "run_" + std::to_string(k);
    write_file(dir / (stem + ".csv"), render_run_csv(run, !args.no_banner));
    write_file(dir / (stem + ".json"), render_run_json(run));

    std::uint64_t nonzero = 0, total_topplings = 0;
    for (const AvalancheEvent& ev : run.events) {
      if (ev.topplings > 0) ++nonzero;
      total_topplings += ev.topplings;
    }
    std::cout << "events: " << run.events.size() << " nonzero: " << nonzero
              << " mean_size: "
              << format_double(static_cast<double>(total_topplings) /
                               static_cast<double>(run.events.size()))
              << " checksum: " << hex16(run.final_checksum) << "\n";
  }
  return 0;
}

std::set<int> parse_exclude(const std::string& text) {
  std::set<int> out;
  if (text.empty() || text == "none") return out;
  for (const auto& part : split(text, ',')) {
    out.insert(parse_number<int>(part, "--exclude"));
  }
  return out;
}

CategoryGrouping make_grouping(const FireDataset& dataset, const std::string& spec) {
  if (spec == "quintile") return assign_quantiles(dataset, 5);
  if (spec == "all") return assign_all_years(dataset);
  if (spec.starts_with("periods:")) {
    std::vector<std::pair<int, int>> ranges;
    for (const auto& part : split(std::string_view(spec).substr(8), ',')) {
      const auto bounds = split(part, '-');
      if (bounds.size() != 2) {
        throw ConfigError("period '" + std::string(part) + "' must look like START-END");
      }
      ranges.emplace_back(parse_number<int>(bounds[0], "--groups period start"),
                          parse_number<int>(bounds[1], "--groups period end"));
    }
    return assign_periods(dataset, ranges);
  }
  throw ConfigError("unknown --groups '" + spec + "' (expected quintile | periods:<spec> | all)");
}

int cmd_analyze_run(const AnalyzeArgs& args) {
  const std::string content = read_file(args.from_run);
  const std::uint64_t digest = fnv1a_bytes(kFnv1aOffset, content.begin(), content.end());
  const auto events = parse_run_csv(content);

  HistogramFitOptions options;
  options.min_count = args.min_count;
  options.normalize_by_width = !args.raw_counts;
  const RegressionFit fit = analyze_event_sizes(events, LogBinning{args.ratio}, options);

  std::vector<std::uint64_t> sizes;
  for (const AvalancheEvent& ev : events) {
    if (ev.topplings > 0) sizes.push_back(ev.topplings);
  }
  const auto bins = histogram_sizes(sizes, LogBinning{args.ratio});

  const fs::path dir = ensure_out_dir(args.out);
  std::string csv;
  if (!args.no_banner) {
    csv += "# sandfire " + std::string(kVersion) + " input_digest=" + hex16(digest) + "\n";
  }
  csv += "bin_lower,bin_upper,representative,count\n";
  for (const auto& b : bins) {
    csv += format_double(b.lower) + ',' + format_double(b.upper) + ',' +
           format_double(b.representative) + ',' + std::to_string(b.count) + '\n';
  }
  write_file(dir / "simfit.csv", csv);

  std::cout << "events: " << events.size() << " nonzero: " << sizes.size() << "\n";
  std::cout << "fit: slope " << format_double(fit.slope) << " se " << format_double(fit.se_slope)
            << " r2 " << format_double(fit.r_squared) << " n_bins " << fit.n << "\n";
  return 0;
}

int cmd_analyze(const AnalyzeArgs& args) {
  if (!args.data.empty() == !args.from_run.empty()) {
    throw ConfigError("provide exactly one of --data or --from-run");
  }
  if (!args.from_run.empty()) return cmd_analyze_run(args);

  const std::string content = read_file(args.data);
  const std::uint64_t digest = fnv1a_bytes(kFnv1aOffset, content.begin(), content.end());
  const FireDataset dataset = parse_dataset(content, fs::path(args.data).stem().string());
  const CategoryGrouping grouping = make_grouping(dataset, args.groups);

  const ClassAverageTable table = average_counts(dataset, grouping);
  SlopeRiskReport report = fit_categories(table);

  const std::string exclude_spec =
      args.exclude_given ? args.exclude : (args.groups == "quintile" ? "2" : "");
  const std::set<int> exclude = parse_exclude(exclude_spec);
  int with_median = 0, usable = 0;
  for (int cat : report.categories) {
    if (!grouping.category_medians.count(cat)) continue;
    ++with_median;
    if (!exclude.count(cat)) ++usable;
  }
  if (usable >= 3) {
    report.slopes_vs_burn_fit = slopes_vs_burn(report, grouping.category_medians, exclude);
    report.excluded_categories.assign(exclude.begin(), exclude.end());
  } else if (with_median >= 3) {
    // the grouping could support the fit; the exclusions are what killed it
    throw InsufficientDataError("slopes-vs-burn fit needs 3 categories, " +
                                std::to_string(usable) + " left after --exclude");
  }

  const fs::path dir = ensure_out_dir(args.out);
  const EmitOptions emit{!args.no_banner, digest};
  write_file(dir / "table1.csv", render_table1_csv(table, emit));
  write_file(dir / "table2.csv", render_table2_csv(report, emit));
  write_file(dir / "table3.csv", render_table3_csv(report, emit));
  for (int cat : report.categories) {
    write_file(dir / ("fig_points_" + std::to_string(cat) + ".csv"),
               render_fig_points_csv(report, cat, emit));
  }
  if (report.slopes_vs_burn_fit) {
    write_file(dir / "fig2f.csv", render_fig2f_csv(report, grouping.category_medians, emit));
  }

  std::cout << "dataset: " << dataset.state_label << " years: " << dataset.records.size()
            << " categories: " << grouping.category_count << "\n";
  for (std::size_t i = 0; i < report.categories.size(); ++i) {
    const RegressionFit& fit = report.fits[i];
    std::cout << "category " << report.categories[i] << ": slope " << format_fixed(fit.slope, 4)
              << " se " << format_fixed(fit.se_slope, 4) << " r2 " << format_fixed(fit.r_squared, 4)
              << " p " << format_sig(fit.p_two_sided, 3) << "\n";
  }
  if (report.slopes_vs_burn_fit) {
    const RegressionFit& fit = *report.slopes_vs_burn_fit;
    std::cout << "slopes_vs_burn: slope " << format_sig(fit.slope, 6) << " p "
              << format_sig(fit.p_two_sided, 3) << " (one-sided "
              << format_sig(0.5 * fit.p_two_sided, 3) << ")";
    if (!report.excluded_categories.empty()) {
      std::cout << " excluding";
      for (int cat : report.excluded_categories) std::cout << " " << cat;
    }
    std::cout << "\n";
  }

  if (grouping.method == CategoryGrouping::Method::ExplicitPeriods) {
    const PeriodComparison cmp = period_comparison(dataset, grouping);
    write_file(dir / "period_tests.csv", render_period_tests_csv(cmp, emit));
    for (const auto& pt : cmp.prescribed_tests) {
      std::cout << "prescribed acres, period " << pt.category_a << " vs " << pt.category_b
                << ": t " << format_fixed(pt.test.t, 4) << " p "
                << format_sig(pt.test.p_two_sided, 3) << "\n";
    }
    for (const auto& pt : cmp.total_burned_tests) {
      std::cout << "total burned, period " << pt.category_a << " vs " << pt.category_b << ": t "
                << format_fixed(pt.test.t, 4) << " p " << format_sig(pt.test.p_two_sided, 3)
                << "\n";
    }
    if (cmp.total_burned_anova) {
      std::cout << "total burned ANOVA: F " << format_fixed(cmp.total_burned_anova->f, 4) << " p "
                << format_sig(cmp.total_burned_anova->p, 3) << "\n";
    }
  }
  return 0;
}

int cmd_reproduce(const ReproduceArgs& args) {
  const ClassAverageTable table = florida_quintile_table();
  const SlopeRiskReport report = fit_categories(table);

  int passed = 0, failed = 0;
  auto gate = [&](const std::string& label, double computed, double reference, double tol) {
    const bool ok = std::fabs(computed - reference) <= tol;
    (ok ? passed : failed) += 1;
    std::printf("%-28s computed %9.4f  reference %9.4f  tol %.4f  %s\n", label.c_str(), computed,
                reference, tol, ok ? "PASS" : "FAIL");
  };

  std::printf("Florida quintile reproduction (embedded class-mean fixture)\n\n");
  for (std::size_t i = 0; i < report.fits.size(); ++i) {
    const RegressionFit& fit = report.fits[i];
    const ReferenceFit& ref = kFloridaReferenceFits[i];
    const std::string q = "quintile " + std::to_string(report.categories[i]);
    gate(q + " slope", fit.slope, ref.slope, kSlopeTolerance);
    gate(q + " se_slope", fit.se_slope, ref.se_slope, kSeTolerance);
    gate(q + " r_squared", fit.r_squared, ref.r_squared, kR2Tolerance);
    std::printf("%-28s computed %9.5f  reference %9.5f  (reported)\n",
                (q + " p_two_sided").c_str(), fit.p_two_sided, ref.p);
  }

  std::printf("\npairwise one-sided p (df = 8)\n\n");
  for (const ReferencePairP& ref : kFloridaReferencePairwiseP) {
    const SlopeComparison& cmp =
        report.pairwise[static_cast<std::size_t>(ref.category_a - 1)]
                       [static_cast<std::size_t>(ref.category_b - 1)];
    gate("Q" + std::to_string(ref.category_a) + "-Q" + std::to_string(ref.category_b) + " p",
         cmp.p_one_sided, ref.p_one_sided, kPairwisePTolerance);
  }

  std::printf("\nresult: %d passed, %d failed\n", passed, failed);

  if (!args.out.empty()) {
    const fs::path dir = ensure_out_dir(args.out);
    const std::string fixture_csv = render_table1_csv(table, {false, 0});
    const EmitOptions emit{!args.no_banner,
                           fnv1a_bytes(kFnv1aOffset, fixture_csv.begin(), fixture_csv.end())};
    write_file(dir / "table1.csv", render_table1_csv(table, emit));
    write_file(dir / "table2.csv", render_table2_csv(report, emit));
    write_file(dir / "table3.csv", render_table3_csv(report, emit));
  }
  return failed == 0 ? 0 : 1;
}

int cmd_t_tail(const TTailArgs& args) {
  const double tail = student_t_tail(args.t, args.df);
  const double value = args.two_sided ? std::min(1.0, 2.0 * std::min(tail, 1.0 - tail)) : tail;
  std::printf("%.10g\n", value);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sandpile self-organized-criticality toolkit"};
  app.set_version_flag("--version", std::string("sandfire ") + kVersion);
  app.require_subcommand(1);

  SimulateArgs sim;
  CLI::App* simulate = app.add_subcommand("simulate", "run the sandpile model");
  simulate->add_option("--width", sim.width, "lattice width")->capture_default_str();
  simulate->add_option("--height", sim.height, "lattice height")->capture_default_str();
  simulate->add_option("--threshold", sim.threshold, "toppling threshold")->capture_default_str();
  simulate->add_option("--seed", sim.seed, "PRNG seed")->capture_default_str();
  auto* warmup_opt =
      simulate->add_option("--warmup", sim.warmup, "warmup deposits (default 10*width*height)");
  simulate->add_option("--deposits", sim.deposits, "measured deposits")->capture_default_str();
  simulate->add_option("--policy", sim.policy, "random | max | min | fixed:ROW,COL")
      ->capture_default_str();
  simulate
      ->add_option("--intervention", sim.intervention, "none | periodic:PERIOD,FRACTION,GRAINS")
      ->capture_default_str();
  simulate->add_option("--runs", sim.runs, "independent runs with consecutive seeds")
      ->capture_default_str();
  simulate->add_option("--out", sim.out, "output directory")->capture_default_str();
  simulate->add_flag("--no-banner", sim.no_banner, "omit the version banner from CSV output");

  AnalyzeArgs ana;
  CLI::App* analyze = app.add_subcommand("analyze", "fit fire records or a simulation run");
  analyze->add_option("--data", ana.data, "fire dataset CSV");
  analyze->add_option("--from-run", ana.from_run, "simulation run CSV");
  analyze->add_option("--groups", ana.groups, "quintile | periods:A-B,C-D,... | all")
      ->capture_default_str();
  auto* exclude_opt = analyze->add_option(
      "--exclude", ana.exclude,
      "categories left out of the slopes-vs-burn fit (default: 2 for quintiles; 'none' clears)");
  analyze->add_option("--ratio", ana.ratio, "log-bin ratio for --from-run")->capture_default_str();
  analyze->add_option("--min-count", ana.min_count, "minimum bin count used in the fit")
      ->capture_default_str();
  analyze->add_flag("--raw-counts", ana.raw_counts,
                    "fit raw bin counts instead of width-normalized densities");
  analyze->add_option("--out", ana.out, "output directory")->capture_default_str();
  analyze->add_flag("--no-banner", ana.no_banner, "omit the version banner from CSV output");

  ReproduceArgs rep;
  CLI::App* reproduce =
      app.add_subcommand("reproduce", "check the embedded Florida fixture against reference values");
  reproduce->add_option("--out", rep.out, "also write table CSVs here");
  reproduce->add_flag("--no-banner", rep.no_banner, "omit the version banner from CSV output");

  TTailArgs tt;
  CLI::App* t_tail = app.add_subcommand("t-tail", "Student-t upper tail probability");
  t_tail->add_option("--t", tt.t, "t statistic")->required();
  t_tail->add_option("--df", tt.df, "degrees of freedom")->required();
  t_tail->add_flag("--two-sided", tt.two_sided, "print the two-sided probability");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*simulate) {
      sim.warmup_given = warmup_opt->count() > 0;
      return cmd_simulate(sim);
    }
    if (*analyze) {
      ana.exclude_given = exclude_opt->count() > 0;
      return cmd_analyze(ana);
    }
    if (*reproduce) return cmd_reproduce(rep);
    if (*t_tail) return cmd_t_tail(tt);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const InsufficientDataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
