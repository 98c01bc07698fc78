#include "meta_audit/cli.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>

#include <CLI11.hpp>

#include "meta_audit/csv.hpp"
#include "meta_audit/errors.hpp"
#include "meta_audit/report.hpp"
#include "meta_audit/svg.hpp"

namespace meta_audit {

namespace {

std::string g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw CLI::ValidationError("--alpha", "must lie in (0, 1), got " + g(alpha));
  }
}

void note_clamps(AuditReport& report, const MetaDataset& ds,
                 const FisherResult& f) {
  for (auto i : f.clamped) {
    report.warn("study '" + ds.studies[i].id + "': p-value below " +
                g(kFisherFloor) + " clamped for Fisher combining");
  }
}

void print_fisher(std::ostream& out, const FisherResult& f) {
  out << "fisher: k=" << f.df / 2 << " statistic=" << g(f.statistic)
      << " df=" << f.df << " combined_p=" << g(f.combined_p) << '\n';
}

void print_pooled(std::ostream& out, const PooledResult& d) {
  out << "dl-" << to_string(d.mode) << ": pooled=" << g(d.pooled)
      << " se=" << g(d.se_pooled) << " ci95=(" << g(d.ci95.first) << ", "
      << g(d.ci95.second) << ") tau2=" << g(d.tau2) << " Q=" << g(d.q_statistic)
      << '\n';
}

void finish(const AuditReport& report, const std::string& out_path,
            std::ostream& out) {
  for (const auto& w : report.warnings) out << "warning: " << w << '\n';
  if (!out_path.empty()) write_report_json(report, out_path);
}

struct CombineArgs {
  std::string method = "fisher";
  double alpha = 0.05;
  std::string input;
  std::string out;
};

int cmd_combine(const CombineArgs& a, std::ostream& out) {
  check_alpha(a.alpha);
  const auto method = parse_method(a.method);
  const MetaDataset ds = parse_studies_csv(a.input);
  AuditReport report;
  report.dataset_label = ds.label;

  const CombinedResult result = combine(ds, *method);
  if (const auto* f = std::get_if<FisherResult>(&result)) {
    report.fisher = *f;
    note_clamps(report, ds, *f);
    print_fisher(out, *f);
    const auto p = resolve_pvalues(ds);
    out << "elston: " << elston_flags(p).size() << " of " << p.size()
        << " p-values below e^-1\n";
  } else {
    report.dl = std::get<PooledResult>(result);
    print_pooled(out, *report.dl);
  }
  out << "significant at alpha=" << g(a.alpha) << ": "
      << (is_significant(result, a.alpha) ? "yes" : "no") << '\n';
  finish(report, a.out, out);
  return kExitOk;
}

struct DiagnoseArgs {
  std::string input;
  std::string svg;
  std::string out;
};

int cmd_diagnose(const DiagnoseArgs& a, std::ostream& out) {
  const MetaDataset ds = parse_studies_csv(a.input);
  const PValuePlot plot = build_pvalue_plot(ds);
  const DiagnosticReport diag = classify_plot(plot);

  AuditReport report;
  report.dataset_label = ds.label;
  report.diagnostics = diag;

  out << "n=" << diag.n << " classification=" << to_string(diag.classification)
      << " frac_below_0.05=" << g(diag.frac_below_005)
      << " elston_count=" << diag.elston_count
      << " definitive_count=" << diag.definitive_count
      << " min_p_direction=" << to_string(diag.min_p_direction) << '\n';
  if (diag.single_fit) {
    out << "single fit: slope=" << g(diag.single_fit->slope)
        << " sse=" << g(diag.single_fit->sse) << '\n';
  }
  if (diag.two_segment) {
    const auto& t = *diag.two_segment;
    out << "two-segment fit: breakpoint=" << t.breakpoint_rank
        << " left_slope=" << g(t.left.slope) << " right_slope=" << g(t.right.slope)
        << " combined_sse=" << g(t.combined_sse) << '\n';
  } else {
    report.warn("fewer than 6 studies: two-segment fit skipped");
  }
  if (!a.svg.empty()) write_pvalue_plot_svg(plot, diag, a.svg);
  finish(report, a.out, out);
  return kExitOk;
}

struct RobustnessArgs {
  std::string input;
  std::string method = "fisher";
  double alpha = 0.05;
  std::string out;
};

int cmd_robustness(const RobustnessArgs& a, std::ostream& out) {
  check_alpha(a.alpha);
  const auto method = *parse_method(a.method);
  const MetaDataset ds = parse_studies_csv(a.input);
  AuditReport report;
  report.dataset_label = ds.label;

  const CombinedResult full = combine(ds, method);
  if (const auto* f = std::get_if<FisherResult>(&full)) {
    report.fisher = *f;
    note_clamps(report, ds, *f);
    print_fisher(out, *f);
  } else {
    report.dl = std::get<PooledResult>(full);
    print_pooled(out, *report.dl);
  }

  report.influence = leave_one_out(ds, method, a.alpha);
  std::size_t flips = 0;
  for (const auto& rec : *report.influence) {
    flips += rec.verdict_flip;
    out << "  drop " << rec.study_id << ": delta=" << g(rec.delta)
        << (rec.verdict_flip ? " FLIPS VERDICT" : "") << '\n';
  }
  out << "verdict flips: " << flips << " of " << report.influence->size() << '\n';

  if (method == Method::fisher) {
    report.min_flip_pvalue = min_flip_pvalue(ds, a.alpha);
    out << "single added study with p < " << g(*report.min_flip_pvalue)
        << " makes the combined result significant at alpha=" << g(a.alpha) << '\n';
  }
  finish(report, a.out, out);
  return kExitOk;
}

struct SearchspaceArgs {
  std::string input;
  std::string out;
};

int cmd_searchspace(const SearchspaceArgs& a, std::ostream& out) {
  const auto counts = parse_counts_csv(a.input);
  if (counts.empty()) throw DataError(a.input + ": no rows");
  std::vector<SearchSpaceRecord> records;
  AuditReport report;
  report.dataset_label = std::filesystem::path(a.input).stem().string();

  for (const auto& c : counts) {
    const auto r = compute_spaces(c);
    out << r.counts.id << (c.label.empty() ? "" : " " + c.label)
        << ": space1=" << r.space1 << " space2=" << r.space2
        << " space3=" << r.space3 << '\n';
    auto check = [&](const char* name, std::optional<std::uint64_t> reported,
                     std::uint64_t computed) {
      if (reported && *reported != computed) {
        report.warn("study '" + c.id + "': computed " + name + " = " +
                    std::to_string(computed) + " but input reports " +
                    std::to_string(*reported));
      }
    };
    check("space1", c.reported_space1, r.space1);
    check("space2", c.reported_space2, r.space2);
    check("space3", c.reported_space3, r.space3);
    records.push_back(r);
  }
  report.searchspace_summary = summarize_spaces(records);
  const auto& s = *report.searchspace_summary;
  out << "summary: n=" << records.size() << " median=" << g(s.median)
      << " q1=" << g(s.q1) << " q3=" << g(s.q3) << '\n';
  finish(report, a.out, out);
  return kExitOk;
}

struct SimulateArgs {
  SimulationConfig config;
  std::string config_file;
  std::string out;
  double contaminate_p = 0.0;
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Audit meta-analyses: combining, robustness, diagnostics, "
               "search spaces and simulation",
               "meta-audit"};
  app.require_subcommand(1);

  const std::vector<std::string> methods{"fisher", "dl-fixed", "dl-random"};

  CombineArgs combine_args;
  auto* combine_cmd = app.add_subcommand("combine", "Combine studies with one method");
  combine_cmd->add_option("--method", combine_args.method, "fisher | dl-fixed | dl-random")
      ->check(CLI::IsMember(methods))
      ->capture_default_str();
  combine_cmd->add_option("--alpha", combine_args.alpha, "Significance level")
      ->capture_default_str();
  combine_cmd->add_option("--input", combine_args.input, "Study CSV")->required();
  combine_cmd->add_option("--out", combine_args.out, "JSON report path");

  DiagnoseArgs diagnose_args;
  auto* diagnose_cmd = app.add_subcommand("diagnose", "P-value plot diagnostics");
  diagnose_cmd->add_option("--input", diagnose_args.input, "Study CSV")->required();
  diagnose_cmd->add_option("--svg", diagnose_args.svg, "SVG plot path");
  diagnose_cmd->add_option("--out", diagnose_args.out, "JSON report path");

  RobustnessArgs robust_args;
  auto* robust_cmd = app.add_subcommand("robustness", "Leave-one-out influence");
  robust_cmd->add_option("--input", robust_args.input, "Study CSV")->required();
  robust_cmd->add_option("--method", robust_args.method, "fisher | dl-fixed | dl-random")
      ->check(CLI::IsMember(methods))
      ->capture_default_str();
  robust_cmd->add_option("--alpha", robust_args.alpha, "Significance level")
      ->capture_default_str();
  robust_cmd->add_option("--out", robust_args.out, "JSON report path");

  SearchspaceArgs space_args;
  auto* space_cmd = app.add_subcommand("searchspace", "Analysis search-space sizes");
  space_cmd->add_option("--input", space_args.input, "Count CSV")->required();
  space_cmd->add_option("--out", space_args.out, "JSON report path");

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo false-positive rates");
  auto* o_k = sim_cmd->add_option("--k", sim.config.k_studies, "Published studies per meta-analysis");
  auto* o_m = sim_cmd->add_option("--hack-width,-m", sim.config.hack_width,
                                  "Analyses tried per study (1 = no hacking)");
  auto* o_rho = sim_cmd->add_option("--rho", sim.config.pub_bias_rho,
                                    "Publication probability of a non-significant study");
  auto* o_c = sim_cmd->add_option("--contaminate-p", sim.contaminate_p,
                                  "Fraudulent p-value appended to every replicate");
  auto* o_alpha = sim_cmd->add_option("--alpha", sim.config.alpha, "Significance level");
  auto* o_reps = sim_cmd->add_option("--reps,--replicates", sim.config.replicates,
                                     "Number of replicates");
  auto* o_seed = sim_cmd->add_option("--seed", sim.config.seed, "Base seed");
  auto* o_dl = sim_cmd->add_flag("--dl", sim.config.dl_arm, "Also simulate DL pooling");
  sim_cmd->add_option("--config", sim.config_file, "key=value config file");
  sim_cmd->add_option("--out", sim.out, "JSON report path");

  std::vector<std::string> argv_store;
  argv_store.reserve(args.size() + 1);
  argv_store.push_back("meta-audit");
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*combine_cmd) return cmd_combine(combine_args, out);
    if (*diagnose_cmd) return cmd_diagnose(diagnose_args, out);
    if (*robust_cmd) return cmd_robustness(robust_args, out);
    if (*space_cmd) return cmd_searchspace(space_args, out);
    if (*sim_cmd) {
      // Defaults < config file < explicit flags.
      const SimulationConfig from_flags = sim.config;
      SimulationConfig cfg;
      if (!sim.config_file.empty()) {
        std::ifstream in(sim.config_file);
        if (!in) throw DataError(sim.config_file + ": cannot open file");
        try {
          cfg = parse_simulation_config(in, cfg);
        } catch (const DataError& e) {
          throw DataError(sim.config_file + ": " + e.what());
        }
      }
      if (o_k->count()) cfg.k_studies = from_flags.k_studies;
      if (o_m->count()) cfg.hack_width = from_flags.hack_width;
      if (o_rho->count()) cfg.pub_bias_rho = from_flags.pub_bias_rho;
      if (o_c->count()) cfg.contaminate_p = sim.contaminate_p;
      if (o_alpha->count()) cfg.alpha = from_flags.alpha;
      if (o_reps->count()) cfg.replicates = from_flags.replicates;
      if (o_seed->count()) cfg.seed = from_flags.seed;
      if (o_dl->count()) cfg.dl_arm = from_flags.dl_arm;
      try {
        validate(cfg);
      } catch (const std::invalid_argument& e) {
        err << "error: simulate: " << e.what() << '\n';
        return kExitUsage;
      }
      const SimulationResult r = run_monte_carlo(cfg);
      out << "replicates=" << r.replicates_run << " seed=" << r.seed
          << " fisher_reject_rate=" << g(r.fisher_reject_rate);
      if (r.dl_reject_rate) out << " dl_reject_rate=" << g(*r.dl_reject_rate);
      out << " mean_generated=" << g(r.mean_k_published) << '\n';
      if (!sim.out.empty()) write_json_file(to_json(cfg, r), sim.out);
      return kExitOk;
    }
  } catch (const CLI::ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::overflow_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace meta_audit
