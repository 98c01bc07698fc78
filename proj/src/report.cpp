#include "meta_audit/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "meta_audit/errors.hpp"

namespace meta_audit {

namespace {

Json num(double v) { return round_sig10(v); }

Json nums(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

Json fit_json(const FitLine& f) {
  return Json{{"slope", num(f.slope)},
              {"intercept", num(f.intercept)},
              {"sse", num(f.sse)},
              {"n", f.n}};
}

FitLine fit_from(const Json& j) {
  return {j.at("slope").get<double>(), j.at("intercept").get<double>(),
          j.at("sse").get<double>(), j.at("n").get<std::size_t>()};
}

Json fisher_json(const FisherResult& f) {
  return Json{{"statistic", num(f.statistic)},
              {"df", f.df},
              {"combined_p", num(f.combined_p)},
              {"contributions", nums(f.contributions)},
              {"clamped_indices", f.clamped}};
}

FisherResult fisher_from(const Json& j) {
  FisherResult f;
  f.statistic = j.at("statistic").get<double>();
  f.df = j.at("df").get<int>();
  f.combined_p = j.at("combined_p").get<double>();
  f.contributions = j.at("contributions").get<std::vector<double>>();
  f.clamped = j.at("clamped_indices").get<std::vector<std::size_t>>();
  return f;
}

Json pooled_json(const PooledResult& d) {
  return Json{{"mode", std::string(to_string(d.mode))},
              {"pooled", num(d.pooled)},
              {"se_pooled", num(d.se_pooled)},
              {"ci95", Json::array({num(d.ci95.first), num(d.ci95.second)})},
              {"tau2", num(d.tau2)},
              {"q_statistic", num(d.q_statistic)},
              {"weights", nums(d.weights)}};
}

PooledResult pooled_from(const Json& j) {
  PooledResult d;
  const auto mode = j.at("mode").get<std::string>();
  if (mode != "fixed" && mode != "random") {
    throw DataError("report: unknown pooling mode '" + mode + "'");
  }
  d.mode = mode == "fixed" ? PoolMode::fixed : PoolMode::random;
  d.pooled = j.at("pooled").get<double>();
  d.se_pooled = j.at("se_pooled").get<double>();
  d.ci95 = {j.at("ci95").at(0).get<double>(), j.at("ci95").at(1).get<double>()};
  d.tau2 = j.at("tau2").get<double>();
  d.q_statistic = j.at("q_statistic").get<double>();
  d.weights = j.at("weights").get<std::vector<double>>();
  return d;
}

Json diagnostics_json(const DiagnosticReport& d) {
  Json j{{"n", d.n},
         {"classification", std::string(to_string(d.classification))}};
  j["single_fit"] = d.single_fit ? fit_json(*d.single_fit) : Json(nullptr);
  if (d.two_segment) {
    j["two_segment"] = Json{{"breakpoint_rank", d.two_segment->breakpoint_rank},
                            {"left_fit", fit_json(d.two_segment->left)},
                            {"right_fit", fit_json(d.two_segment->right)},
                            {"combined_sse", num(d.two_segment->combined_sse)}};
  } else {
    j["two_segment"] = nullptr;
  }
  j["frac_below_005"] = num(d.frac_below_005);
  j["elston_count"] = d.elston_count;
  j["definitive_count"] = d.definitive_count;
  j["min_p_direction"] = std::string(to_string(d.min_p_direction));
  return j;
}

DiagnosticReport diagnostics_from(const Json& j) {
  DiagnosticReport d;
  d.n = j.at("n").get<std::size_t>();
  const auto cls = parse_plot_class(j.at("classification").get<std::string>());
  if (!cls) throw DataError("report: unknown classification");
  d.classification = *cls;
  if (!j.at("single_fit").is_null()) d.single_fit = fit_from(j.at("single_fit"));
  if (!j.at("two_segment").is_null()) {
    const auto& t = j.at("two_segment");
    d.two_segment = TwoSegmentFit{t.at("breakpoint_rank").get<std::size_t>(),
                                  fit_from(t.at("left_fit")),
                                  fit_from(t.at("right_fit")),
                                  t.at("combined_sse").get<double>()};
  }
  d.frac_below_005 = j.at("frac_below_005").get<double>();
  d.elston_count = j.at("elston_count").get<std::size_t>();
  d.definitive_count = j.at("definitive_count").get<std::size_t>();
  const auto dir = parse_direction(j.at("min_p_direction").get<std::string>());
  if (!dir) throw DataError("report: unknown direction");
  d.min_p_direction = *dir;
  return d;
}

Json influence_json(const InfluenceRecord& r) {
  Json j{{"study_id", r.study_id}, {"method", std::string(to_string(r.method))}};
  j["delta"] = num(r.delta);
  j["significant_with"] = r.significant_with;
  j["significant_without"] = r.significant_without;
  j["verdict_flip"] = r.verdict_flip;
  j["result_without"] = std::visit(
      [](const auto& res) -> Json {
        using T = std::decay_t<decltype(res)>;
        if constexpr (std::is_same_v<T, FisherResult>) {
          return fisher_json(res);
        } else {
          return pooled_json(res);
        }
      },
      r.result_without);
  return j;
}

InfluenceRecord influence_from(const Json& j) {
  InfluenceRecord r;
  r.study_id = j.at("study_id").get<std::string>();
  const auto m = parse_method(j.at("method").get<std::string>());
  if (!m) throw DataError("report: unknown method");
  r.method = *m;
  r.delta = j.at("delta").get<double>();
  r.significant_with = j.at("significant_with").get<bool>();
  r.significant_without = j.at("significant_without").get<bool>();
  r.verdict_flip = j.at("verdict_flip").get<bool>();
  if (r.method == Method::fisher) {
    r.result_without = fisher_from(j.at("result_without"));
  } else {
    r.result_without = pooled_from(j.at("result_without"));
  }
  return r;
}

}  // namespace

void AuditReport::warn(std::string w) {
  if (std::find(warnings.begin(), warnings.end(), w) == warnings.end()) {
    warnings.push_back(std::move(w));
  }
}

double round_sig10(double v) {
  if (!std::isfinite(v) || v == 0.0) return v;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return std::strtod(buf, nullptr);
}

Json to_json(const AuditReport& r) {
  Json j;
  j["schema"] = kReportSchema;
  j["dataset_label"] = r.dataset_label;
  if (r.fisher) j["fisher"] = fisher_json(*r.fisher);
  if (r.dl) j["dl"] = pooled_json(*r.dl);
  if (r.diagnostics) j["diagnostics"] = diagnostics_json(*r.diagnostics);
  if (r.influence) {
    Json a = Json::array();
    for (const auto& rec : *r.influence) a.push_back(influence_json(rec));
    j["influence"] = std::move(a);
  }
  if (r.min_flip_pvalue) j["min_flip_pvalue"] = num(*r.min_flip_pvalue);
  if (r.searchspace_summary) {
    j["searchspace_summary"] = Json{{"median", num(r.searchspace_summary->median)},
                                    {"q1", num(r.searchspace_summary->q1)},
                                    {"q3", num(r.searchspace_summary->q3)}};
  }
  j["warnings"] = r.warnings;
  return j;
}

AuditReport report_from_json(const Json& j) {
  if (j.value("schema", 0) != kReportSchema) {
    throw DataError("report: unsupported schema version");
  }
  AuditReport r;
  r.dataset_label = j.at("dataset_label").get<std::string>();
  if (j.contains("fisher")) r.fisher = fisher_from(j.at("fisher"));
  if (j.contains("dl")) r.dl = pooled_from(j.at("dl"));
  if (j.contains("diagnostics")) r.diagnostics = diagnostics_from(j.at("diagnostics"));
  if (j.contains("influence")) {
    r.influence.emplace();
    for (const auto& rec : j.at("influence")) r.influence->push_back(influence_from(rec));
  }
  if (j.contains("min_flip_pvalue")) {
    r.min_flip_pvalue = j.at("min_flip_pvalue").get<double>();
  }
  if (j.contains("searchspace_summary")) {
    const auto& s = j.at("searchspace_summary");
    r.searchspace_summary = SpaceSummary{s.at("median").get<double>(),
                                         s.at("q1").get<double>(),
                                         s.at("q3").get<double>()};
  }
  r.warnings = j.at("warnings").get<std::vector<std::string>>();
  return r;
}

Json to_json(const SimulationConfig& c, const SimulationResult& r) {
  Json config{{"k_studies", c.k_studies},
              {"hack_width", c.hack_width},
              {"pub_bias_rho", num(c.pub_bias_rho)}};
  config["contaminate_p"] = c.contaminate_p ? num(*c.contaminate_p) : Json(nullptr);
  config["alpha"] = num(c.alpha);
  config["replicates"] = c.replicates;
  config["seed"] = c.seed;
  config["dl_arm"] = c.dl_arm;

  Json result{{"fisher_reject_rate", num(r.fisher_reject_rate)}};
  result["dl_reject_rate"] = r.dl_reject_rate ? num(*r.dl_reject_rate) : Json(nullptr);
  result["mean_k_published"] = num(r.mean_k_published);
  result["replicates_run"] = r.replicates_run;
  result["seed"] = r.seed;

  return Json{{"schema", kReportSchema},
              {"config", std::move(config)},
              {"result", std::move(result)}};
}

void write_json_file(const Json& j, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(path.string() + ": cannot open for writing");
  out << j.dump(2) << '\n';
  if (!out) throw DataError(path.string() + ": write failed");
}

void write_report_json(const AuditReport& report,
                       const std::filesystem::path& path) {
  write_json_file(to_json(report), path);
}

}  // namespace meta_audit
