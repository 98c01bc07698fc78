#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "meta_audit/combine.hpp"
#include "meta_audit/diagnostics.hpp"
#include "meta_audit/robustness.hpp"
#include "meta_audit/searchspace.hpp"
#include "meta_audit/simulate.hpp"

namespace meta_audit {

inline constexpr int kReportSchema = 1;

using Json = nlohmann::ordered_json;

struct AuditReport {
  std::string dataset_label;
  std::optional<FisherResult> fisher;
  std::optional<PooledResult> dl;
  std::optional<DiagnosticReport> diagnostics;
  std::optional<std::vector<InfluenceRecord>> influence;
  std::optional<double> min_flip_pvalue;
  std::optional<SpaceSummary> searchspace_summary;
  std::vector<std::string> warnings;

  /// Appends `w` unless it is already present.
  void warn(std::string w);
};

/// Rounds to 10 significant digits, the precision every report number is
/// written with.
double round_sig10(double v);

/// Keys in fixed order: schema, dataset_label, then the present sections,
/// then warnings.
Json to_json(const AuditReport& report);
AuditReport report_from_json(const Json& j);

Json to_json(const SimulationConfig& config, const SimulationResult& result);

/// Writes `j` (two-space indent, trailing newline). Throws DataError
/// naming the path on I/O failure.
void write_json_file(const Json& j, const std::filesystem::path& path);
void write_report_json(const AuditReport& report,
                       const std::filesystem::path& path);

}  // namespace meta_audit
