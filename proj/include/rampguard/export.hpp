#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "rampguard/simulation.hpp"

namespace rampguard {

enum class ExportFormat { csv, svg };

/// Comma-separated list such as "csv,svg".
std::set<ExportFormat> parse_formats(const std::string& list);

// CSV columns are headed `name [unit]`; fields are quoted only when needed.
std::string control_csv(const RunArtifacts& a);
std::string residual_csv(const RunArtifacts& a);
std::string field_csv(const RunArtifacts& a);  // long format, one row per (t, x)
std::string summary_csv(const RunArtifacts& a);

std::string density_heatmap_svg(const RunArtifacts& a);
std::string control_plot_svg(const RunArtifacts& a);
std::string residual_plot_svg(const RunArtifacts& a);

/// Writes the requested formats into `dir` (created if missing) and returns
/// the written paths in a fixed order.
std::vector<std::filesystem::path> export_artifacts(const RunArtifacts& a,
                                                    const std::filesystem::path& dir,
                                                    const std::set<ExportFormat>& formats);

}  // namespace rampguard
