#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "sej/basket.hpp"
#include "sej/classical.hpp"
#include "sej/domain.hpp"

namespace sej {

// On-disk formats are line-oriented key-value files with [section]
// headers, '#' comments and a leading `format_version = 1`. Parse errors
// carry the line number; validation errors name the offending entity.

BasketSpec parse_basket_file(const std::filesystem::path& path);
CorrelationSpec parse_correlation_file(const std::filesystem::path& path);
ElicitationStudy parse_study_file(const std::filesystem::path& path);

// A scenario file inlines quantiles and run parameters and references the
// basket (and optionally correlation) files by relative path.
struct ParsedScenario {
    ScenarioConfig config;
    std::vector<std::pair<std::string, std::string>> basket_refs; // label -> path
    std::optional<std::string> correlation_ref;
};

ParsedScenario parse_scenario_file(const std::filesystem::path& path);

std::string serialize_basket(const BasketSpec& basket);
std::string serialize_correlations(const CorrelationSpec& spec);
std::string serialize_study(const ElicitationStudy& study);
std::string serialize_scenario(const ParsedScenario& scenario);

enum class ReportFormat { table, csv, json };

// Percent values with 1 decimal and a leading sign, pound values with 2.
std::string fmt_pct(double v);
std::string fmt_gbp(double v);

// Renders a scenario report: a text table with one row per node
// ("Mean +6.4% ± 6.0  Median +6.1% [-2.7, +16.9]"), a fixed-header CSV
// with one row per (scenario, node, statistic), or JSON.
std::string render_report(const ScenarioReport& report, ReportFormat format);

// Expert score table for the `score` subcommand.
std::string render_scores(std::span<const ExpertScore> scores, ReportFormat format);

// Decision-maker quantiles (plus the score line) for the `dm` subcommand.
std::string render_dm(const DecisionMaker& dm, const DmScore& score, double alpha,
                      ReportFormat format);

} // namespace sej
