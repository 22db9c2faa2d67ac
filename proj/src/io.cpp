#include "sej/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace sej {

namespace {

std::string trim(std::string_view s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string_view::npos) return {};
    const auto end = s.find_last_not_of(" \t\r");
    return std::string(s.substr(begin, end - begin + 1));
}

std::vector<std::string> split_tokens(std::string_view s) {
    std::vector<std::string> out;
    std::istringstream in{std::string(s)};
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

struct KvEntry {
    std::string key;
    std::string value;
    int line = 0;
};

struct KvSection {
    std::string name;
    int line = 0;
    std::vector<KvEntry> entries;

    const KvEntry* find(std::string_view key) const {
        for (const auto& e : entries) {
            if (e.key == key) return &e;
        }
        return nullptr;
    }
};

struct KvFile {
    std::filesystem::path path;
    std::vector<KvEntry> header; // entries before the first section
    std::vector<KvSection> sections;

    const KvSection* find(std::string_view name) const {
        for (const auto& s : sections) {
            if (s.name == name) return &s;
        }
        return nullptr;
    }

    const KvSection& require(std::string_view name) const {
        const KvSection* s = find(name);
        if (!s) {
            throw Error(Errc::Validation,
                        path.string() + ": missing [" + std::string(name) + "] section");
        }
        return *s;
    }
};

[[noreturn]] void syntax_error(const std::filesystem::path& path, int line,
                               const std::string& what) {
    throw Error(Errc::Syntax, path.string() + ":" + std::to_string(line) + ": " + what);
}

KvFile parse_kv_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::Validation, "cannot open " + path.string());

    KvFile file;
    file.path = path;
    KvSection* current = nullptr;
    std::string raw;
    int line_no = 0;
    bool any_content = false;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        any_content = true;
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) {
                syntax_error(path, line_no, "malformed section header");
            }
            file.sections.push_back({trim(line.substr(1, line.size() - 2)), line_no, {}});
            current = &file.sections.back();
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) syntax_error(path, line_no, "expected key = value");
        KvEntry entry{trim(line.substr(0, eq)), trim(line.substr(eq + 1)), line_no};
        if (entry.key.empty()) syntax_error(path, line_no, "empty key");
        if (current) {
            current->entries.push_back(std::move(entry));
        } else {
            file.header.push_back(std::move(entry));
        }
    }
    if (!any_content) syntax_error(path, 1, "empty file");

    bool version_seen = false;
    for (const auto& e : file.header) {
        if (e.key == "format_version") {
            version_seen = true;
            if (e.value != "1") {
                throw Error(Errc::UnsupportedVersion,
                            path.string() + ": format_version " + e.value);
            }
        }
    }
    if (!version_seen) {
        throw Error(Errc::UnsupportedVersion, path.string() + ": missing format_version");
    }
    return file;
}

double parse_number(const KvFile& file, const std::string& text, int line) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        syntax_error(file.path, line, "expected a number, got '" + text + "'");
    }
    if (used != text.size()) {
        syntax_error(file.path, line, "trailing characters after number '" + text + "'");
    }
    return v;
}

std::uint64_t parse_u64(const KvFile& file, const std::string& text, int line) {
    try {
        std::size_t used = 0;
        const auto v = std::stoull(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        syntax_error(file.path, line, "expected a non-negative integer, got '" + text + "'");
    }
}

QuantileTriple parse_triple(const KvFile& file, const KvEntry& entry,
                            const std::string& context) {
    const auto tok = split_tokens(entry.value);
    if (tok.size() != 3) {
        syntax_error(file.path, entry.line, context + ": expected three quantiles");
    }
    return checked_triple(parse_number(file, tok[0], entry.line),
                          parse_number(file, tok[1], entry.line),
                          parse_number(file, tok[2], entry.line), context);
}

std::string fmt_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

} // namespace

BasketSpec parse_basket_file(const std::filesystem::path& path) {
    const KvFile file = parse_kv_file(path);
    const KvSection& meta = file.require("basket");
    const KvEntry* name = meta.find("name");
    if (!name) throw Error(Errc::Validation, path.string() + ": basket has no name");
    const KvEntry* total = meta.find("total");
    if (!total) throw Error(Errc::Validation, path.string() + ": basket has no total");

    std::map<std::string, double> costs;
    for (const auto& e : file.require("costs").entries) {
        if (!costs.emplace(e.key, parse_number(file, e.value, e.line)).second) {
            throw Error(Errc::Validation, path.string() + ": duplicate cost for " + e.key);
        }
    }
    return BasketSpec(name->value, std::move(costs),
                      parse_number(file, total->value, total->line));
}

namespace {

CorrelationSpec correlations_from_section(const KvFile& file, const KvSection& section) {
    std::vector<CorrelationEntry> entries;
    for (const auto& e : section.entries) {
        const auto names = split_tokens(e.key);
        if (names.size() != 2) {
            syntax_error(file.path, e.line, "expected 'CategoryA CategoryB = r'");
        }
        entries.push_back({names[0], names[1], parse_number(file, e.value, e.line)});
    }
    return CorrelationSpec(std::move(entries));
}

} // namespace

CorrelationSpec parse_correlation_file(const std::filesystem::path& path) {
    const KvFile file = parse_kv_file(path);
    return correlations_from_section(file, file.require("correlations"));
}

ElicitationStudy parse_study_file(const std::filesystem::path& path) {
    const KvFile file = parse_kv_file(path);
    const KvEntry* experts_entry = file.require("study").find("experts");
    if (!experts_entry) throw Error(Errc::Validation, path.string() + ": no experts line");
    std::vector<std::string> experts = split_tokens(experts_entry->value);

    std::vector<Question> questions;
    for (const auto& e : file.require("questions").entries) {
        const auto tok = split_tokens(e.value);
        if (tok.size() < 2) {
            syntax_error(file.path, e.line, "expected 'id = kind units [realization]'");
        }
        Question q;
        q.id = e.key;
        q.units = tok[1];
        if (tok[0] == "calibration") {
            q.kind = QuestionKind::calibration;
            if (tok.size() != 3) {
                syntax_error(file.path, e.line, "calibration question needs a realization");
            }
            q.realization = parse_number(file, tok[2], e.line);
        } else if (tok[0] == "target") {
            q.kind = QuestionKind::target;
            if (tok.size() != 2) {
                syntax_error(file.path, e.line, "target question takes no realization");
            }
        } else {
            syntax_error(file.path, e.line, "unknown question kind '" + tok[0] + "'");
        }
        questions.push_back(std::move(q));
    }

    std::map<ElicitationStudy::AssessmentKey, QuantileTriple> assessments;
    for (const auto& e : file.require("assessments").entries) {
        const auto names = split_tokens(e.key);
        if (names.size() != 2) {
            syntax_error(file.path, e.line, "expected 'expert question = q05 q50 q95'");
        }
        const auto key = std::make_pair(names[0], names[1]);
        if (assessments.count(key)) {
            throw Error(Errc::Validation,
                        path.string() + ": duplicate assessment " + names[0] + "/" + names[1]);
        }
        assessments.emplace(key, parse_triple(file, e, names[0] + "/" + names[1]));
    }
    return validate_study(std::move(experts), std::move(questions), std::move(assessments));
}

ParsedScenario parse_scenario_file(const std::filesystem::path& path) {
    const KvFile file = parse_kv_file(path);
    const std::filesystem::path dir = path.parent_path();

    ParsedScenario out;
    ScenarioConfig& cfg = out.config;

    const KvSection& meta = file.require("scenario");
    if (const KvEntry* e = meta.find("name")) {
        cfg.name = e->value;
    } else {
        throw Error(Errc::Validation, path.string() + ": scenario has no name");
    }
    if (const KvEntry* e = meta.find("samples")) {
        cfg.n_samples = static_cast<std::size_t>(parse_u64(file, e->value, e->line));
    }
    if (const KvEntry* e = meta.find("seed")) cfg.seed = parse_u64(file, e->value, e->line);
    if (const KvEntry* e = meta.find("overshoot")) {
        cfg.overshoot = parse_number(file, e->value, e->line);
    }

    std::vector<std::string> names;
    std::vector<QuantileTriple> triples;
    for (const auto& e : file.require("quantiles").entries) {
        names.push_back(e.key);
        triples.push_back(parse_triple(file, e, e.key));
    }
    cfg.categories = CategorySet(std::move(names));
    cfg.quantiles = std::move(triples);

    if (const KvSection* cs = file.find("correlations")) {
        if (const KvEntry* ref = cs->find("file")) {
            if (cs->entries.size() != 1) {
                syntax_error(file.path, ref->line,
                             "correlations section mixes a file reference with entries");
            }
            out.correlation_ref = ref->value;
            cfg.correlations = parse_correlation_file(dir / ref->value);
        } else {
            cfg.correlations = correlations_from_section(file, *cs);
        }
    }

    for (const auto& e : file.require("baskets").entries) {
        out.basket_refs.emplace_back(e.key, e.value);
        cfg.baskets.push_back(parse_basket_file(dir / e.value));
    }

    if (const KvSection* cond = file.find("conditioning")) {
        const KvEntry* node = cond->find("node");
        const KvEntry* pct = cond->find("percentile");
        if (!node || !pct) {
            throw Error(Errc::Validation,
                        path.string() + ": conditioning needs node and percentile");
        }
        cfg.conditioning = Conditioning{node->value, parse_number(file, pct->value, pct->line)};
    }

    cfg.validate();
    return out;
}

std::string serialize_basket(const BasketSpec& basket) {
    std::ostringstream out;
    out << "format_version = 1\n\n[basket]\nname = " << basket.name()
        << "\ntotal = " << fmt_number(basket.total()) << "\n\n[costs]\n";
    for (const auto& [cat, cost] : basket.costs()) {
        out << cat << " = " << fmt_number(cost) << "\n";
    }
    return out.str();
}

std::string serialize_correlations(const CorrelationSpec& spec) {
    std::ostringstream out;
    out << "format_version = 1\n\n[correlations]\n";
    for (const auto& e : spec.entries()) {
        out << e.a << " " << e.b << " = " << fmt_number(e.r) << "\n";
    }
    return out.str();
}

std::string serialize_study(const ElicitationStudy& study) {
    std::ostringstream out;
    out << "format_version = 1\n\n[study]\nexperts =";
    for (const auto& e : study.experts()) out << " " << e;
    out << "\n\n[questions]\n";
    for (const auto& q : study.questions()) {
        out << q.id << " = "
            << (q.kind == QuestionKind::calibration ? "calibration" : "target") << " "
            << q.units;
        if (q.realization) out << " " << fmt_number(*q.realization);
        out << "\n";
    }
    out << "\n[assessments]\n";
    for (const auto& [key, t] : study.assessments()) {
        out << key.first << " " << key.second << " = " << fmt_number(t.q05) << " "
            << fmt_number(t.q50) << " " << fmt_number(t.q95) << "\n";
    }
    return out.str();
}

std::string serialize_scenario(const ParsedScenario& scenario) {
    const ScenarioConfig& cfg = scenario.config;
    std::ostringstream out;
    out << "format_version = 1\n\n[scenario]\nname = " << cfg.name
        << "\nsamples = " << cfg.n_samples << "\nseed = " << cfg.seed
        << "\novershoot = " << fmt_number(cfg.overshoot) << "\n\n[quantiles]\n";
    for (std::size_t i = 0; i < cfg.categories.size(); ++i) {
        const auto& t = cfg.quantiles[i];
        out << cfg.categories.name(i) << " = " << fmt_number(t.q05) << " " << fmt_number(t.q50)
            << " " << fmt_number(t.q95) << "\n";
    }
    out << "\n[correlations]\n";
    if (scenario.correlation_ref) {
        out << "file = " << *scenario.correlation_ref << "\n";
    } else {
        for (const auto& e : cfg.correlations.entries()) {
            out << e.a << " " << e.b << " = " << fmt_number(e.r) << "\n";
        }
    }
    out << "\n[baskets]\n";
    for (const auto& [label, path] : scenario.basket_refs) {
        out << label << " = " << path << "\n";
    }
    if (cfg.conditioning) {
        out << "\n[conditioning]\nnode = " << cfg.conditioning->category
            << "\npercentile = " << fmt_number(cfg.conditioning->percentile) << "\n";
    }
    return out.str();
}

std::string fmt_pct(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%+.1f%%", v);
    return buf;
}

std::string fmt_gbp(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%+.2f", v);
    std::string s = buf;
    // +£3.53 / -£1.90
    return s.substr(0, 1) + "£" + s.substr(1);
}

namespace {

std::string fmt_stat(double v, NodeSummary::Unit unit, bool signed_value) {
    if (unit == NodeSummary::Unit::percent) {
        char buf[64];
        std::snprintf(buf, sizeof buf, signed_value ? "%+.1f" : "%.1f", v);
        return buf;
    }
    if (signed_value) return fmt_gbp(v);
    char buf[64];
    std::snprintf(buf, sizeof buf, "£%.2f", v);
    return buf;
}

std::string csv_value(double v, NodeSummary::Unit unit) {
    char buf[64];
    std::snprintf(buf, sizeof buf, unit == NodeSummary::Unit::percent ? "%.1f" : "%.2f", v);
    return buf;
}

} // namespace

std::string render_report(const ScenarioReport& report, ReportFormat format) {
    if (format == ReportFormat::csv) {
        std::ostringstream out;
        out << "scenario,seed,samples,node,unit,statistic,value\n";
        for (const auto& n : report.nodes) {
            const char* unit = n.unit == NodeSummary::Unit::percent ? "percent" : "gbp";
            const auto row = [&](const char* stat, double v) {
                out << report.scenario << "," << report.seed << "," << report.n_samples << ","
                    << n.node << "," << unit << "," << stat << "," << csv_value(v, n.unit)
                    << "\n";
            };
            row("mean", n.stats.mean);
            row("sd", n.stats.sd);
            row("median", n.stats.median);
            row("q05", n.stats.q05);
            row("q95", n.stats.q95);
        }
        return out.str();
    }
    if (format == ReportFormat::json) {
        nlohmann::json j;
        j["scenario"] = report.scenario;
        j["samples"] = report.n_samples;
        j["seed"] = report.seed;
        j["overshoot"] = report.overshoot;
        j["sampler_version"] = report.sampler_version;
        if (report.conditioning) {
            j["conditioning"] = {{"node", report.conditioning->category},
                                 {"percentile", report.conditioning->percentile},
                                 {"value_pct", report.conditioned_value.value_or(0.0)}};
        }
        j["nodes"] = nlohmann::json::array();
        for (const auto& n : report.nodes) {
            j["nodes"].push_back(
                {{"node", n.node},
                 {"unit", n.unit == NodeSummary::Unit::percent ? "percent" : "gbp"},
                 {"mean", n.stats.mean},
                 {"sd", n.stats.sd},
                 {"median", n.stats.median},
                 {"q05", n.stats.q05},
                 {"q95", n.stats.q95}});
        }
        return j.dump(2) + "\n";
    }

    std::ostringstream out;
    out << "Scenario: " << report.scenario << "  (samples " << report.n_samples << ", seed "
        << report.seed << ", overshoot " << fmt_number(report.overshoot) << ", sampler "
        << report.sampler_version << ")\n";
    if (report.conditioning) {
        out << "Conditioned: " << report.conditioning->category << " at percentile "
            << fmt_number(report.conditioning->percentile);
        if (report.conditioned_value) out << " -> " << fmt_pct(*report.conditioned_value);
        out << "\n";
    }
    out << "\n";
    std::size_t width = 4;
    for (const auto& n : report.nodes) width = std::max(width, n.node.size());
    for (const auto& n : report.nodes) {
        const bool pct = n.unit == NodeSummary::Unit::percent;
        out << n.node << std::string(width - n.node.size() + 2, ' ');
        out << "Mean " << fmt_stat(n.stats.mean, n.unit, true) << (pct ? "% " : " ") << "± "
            << fmt_stat(n.stats.sd, n.unit, false);
        out << "  Median " << fmt_stat(n.stats.median, n.unit, true) << (pct ? "%" : "") << " ["
            << fmt_stat(n.stats.q05, n.unit, true) << ", " << fmt_stat(n.stats.q95, n.unit, true)
            << "]\n";
    }
    return out.str();
}

std::string render_scores(std::span<const ExpertScore> scores, ReportFormat format) {
    if (format == ReportFormat::csv) {
        std::ostringstream out;
        out << "expert,calibration,information,combined,weight\n";
        for (const auto& s : scores) {
            out << s.expert << "," << fmt_number(s.calibration) << "," << fmt_number(s.information)
                << "," << fmt_number(s.combined) << "," << fmt_number(s.weight) << "\n";
        }
        return out.str();
    }
    if (format == ReportFormat::json) {
        nlohmann::json j = nlohmann::json::array();
        for (const auto& s : scores) {
            j.push_back({{"expert", s.expert},
                         {"calibration", s.calibration},
                         {"information", s.information},
                         {"combined", s.combined},
                         {"weight", s.weight}});
        }
        return j.dump(2) + "\n";
    }
    std::ostringstream out;
    std::size_t width = 6;
    for (const auto& s : scores) width = std::max(width, s.expert.size());
    out << "Expert" << std::string(width - 6 + 2, ' ')
        << "Calibration   Information   Combined      Weight\n";
    for (const auto& s : scores) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%-*s  %-12.6g  %-12.6g  %-12.6g  %.6g\n",
                      static_cast<int>(width), s.expert.c_str(), s.calibration, s.information,
                      s.combined, s.weight);
        out << buf;
    }
    return out.str();
}

std::string render_dm(const DecisionMaker& dm, const DmScore& score, double alpha,
                      ReportFormat format) {
    if (format == ReportFormat::csv) {
        std::ostringstream out;
        out << "question,q05,q50,q95\n";
        for (std::size_t i = 0; i < dm.question_ids.size(); ++i) {
            out << dm.question_ids[i] << "," << fmt_number(dm.quantiles[i].q05) << ","
                << fmt_number(dm.quantiles[i].q50) << "," << fmt_number(dm.quantiles[i].q95)
                << "\n";
        }
        return out.str();
    }
    if (format == ReportFormat::json) {
        nlohmann::json j;
        j["alpha"] = alpha;
        j["score"] = {{"calibration", score.calibration},
                      {"information", score.information},
                      {"combined", score.combined}};
        j["questions"] = nlohmann::json::array();
        for (std::size_t i = 0; i < dm.question_ids.size(); ++i) {
            j["questions"].push_back({{"id", dm.question_ids[i]},
                                      {"q05", dm.quantiles[i].q05},
                                      {"q50", dm.quantiles[i].q50},
                                      {"q95", dm.quantiles[i].q95}});
        }
        return j.dump(2) + "\n";
    }
    std::ostringstream out;
    std::size_t width = 8;
    for (const auto& id : dm.question_ids) width = std::max(width, id.size());
    out << "Question" << std::string(width - 8 + 2, ' ') << "5%            50%           95%\n";
    for (std::size_t i = 0; i < dm.question_ids.size(); ++i) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%-*s  %-12.6g  %-12.6g  %-12.6g\n",
                      static_cast<int>(width), dm.question_ids[i].c_str(), dm.quantiles[i].q05,
                      dm.quantiles[i].q50, dm.quantiles[i].q95);
        out << buf;
    }
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "\nDM score: calibration %.6g, information %.6g, combined %.6g (alpha %.6g)\n",
                  score.calibration, score.information, score.combined, alpha);
    out << buf;
    return out.str();
}

} // namespace sej
