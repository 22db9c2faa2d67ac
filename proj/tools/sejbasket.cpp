// Command-line front end: expert scoring, decision-maker pooling, basket
// scenario runs and what-if conditioning over the shipped file formats.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <string>

#include <CLI11.hpp>

#include "sej/basket.hpp"
#include "sej/classical.hpp"
#include "sej/copula.hpp"
#include "sej/io.hpp"
#include "sej/marginal.hpp"
#include "sej/rng.hpp"

namespace {

sej::ReportFormat parse_format(const std::string& name) {
    if (name == "table") return sej::ReportFormat::table;
    if (name == "csv") return sej::ReportFormat::csv;
    if (name == "json") return sej::ReportFormat::json;
    throw sej::Error(sej::Errc::Validation, "unknown format " + name);
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw sej::Error(sej::Errc::Validation, "cannot write " + out_path);
    out << text;
}

void print_warnings(const sej::ElicitationStudy& study) {
    for (const auto& w : study.warnings()) std::cerr << "warning: " << w << "\n";
}

// ---------------------------------------------------------------------------
// selftest: checks the numerical core against independent oracles.

double simpson(double lo, double hi, int n, const auto& f) {
    // n must be even
    const double h = (hi - lo) / n;
    double acc = f(lo) + f(hi);
    for (int i = 1; i < n; ++i) acc += f(lo + i * h) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

double chi2_df3_sf_by_quadrature(double x) {
    // integrate the tail; the density is smooth away from zero
    auto density = [](double t) {
        return t <= 0.0 ? 0.0 : std::sqrt(t) * std::exp(-0.5 * t) / 2.5066282746310005;
    };
    return simpson(x, std::max(x + 60.0, 120.0), 200000, density);
}

struct SelfTest {
    int failures = 0;

    void check(const std::string& name, bool ok) {
        std::printf("%s  %s\n", ok ? "PASS" : "FAIL", name.c_str());
        if (!ok) ++failures;
    }
};

int run_selftest() {
    SelfTest t;

    bool chi_ok = true;
    for (double x : {0.05, 0.5, 0.888, 2.0, 5.0, 7.8147, 12.0, 20.0}) {
        chi_ok = chi_ok && std::abs(sej::chi2_sf_df3(x) - chi2_df3_sf_by_quadrature(x)) < 1e-6;
    }
    t.check("chi-square(3) survival vs quadrature", chi_ok);

    const double c_good = sej::calibration_score({0.1, 0.4, 0.4, 0.1}, 10);
    t.check("calibration score of (0.1,0.4,0.4,0.1), N=10",
            std::abs(c_good - chi2_df3_sf_by_quadrature(0.88806015173764685)) < 1e-6);
    t.check("calibration score of an extreme miss", sej::calibration_score({0, 0, 0, 1}, 10) < 1e-12);
    t.check("perfect calibration scores exactly 1",
            sej::calibration_score({0.05, 0.45, 0.45, 0.05}, 20) == 1.0);

    const double info = sej::information_score_item({0, 6, 26}, {-2.6, 28.6});
    t.check("information score of (0,6,26) on [-2.6,28.6]",
            std::abs(info - 0.17226551210937877) < 1e-9);

    { // marginal moments vs direct sampling
        const sej::Marginal m = sej::fit_marginal({-10, 3, 20});
        const auto [mean, var] = m.moments();
        std::mt19937 rng(7);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        double acc = 0.0, acc2 = 0.0;
        const int n = 2'000'000;
        for (int i = 0; i < n; ++i) {
            const double x = m.inv_cdf(unif(rng));
            acc += x;
            acc2 += x * x;
        }
        const double mc_mean = acc / n;
        const double mc_var = acc2 / n - mc_mean * mc_mean;
        t.check("marginal moments vs Monte Carlo",
                std::abs(mean - mc_mean) < 0.02 && std::abs(var - mc_var) < 1.0);
        t.check("marginal mean closed form", std::abs(mean - 4.10) < 1e-12);
    }

    { // pooled quantiles vs direct mixture sampling
        const std::vector<sej::QuantileTriple> experts = {{-5, 0, 5}, {10, 15, 20}};
        const std::vector<double> w = {0.5, 0.5};
        const sej::Range range = sej::intrinsic_range(experts, std::nullopt, 0.1);
        const auto pooled = sej::pool_item(w, experts, range);
        const auto q = pooled.quantiles();

        std::mt19937 rng(11);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        std::vector<double> draws;
        const int n = 2'000'000;
        draws.reserve(n);
        for (int i = 0; i < n; ++i) {
            const auto& e = experts[unif(rng) < 0.5 ? 0 : 1];
            // piecewise-uniform draw over the shared range
            const double u = unif(rng);
            const std::array<double, 5> k = {range.lo, e.q05, e.q50, e.q95, range.hi};
            double c = 0.0, x = range.hi;
            for (int b = 0; b < 4; ++b) {
                if (u <= c + sej::kBinMass[b]) {
                    x = k[b] + (u - c) / sej::kBinMass[b] * (k[b + 1] - k[b]);
                    break;
                }
                c += sej::kBinMass[b];
            }
            draws.push_back(x);
        }
        std::sort(draws.begin(), draws.end());
        auto pct = [&](double u) { return draws[static_cast<std::size_t>(u * (n - 1))]; };
        // The pooled density is nearly flat around the median of this
        // mixture, so the median estimate carries a far larger standard
        // error than the tail quantiles.
        t.check("pooled quantiles vs mixture sampling",
                std::abs(q.q05 - pct(0.05)) < 0.015 && std::abs(q.q50 - pct(0.5)) < 0.5 &&
                    std::abs(q.q95 - pct(0.95)) < 0.015);
    }

    { // Brexit correlation matrix is PSD; a contradictory 3x3 one is not
        const auto matrix = sej::build_matrix(sej::brexit_correlations(), sej::brexit_categories());
        t.check("Brexit correlation matrix accepted without repair", !matrix.repaired);

        bool repaired_or_aborted = false;
        try {
            const sej::CategorySet abc({"A", "B", "C"});
            const sej::CorrelationSpec bad({{"A", "B", 0.9}, {"A", "C", 0.9}, {"B", "C", -0.9}});
            repaired_or_aborted = sej::build_matrix(bad, abc).repaired;
        } catch (const sej::Error& e) {
            repaired_or_aborted = e.code() == sej::Errc::RepairDriftExceeded;
        }
        t.check("non-PSD spec triggers repair or abort", repaired_or_aborted);

        const auto block = sej::sample(matrix, 200'000, sej::kDefaultSeed);
        const auto veg = block.column(matrix.categories.index_of("Vegetables"));
        const auto fruit = block.column(matrix.categories.index_of("Fruit"));
        // Spearman via ranks
        auto ranks = [](std::vector<double> v) {
            std::vector<std::size_t> idx(v.size());
            for (std::size_t i = 0; i < v.size(); ++i) idx[i] = i;
            std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
            std::vector<double> r(v.size());
            for (std::size_t i = 0; i < idx.size(); ++i) r[idx[i]] = static_cast<double>(i);
            return r;
        };
        const auto ra = ranks(veg), rb = ranks(fruit);
        double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
        for (std::size_t i = 0; i < ra.size(); ++i) {
            sa += ra[i];
            sb += rb[i];
            saa += ra[i] * ra[i];
            sbb += rb[i] * rb[i];
            sab += ra[i] * rb[i];
        }
        const double n = static_cast<double>(ra.size());
        const double rho =
            (sab - sa * sb / n) / std::sqrt((saa - sa * sa / n) * (sbb - sb * sb / n));
        t.check("Vegetables-Fruit Spearman near +0.75", std::abs(rho - 0.75) < 0.02);
    }

    std::printf("%s\n", t.failures == 0 ? "selftest: all checks passed"
                                        : "selftest: FAILURES detected");
    return t.failures == 0 ? 0 : 3;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Expert judgement scoring and food basket cost propagation"};
    app.require_subcommand(1);

    std::string study_path, scenario_path, out_path, node;
    std::string format = "table";
    double alpha = 0.0, overshoot = sej::Marginal::kDefaultOvershoot, percentile = 0.0;
    bool optimize = false;
    std::uint64_t seed = sej::kDefaultSeed;
    std::size_t samples = sej::kDefaultSamples;
    unsigned threads = 0;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--format", format, "Output format: table, csv or json");
        cmd->add_option("--out", out_path, "Write the report to this file instead of stdout");
    };
    auto add_run_flags = [&](CLI::App* cmd) {
        cmd->add_option("--samples", samples, "Monte Carlo sample count");
        cmd->add_option("--seed", seed, "Random seed (recorded in the report)");
        cmd->add_option("--overshoot", overshoot, "Intrinsic-range overshoot fraction");
        cmd->add_option("--threads", threads, "Worker threads (0 = hardware)");
    };

    CLI::App* score = app.add_subcommand("score", "Expert calibration/information scores");
    score->add_option("study", study_path, "Study file")->required();
    score->add_option("--alpha", alpha, "Calibration cutoff for the weights");
    score->add_option("--overshoot", overshoot, "Intrinsic-range overshoot fraction");
    add_common(score);

    CLI::App* dm = app.add_subcommand("dm", "Decision-maker quantiles per question");
    dm->add_option("study", study_path, "Study file")->required();
    auto* dm_alpha = dm->add_option("--alpha", alpha, "Fixed calibration cutoff");
    dm->add_flag("--optimize", optimize, "Pick the cutoff maximizing the DM score");
    dm->add_option("--overshoot", overshoot, "Intrinsic-range overshoot fraction");
    add_common(dm);

    CLI::App* basket = app.add_subcommand("basket", "Run a scenario and report basket nodes");
    basket->add_option("scenario", scenario_path, "Scenario file")->required();
    add_run_flags(basket);
    add_common(basket);

    CLI::App* cond = app.add_subcommand("condition", "Scenario with one node pinned");
    cond->add_option("scenario", scenario_path, "Scenario file")->required();
    cond->add_option("--node", node, "Category to condition")->required();
    cond->add_option("--percentile", percentile, "Percentile in (0,1) to pin the node at")
        ->required();
    add_run_flags(cond);
    add_common(cond);

    CLI::App* selftest = app.add_subcommand("selftest", "Check the numerics against oracles");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        const sej::ReportFormat fmt = parse_format(format);

        if (selftest->parsed()) return run_selftest();

        if (score->parsed()) {
            const auto study = sej::parse_study_file(study_path);
            print_warnings(study);
            const auto weighted =
                sej::global_weights(sej::score_experts(study, overshoot), alpha);
            emit(sej::render_scores(weighted, fmt), out_path);
            return 0;
        }

        if (dm->parsed()) {
            const auto study = sej::parse_study_file(study_path);
            print_warnings(study);
            if (optimize && dm_alpha->count() > 0) {
                throw sej::Error(sej::Errc::Validation, "--alpha and --optimize are exclusive");
            }
            if (optimize) {
                const auto result = sej::optimize_alpha(study, overshoot);
                emit(sej::render_dm(result.dm, result.dm_score, result.alpha, fmt), out_path);
            } else {
                const auto weighted =
                    sej::global_weights(sej::score_experts(study, overshoot), alpha);
                const auto built = sej::build_decision_maker(study, weighted, overshoot);
                emit(sej::render_dm(built, sej::score_decision_maker(built, study), alpha, fmt),
                     out_path);
            }
            return 0;
        }

        // basket / condition
        auto parsed = sej::parse_scenario_file(scenario_path);
        sej::ScenarioConfig& cfg = parsed.config;
        if (basket->count("--samples") || cond->count("--samples")) cfg.n_samples = samples;
        if (basket->count("--seed") || cond->count("--seed")) cfg.seed = seed;
        if (basket->count("--overshoot") || cond->count("--overshoot")) cfg.overshoot = overshoot;
        if (cond->parsed()) {
            cfg.conditioning = sej::Conditioning{node, percentile};
            cfg.validate();
        }
        const auto report = sej::run_scenario(cfg, threads);
        emit(sej::render_report(report, fmt), out_path);
        return 0;
    } catch (const sej::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
