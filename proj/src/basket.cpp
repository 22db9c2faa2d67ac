#include "sej/basket.hpp"

#include <algorithm>
#include <cmath>

namespace sej {

void ScenarioConfig::validate() const {
    if (name.empty()) throw Error(Errc::Validation, "scenario has no name");
    if (categories.size() == 0) throw Error(Errc::Validation, "scenario has no categories");
    if (quantiles.size() != categories.size()) {
        throw Error(Errc::Validation, "scenario quantiles do not cover every category");
    }
    for (std::size_t i = 0; i < quantiles.size(); ++i) {
        checked_triple(quantiles[i].q05, quantiles[i].q50, quantiles[i].q95,
                       categories.name(i));
    }
    for (const auto& e : correlations.entries()) {
        categories.index_of(e.a);
        categories.index_of(e.b);
    }
    if (baskets.empty()) throw Error(Errc::Validation, "scenario lists no baskets");
    for (const auto& b : baskets) {
        (void)b.aligned_costs(categories); // coverage check
    }
    if (!(overshoot >= 0.0) || !std::isfinite(overshoot)) {
        throw Error(Errc::Validation, "overshoot must be finite and >= 0");
    }
    if (n_samples < 1) throw Error(Errc::Validation, "n_samples must be >= 1");
    if (conditioning) {
        categories.index_of(conditioning->category);
        if (!(conditioning->percentile > 0.0 && conditioning->percentile < 1.0)) {
            throw Error(Errc::Validation, "conditioning percentile must lie in (0, 1)");
        }
    }
}

SummaryStats summarize(std::span<const double> samples) {
    if (samples.size() < 2) throw Error(Errc::TooFewSamples, "summarize needs >= 2 samples");
    const double n = static_cast<double>(samples.size());

    // Welford: exact for constant input (degenerate scenarios must report
    // zero variance), stable otherwise.
    double mean = 0.0, m2 = 0.0;
    std::size_t k = 0;
    for (double x : samples) {
        ++k;
        const double delta = x - mean;
        mean += delta / static_cast<double>(k);
        m2 += delta * (x - mean);
    }
    const double var = m2 / n;

    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    auto percentile = [&](double u) {
        // Linear interpolation between closest order statistics.
        const double h = (n - 1.0) * u;
        const auto lo = static_cast<std::size_t>(h);
        if (lo + 1 >= sorted.size()) return sorted.back();
        const double frac = h - static_cast<double>(lo);
        return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
    };

    SummaryStats s;
    s.mean = mean;
    s.sd = std::sqrt(var);
    s.median = percentile(0.5);
    s.q05 = percentile(0.05);
    s.q95 = percentile(0.95);
    return s;
}

ValueMatrix map_to_values(const SampleBlock& uniforms, std::span<const Marginal> marginals) {
    if (marginals.size() != uniforms.cols) {
        throw Error(Errc::DimensionMismatch, "marginals vs sample columns");
    }
    ValueMatrix out;
    out.rows = uniforms.rows;
    out.cols = uniforms.cols;
    out.v.resize(uniforms.u.size());
    for (std::size_t r = 0; r < out.rows; ++r) {
        const double* in = uniforms.u.data() + r * out.cols;
        double* val = out.v.data() + r * out.cols;
        for (std::size_t c = 0; c < out.cols; ++c) val[c] = marginals[c].inv_cdf(in[c]);
    }
    return out;
}

std::vector<double> basket_pct_samples(const ValueMatrix& values,
                                       std::span<const double> weights) {
    if (weights.size() != values.cols) {
        throw Error(Errc::DimensionMismatch, "weights vs value columns");
    }
    std::vector<double> out(values.rows);
    for (std::size_t r = 0; r < values.rows; ++r) {
        const double* row = values.v.data() + r * values.cols;
        double acc = 0.0;
        for (std::size_t c = 0; c < values.cols; ++c) acc += weights[c] * row[c];
        out[r] = acc;
    }
    return out;
}

std::vector<double> basket_cost_samples(const ValueMatrix& values, const BasketSpec& basket,
                                        const CategorySet& categories) {
    const std::vector<double> costs = basket.aligned_costs(categories);
    if (costs.size() != values.cols) {
        throw Error(Errc::DimensionMismatch, "basket vs value columns");
    }
    std::vector<double> out(values.rows);
    for (std::size_t r = 0; r < values.rows; ++r) {
        const double* row = values.v.data() + r * values.cols;
        double acc = 0.0;
        for (std::size_t c = 0; c < values.cols; ++c) acc += costs[c] * row[c] / 100.0;
        out[r] = acc;
    }
    return out;
}

const NodeSummary& ScenarioReport::node(std::string_view name) const {
    for (const auto& n : nodes) {
        if (n.node == name) return n;
    }
    throw Error(Errc::Validation, "report has no node " + std::string(name));
}

ScenarioReport run_scenario(const ScenarioConfig& config, unsigned threads) {
    config.validate();

    std::vector<Marginal> marginals;
    marginals.reserve(config.quantiles.size());
    for (const auto& t : config.quantiles) marginals.push_back(Marginal::fit(t, config.overshoot));

    const CorrelationMatrix matrix = build_matrix(config.correlations, config.categories);

    ScenarioReport report;
    report.scenario = config.name;
    report.n_samples = config.n_samples;
    report.seed = config.seed;
    report.overshoot = config.overshoot;
    report.conditioning = config.conditioning;

    SampleBlock block;
    if (config.conditioning) {
        const std::size_t node = config.categories.index_of(config.conditioning->category);
        block = condition(matrix, node, config.conditioning->percentile, config.n_samples,
                          config.seed, threads);
        report.conditioned_value = marginals[node].inv_cdf(config.conditioning->percentile);
    } else {
        block = sample(matrix, config.n_samples, config.seed, threads);
    }
    report.sampler_version = block.sampler_version;

    const ValueMatrix values = map_to_values(block, marginals);

    for (const auto& basket : config.baskets) {
        const auto pct = basket_pct_samples(values, basket.weights(config.categories));
        report.nodes.push_back(
            {basket.name() + " %", NodeSummary::Unit::percent, summarize(pct)});
        const auto cost = basket_cost_samples(values, basket, config.categories);
        report.nodes.push_back(
            {basket.name() + " GBP", NodeSummary::Unit::pounds, summarize(cost)});
    }
    return report;
}

} // namespace sej
