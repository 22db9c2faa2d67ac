#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sej/copula.hpp"
#include "sej/domain.hpp"
#include "sej/marginal.hpp"

namespace sej {

inline constexpr std::uint64_t kDefaultSeed = 20180704;
inline constexpr std::size_t kDefaultSamples = 1'000'000;

struct Conditioning {
    std::string category;
    double percentile = 0.0; // in (0, 1)

    friend bool operator==(const Conditioning&, const Conditioning&) = default;
};

// Everything needed to run one scenario end to end.
struct ScenarioConfig {
    std::string name;
    CategorySet categories;
    std::vector<QuantileTriple> quantiles; // aligned to categories
    CorrelationSpec correlations;
    std::vector<BasketSpec> baskets;
    double overshoot = Marginal::kDefaultOvershoot;
    std::size_t n_samples = kDefaultSamples;
    std::uint64_t seed = kDefaultSeed;
    std::optional<Conditioning> conditioning;

    // Throws Validation / UnknownCategory when quantiles, baskets or
    // correlations do not line up with the category set.
    void validate() const;
};

struct SummaryStats {
    double mean = 0.0;
    double sd = 0.0; // population standard deviation
    double median = 0.0;
    double q05 = 0.0;
    double q95 = 0.0;
};

// Mean, population sd and empirical 5/50/95 percentiles (linear
// interpolation between closest order statistics). Throws TooFewSamples.
SummaryStats summarize(std::span<const double> samples);

// n_samples x n_categories matrix of percentage changes after the
// inverse-CDF map.
struct ValueMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> v; // row-major

    double at(std::size_t r, std::size_t c) const { return v[r * cols + c]; }
};

ValueMatrix map_to_values(const SampleBlock& uniforms, std::span<const Marginal> marginals);

// Row-wise weighted percentage change; weights must sum to 1.
std::vector<double> basket_pct_samples(const ValueMatrix& values, std::span<const double> weights);

// Row-wise weekly cost change in pounds: sum of cost_i * pct_i / 100.
std::vector<double> basket_cost_samples(const ValueMatrix& values, const BasketSpec& basket,
                                        const CategorySet& categories);

struct NodeSummary {
    std::string node;
    enum class Unit { percent, pounds } unit = Unit::percent;
    SummaryStats stats;
};

struct ScenarioReport {
    std::string scenario;
    std::size_t n_samples = 0;
    std::uint64_t seed = 0;
    double overshoot = 0.0;
    std::string sampler_version;
    std::optional<Conditioning> conditioning;
    std::optional<double> conditioned_value; // pct pinned for the node
    std::vector<NodeSummary> nodes;          // "<basket> %" then "<basket> GBP" per basket

    const NodeSummary& node(std::string_view name) const; // throws Validation
};

// Fit marginals, build the correlation matrix, (conditionally) sample,
// map through the inverse CDFs and summarize every basket node.
ScenarioReport run_scenario(const ScenarioConfig& config, unsigned threads = 0);

} // namespace sej
