#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "sej/domain.hpp"
#include "sej/marginal.hpp"

namespace sej {

// Survival function of the chi-square distribution with 3 degrees of
// freedom, via the closed form 2*(1 - Phi(sqrt(x))) + sqrt(2x/pi)*exp(-x/2).
// Absolute error below 1e-9. Throws NegativeArgument.
double chi2_sf_df3(double x);

struct Range {
    double lo = 0.0;
    double hi = 0.0;
    double width() const noexcept { return hi - lo; }
};

// Smallest interval containing every quantile (and the realization, when
// given), extended by the overshoot fraction k on both sides. A zero
// spread falls back to [m-1, m+1] in question units.
Range intrinsic_range(std::span<const QuantileTriple> assessments,
                      std::optional<double> realization,
                      double overshoot = Marginal::kDefaultOvershoot);

// Fraction of realizations landing in each inter-quantile bin of the
// expert's judgements. A realization equal to a quantile counts in the
// lower bin. Throws NoCalibrationQuestions on empty input.
std::array<double, 4> empirical_bins(std::span<const QuantileTriple> assessments,
                                     std::span<const double> realizations);

// Calibration score: chi-square(3) survival of 2*N*KL(s || p), with
// 0*ln(0) = 0. Equals 1 exactly when s matches the theoretical masses.
double calibration_score(const std::array<double, 4>& s, std::size_t n_items);

// Relative entropy of one three-quantile judgement against a uniform
// background over the intrinsic range. Zero-width bins are floored at
// 1e-9 of the range width.
double information_score_item(const QuantileTriple& t, const Range& range);

// Mean of information_score_item over the items. Sizes must match
// (MissingAssessment when the triples list is short).
double information_score(std::span<const QuantileTriple> triples, std::span<const Range> ranges);

struct ExpertScore {
    std::string expert;
    double calibration = 0.0; // C in (0, 1]
    double information = 0.0; // I >= 0, mean over items, natural log
    double combined = 0.0;    // C * I * 1{C >= alpha}
    double weight = 0.0;      // normalized over experts
};

// Per-expert calibration and information scores. Information is the mean
// over every question the expert assessed; calibration uses the
// calibration questions. Combined/weight fields are left zero.
std::vector<ExpertScore> score_experts(const ElicitationStudy& study,
                                       double overshoot = Marginal::kDefaultOvershoot);

// Performance-based weights: w_e proportional to C_e * I_e * 1{C_e >= alpha},
// normalized to sum 1. Throws AllExpertsExcluded when every expert falls
// below the cutoff. If every passing expert has a zero combined score the
// passing experts share equal weight.
std::vector<ExpertScore> global_weights(std::vector<ExpertScore> scores, double alpha);

// Weighted mixture of expert piecewise-uniform densities over a shared
// intrinsic range: a piecewise-linear CDF with jumps at point judgements.
class PooledCdf {
public:
    struct Knot {
        double x;
        double below; // F(x-)
        double at;    // F(x)
    };

    PooledCdf() = default;
    explicit PooledCdf(std::vector<Knot> knots) : knots_(std::move(knots)) {}

    const std::vector<Knot>& knots() const noexcept { return knots_; }

    double cdf(double x) const;
    double inv(double u) const;
    double mean() const;
    double total_mass() const; // F at the upper support end

    QuantileTriple quantiles() const; // inv at 0.05 / 0.5 / 0.95

private:
    std::vector<Knot> knots_;
};

// Pools one item. Weights must sum to 1 and match the triples;
// every triple must lie inside the range.
PooledCdf pool_item(std::span<const double> weights, std::span<const QuantileTriple> triples,
                    const Range& range);

// The virtual expert formed by the weighted mixture of expert densities.
struct DecisionMaker {
    std::vector<std::string> question_ids; // study question order
    std::vector<QuantileTriple> quantiles;
    std::vector<PooledCdf> densities;
    std::vector<Range> ranges;

    const QuantileTriple& quantile_for(std::string_view question_id) const;
    const PooledCdf& density_for(std::string_view question_id) const;
};

// Pools every question under the given expert weights. Questions missing
// some experts' assessments are pooled over the available experts with
// weights renormalized.
DecisionMaker build_decision_maker(const ElicitationStudy& study,
                                   std::span<const ExpertScore> weighted,
                                   double overshoot = Marginal::kDefaultOvershoot);

struct DmScore {
    double calibration = 0.0;
    double information = 0.0; // mean over calibration questions
    double combined = 0.0;
};

// Scores the decision maker as a virtual expert on the calibration
// questions, using its extracted quantile triples.
DmScore score_decision_maker(const DecisionMaker& dm, const ElicitationStudy& study);

struct OptimizedDm {
    double alpha = 0.0;
    std::vector<ExpertScore> scores; // weights at alpha
    DecisionMaker dm;
    DmScore dm_score;
};

// Evaluates the global-weight DM at every candidate cutoff
// (0 and each expert calibration score) and keeps the cutoff whose DM
// maximizes combined score; ties go to the smaller cutoff.
OptimizedDm optimize_alpha(const ElicitationStudy& study,
                           double overshoot = Marginal::kDefaultOvershoot);

} // namespace sej
