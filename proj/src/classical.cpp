#include "sej/classical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

namespace sej {

double chi2_sf_df3(double x) {
    if (std::isnan(x) || x < 0.0) throw Error(Errc::NegativeArgument, "chi2_sf_df3");
    if (x == 0.0) return 1.0;
    // 2*(1 - Phi(sqrt(x))) = erfc(sqrt(x/2))
    const double tail = std::erfc(std::sqrt(0.5 * x));
    const double hump = std::sqrt(2.0 * x / std::numbers::pi) * std::exp(-0.5 * x);
    return std::min(1.0, tail + hump);
}

Range intrinsic_range(std::span<const QuantileTriple> assessments,
                      std::optional<double> realization, double overshoot) {
    if (assessments.empty()) throw Error(Errc::EmptyStudy, "intrinsic_range with no assessments");
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& t : assessments) {
        lo = std::min(lo, t.q05);
        hi = std::max(hi, t.q95);
    }
    if (realization) {
        lo = std::min(lo, *realization);
        hi = std::max(hi, *realization);
    }
    if (lo == hi) return {lo - 1.0, hi + 1.0};
    const double spread = hi - lo;
    return {lo - overshoot * spread, hi + overshoot * spread};
}

std::array<double, 4> empirical_bins(std::span<const QuantileTriple> assessments,
                                     std::span<const double> realizations) {
    if (assessments.empty() || realizations.empty()) {
        throw Error(Errc::NoCalibrationQuestions, "empirical_bins");
    }
    if (assessments.size() != realizations.size()) {
        throw Error(Errc::DimensionMismatch, "assessments vs realizations");
    }
    std::array<double, 4> counts{};
    for (std::size_t i = 0; i < assessments.size(); ++i) {
        const auto& t = assessments[i];
        const double r = realizations[i];
        // Ties go to the lower bin.
        int bin = r <= t.q05 ? 0 : r <= t.q50 ? 1 : r <= t.q95 ? 2 : 3;
        counts[bin] += 1.0;
    }
    const double n = static_cast<double>(assessments.size());
    for (double& c : counts) c /= n;
    return counts;
}

double calibration_score(const std::array<double, 4>& s, std::size_t n_items) {
    if (n_items == 0) throw Error(Errc::NoCalibrationQuestions, "calibration_score");
    double kl = 0.0;
    for (int i = 0; i < 4; ++i) {
        if (s[i] > 0.0) kl += s[i] * std::log(s[i] / kBinMass[i]);
    }
    // KL >= 0 up to rounding; clamp so a perfect score stays exactly 1.
    kl = std::max(kl, 0.0);
    return chi2_sf_df3(2.0 * static_cast<double>(n_items) * kl);
}

double information_score_item(const QuantileTriple& t, const Range& range) {
    const double width = range.width();
    if (!(width > 0.0)) throw Error(Errc::InvalidEntry, "information_score_item: empty range");
    if (t.q05 < range.lo || t.q95 > range.hi) {
        throw Error(Errc::Validation, "quantiles outside the intrinsic range");
    }
    const double eps = 1e-9 * width;
    const std::array<double, 4> d = {
        std::max(t.q05 - range.lo, eps),
        std::max(t.q50 - t.q05, eps),
        std::max(t.q95 - t.q50, eps),
        std::max(range.hi - t.q95, eps),
    };
    double info = 0.0;
    for (int i = 0; i < 4; ++i) {
        info += kBinMass[i] * std::log(kBinMass[i] * width / d[i]);
    }
    return info;
}

double information_score(std::span<const QuantileTriple> triples, std::span<const Range> ranges) {
    if (triples.size() != ranges.size()) {
        throw Error(Errc::MissingAssessment, "information_score: triples do not cover the items");
    }
    if (triples.empty()) throw Error(Errc::MissingAssessment, "information_score: no items");
    double sum = 0.0;
    for (std::size_t i = 0; i < triples.size(); ++i) {
        sum += information_score_item(triples[i], ranges[i]);
    }
    return sum / static_cast<double>(triples.size());
}

namespace {

struct QuestionData {
    const Question* question;
    std::vector<std::string> assessors;
    std::vector<QuantileTriple> triples;
    Range range;
};

std::vector<QuestionData> collect_questions(const ElicitationStudy& study, double overshoot) {
    std::vector<QuestionData> out;
    out.reserve(study.questions().size());
    for (const auto& q : study.questions()) {
        QuestionData data;
        data.question = &q;
        for (const auto& e : study.experts()) {
            if (auto t = study.assessment(e, q.id)) {
                data.assessors.push_back(e);
                data.triples.push_back(*t);
            }
        }
        if (data.triples.empty()) continue; // unassessed target question
        data.range = intrinsic_range(data.triples, q.realization, overshoot);
        out.push_back(std::move(data));
    }
    return out;
}

} // namespace

std::vector<ExpertScore> score_experts(const ElicitationStudy& study, double overshoot) {
    const auto questions = collect_questions(study, overshoot);

    std::vector<ExpertScore> scores;
    scores.reserve(study.experts().size());
    for (const auto& expert : study.experts()) {
        std::vector<QuantileTriple> calib_triples;
        std::vector<double> realizations;
        std::vector<QuantileTriple> info_triples;
        std::vector<Range> info_ranges;
        for (const auto& qd : questions) {
            auto t = study.assessment(expert, qd.question->id);
            if (!t) continue;
            info_triples.push_back(*t);
            info_ranges.push_back(qd.range);
            if (qd.question->kind == QuestionKind::calibration) {
                calib_triples.push_back(*t);
                realizations.push_back(*qd.question->realization);
            }
        }
        const auto bins = empirical_bins(calib_triples, realizations);
        ExpertScore s;
        s.expert = expert;
        s.calibration = calibration_score(bins, calib_triples.size());
        s.information = information_score(info_triples, info_ranges);
        scores.push_back(std::move(s));
    }
    return scores;
}

std::vector<ExpertScore> global_weights(std::vector<ExpertScore> scores, double alpha) {
    if (scores.empty()) throw Error(Errc::EmptyStudy, "global_weights with no experts");
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw Error(Errc::InvalidEntry, "alpha outside [0, 1]");
    }
    double total = 0.0;
    std::size_t passing = 0;
    for (auto& s : scores) {
        const bool pass = s.calibration >= alpha;
        s.combined = pass ? s.calibration * s.information : 0.0;
        if (pass) ++passing;
        total += s.combined;
    }
    if (passing == 0) {
        throw Error(Errc::AllExpertsExcluded,
                    "every expert scored below alpha = " + std::to_string(alpha));
    }
    if (total > 0.0) {
        for (auto& s : scores) s.weight = s.combined / total;
    } else {
        // All passing experts have zero combined score; share weight equally.
        for (auto& s : scores) {
            s.weight = s.calibration >= alpha ? 1.0 / static_cast<double>(passing) : 0.0;
        }
    }
    return scores;
}

namespace {

// Right-continuous CDF and its left limit for one expert's piecewise
// density over the shared range.
struct ExpertDensity {
    std::array<double, 5> knots;

    explicit ExpertDensity(const QuantileTriple& t, const Range& r)
        : knots{r.lo, t.q05, t.q50, t.q95, r.hi} {}

    double cdf(double x, bool left_limit) const {
        double c = 0.0;
        for (int i = 0; i < 4; ++i) {
            const double lo = knots[i], hi = knots[i + 1];
            const bool past = left_limit ? x > hi : x >= hi;
            if (past) {
                c += kBinMass[i];
            } else if (x > lo) {
                c += kBinMass[i] * (x - lo) / (hi - lo);
            }
        }
        return c;
    }
};

} // namespace

PooledCdf pool_item(std::span<const double> weights, std::span<const QuantileTriple> triples,
                    const Range& range) {
    if (weights.size() != triples.size() || weights.empty()) {
        throw Error(Errc::DimensionMismatch, "pool_item weights vs assessments");
    }
    double wsum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw Error(Errc::InvalidEntry, "negative weight");
        wsum += w;
    }
    if (std::abs(wsum - 1.0) > 1e-9) {
        throw Error(Errc::InvalidEntry, "weights do not sum to 1");
    }

    std::vector<ExpertDensity> densities;
    densities.reserve(triples.size());
    std::set<double> xs;
    for (const auto& t : triples) {
        if (t.q05 < range.lo || t.q95 > range.hi) {
            throw Error(Errc::Validation, "assessment outside the pooled range");
        }
        densities.emplace_back(t, range);
        xs.insert({t.q05, t.q50, t.q95});
    }
    xs.insert(range.lo);
    xs.insert(range.hi);

    std::vector<PooledCdf::Knot> knots;
    knots.reserve(xs.size());
    for (double x : xs) {
        double below = 0.0, at = 0.0;
        for (std::size_t e = 0; e < densities.size(); ++e) {
            below += weights[e] * densities[e].cdf(x, true);
            at += weights[e] * densities[e].cdf(x, false);
        }
        knots.push_back({x, below, at});
    }
    return PooledCdf(std::move(knots));
}

double PooledCdf::cdf(double x) const {
    if (knots_.empty()) return 0.0;
    if (x < knots_.front().x) return 0.0;
    if (x >= knots_.back().x) return knots_.back().at;
    auto it = std::upper_bound(knots_.begin(), knots_.end(), x,
                               [](double v, const Knot& k) { return v < k.x; });
    const Knot& next = *it;
    const Knot& prev = *(it - 1);
    if (x == prev.x) return prev.at;
    const double t = (x - prev.x) / (next.x - prev.x);
    return prev.at + t * (next.below - prev.at);
}

double PooledCdf::inv(double u) const {
    if (knots_.empty()) throw Error(Errc::InvalidEntry, "empty pooled CDF");
    if (std::isnan(u) || u < 0.0 || u > 1.0) {
        throw Error(Errc::OutOfSupport, "inverse CDF argument outside [0,1]");
    }
    if (u <= 0.0) return knots_.front().x;
    if (u >= knots_.back().at) return knots_.back().x;
    // First knot whose right value reaches u.
    auto it = std::lower_bound(knots_.begin(), knots_.end(), u,
                               [](const Knot& k, double v) { return k.at < v; });
    const Knot& k = *it;
    if (u > k.below || it == knots_.begin()) return k.x; // inside the jump at k.x
    const Knot& prev = *(it - 1);
    if (u == k.below) return k.x;
    if (u == prev.at) return prev.x;
    const double mass = k.below - prev.at;
    if (mass <= 0.0) return k.x;
    return prev.x + (u - prev.at) / mass * (k.x - prev.x);
}

double PooledCdf::mean() const {
    double m = 0.0;
    for (std::size_t i = 0; i < knots_.size(); ++i) {
        const Knot& k = knots_[i];
        m += (k.at - k.below) * k.x; // point mass
        if (i + 1 < knots_.size()) {
            const Knot& n = knots_[i + 1];
            m += (n.below - k.at) * 0.5 * (k.x + n.x); // uniform segment
        }
    }
    return m;
}

double PooledCdf::total_mass() const { return knots_.empty() ? 0.0 : knots_.back().at; }

QuantileTriple PooledCdf::quantiles() const {
    return QuantileTriple{inv(0.05), inv(0.5), inv(0.95)};
}

const QuantileTriple& DecisionMaker::quantile_for(std::string_view question_id) const {
    for (std::size_t i = 0; i < question_ids.size(); ++i) {
        if (question_ids[i] == question_id) return quantiles[i];
    }
    throw Error(Errc::Validation, "decision maker has no question " + std::string(question_id));
}

const PooledCdf& DecisionMaker::density_for(std::string_view question_id) const {
    for (std::size_t i = 0; i < question_ids.size(); ++i) {
        if (question_ids[i] == question_id) return densities[i];
    }
    throw Error(Errc::Validation, "decision maker has no question " + std::string(question_id));
}

DecisionMaker build_decision_maker(const ElicitationStudy& study,
                                   std::span<const ExpertScore> weighted, double overshoot) {
    DecisionMaker dm;
    for (const auto& qd : collect_questions(study, overshoot)) {
        std::vector<double> weights;
        std::vector<QuantileTriple> triples;
        double wsum = 0.0;
        for (std::size_t i = 0; i < qd.assessors.size(); ++i) {
            for (const auto& s : weighted) {
                if (s.expert == qd.assessors[i]) {
                    weights.push_back(s.weight);
                    triples.push_back(qd.triples[i]);
                    wsum += s.weight;
                    break;
                }
            }
        }
        if (weights.empty() || wsum <= 0.0) {
            throw Error(Errc::AllExpertsExcluded,
                        "no weighted expert assessed " + qd.question->id);
        }
        for (double& w : weights) w /= wsum;
        PooledCdf pooled = pool_item(weights, triples, qd.range);
        dm.question_ids.push_back(qd.question->id);
        dm.quantiles.push_back(pooled.quantiles());
        dm.densities.push_back(std::move(pooled));
        dm.ranges.push_back(qd.range);
    }
    return dm;
}

DmScore score_decision_maker(const DecisionMaker& dm, const ElicitationStudy& study) {
    std::vector<QuantileTriple> triples;
    std::vector<double> realizations;
    std::vector<QuantileTriple> info_triples;
    std::vector<Range> info_ranges;
    for (std::size_t i = 0; i < dm.question_ids.size(); ++i) {
        const Question& q = study.question(dm.question_ids[i]);
        if (q.kind != QuestionKind::calibration) continue;
        triples.push_back(dm.quantiles[i]);
        realizations.push_back(*q.realization);
        info_triples.push_back(dm.quantiles[i]);
        info_ranges.push_back(dm.ranges[i]);
    }
    DmScore score;
    score.calibration = calibration_score(empirical_bins(triples, realizations), triples.size());
    score.information = information_score(info_triples, info_ranges);
    score.combined = score.calibration * score.information;
    return score;
}

OptimizedDm optimize_alpha(const ElicitationStudy& study, double overshoot) {
    const auto base = score_experts(study, overshoot);

    std::set<double> candidates{0.0};
    for (const auto& s : base) candidates.insert(s.calibration);

    OptimizedDm best;
    bool have_best = false;
    for (double alpha : candidates) { // ascending: ties keep the smaller cutoff
        std::vector<ExpertScore> weighted;
        try {
            weighted = global_weights(base, alpha);
        } catch (const Error& e) {
            if (e.code() == Errc::AllExpertsExcluded) continue;
            throw;
        }
        DecisionMaker dm = build_decision_maker(study, weighted, overshoot);
        DmScore score = score_decision_maker(dm, study);
        if (!have_best || score.combined > best.dm_score.combined) {
            best = OptimizedDm{alpha, std::move(weighted), std::move(dm), score};
            have_best = true;
        }
    }
    if (!have_best) throw Error(Errc::AllExpertsExcluded, "no feasible cutoff");
    return best;
}

} // namespace sej
