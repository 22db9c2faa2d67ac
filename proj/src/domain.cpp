#include "sej/domain.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace sej {

QuantileTriple checked_triple(double q05, double q50, double q95, const std::string& context) {
    QuantileTriple t{q05, q50, q95};
    if (!std::isfinite(q05) || !std::isfinite(q50) || !std::isfinite(q95)) {
        throw Error(Errc::InvalidEntry, "non-finite quantile in " + context);
    }
    if (!t.monotone()) {
        throw Error(Errc::NonMonotoneQuantiles, context);
    }
    return t;
}

CategorySet::CategorySet(std::vector<std::string> names) : names_(std::move(names)) {
    if (names_.empty()) {
        throw Error(Errc::Validation, "category set is empty");
    }
    for (std::size_t i = 0; i < names_.size(); ++i) {
        if (names_[i].empty()) {
            throw Error(Errc::Validation, "empty category name");
        }
        auto [it, inserted] = index_.emplace(names_[i], i);
        if (!inserted) {
            throw Error(Errc::Validation, "duplicate category name " + names_[i]);
        }
    }
}

std::optional<std::size_t> CategorySet::find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::size_t CategorySet::index_of(std::string_view name) const {
    auto i = find(name);
    if (!i) throw Error(Errc::UnknownCategory, std::string(name));
    return *i;
}

const CategorySet& brexit_categories() {
    static const CategorySet set{{
        "SoftDrinks", "CoffeeTeaCocoa", "SugarJam", "Vegetables", "Fruit",
        "OilsFats", "MilkCheeseEggs", "Fish", "Meat", "BreadCereals",
    }};
    return set;
}

BasketSpec::BasketSpec(std::string name, std::map<std::string, double> costs, double total)
    : name_(std::move(name)), costs_(std::move(costs)), total_(total) {
    if (name_.empty()) throw Error(Errc::Validation, "basket name is empty");
    if (costs_.empty()) throw Error(Errc::Validation, "basket " + name_ + " has no costs");
    double sum = 0.0;
    for (const auto& [cat, cost] : costs_) {
        if (!std::isfinite(cost) || cost < 0.0) {
            throw Error(Errc::InvalidEntry, "basket " + name_ + ": negative cost for " + cat);
        }
        sum += cost;
    }
    cost_sum_ = sum;
    if (!std::isfinite(total_) || std::abs(sum - total_) > 0.01) {
        throw Error(Errc::Validation, "basket " + name_ + ": costs sum to " + std::to_string(sum) +
                                          " but total is " + std::to_string(total_));
    }
    if (sum <= 0.0) {
        throw Error(Errc::Validation, "basket " + name_ + ": cost sum is not positive");
    }
}

std::vector<double> BasketSpec::aligned_costs(const CategorySet& categories) const {
    for (const auto& [cat, cost] : costs_) {
        if (!categories.find(cat)) {
            throw Error(Errc::UnknownCategory, "basket " + name_ + " references " + cat);
        }
    }
    std::vector<double> out(categories.size(), 0.0);
    for (std::size_t i = 0; i < categories.size(); ++i) {
        auto it = costs_.find(categories.name(i));
        if (it == costs_.end()) {
            throw Error(Errc::Validation,
                        "basket " + name_ + " does not cover " + categories.name(i));
        }
        out[i] = it->second;
    }
    return out;
}

std::vector<double> BasketSpec::weights(const CategorySet& categories) const {
    std::vector<double> w = aligned_costs(categories);
    double sum = 0.0;
    for (double c : w) sum += c;
    for (double& c : w) c /= sum;
    return w;
}

CorrelationSpec::CorrelationSpec(std::vector<CorrelationEntry> entries)
    : entries_(std::move(entries)) {
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& e : entries_) {
        if (!std::isfinite(e.r) || std::abs(e.r) > 1.0) {
            throw Error(Errc::InvalidEntry,
                        "correlation (" + e.a + ", " + e.b + ") = " + std::to_string(e.r));
        }
        if (e.a == e.b) {
            throw Error(Errc::SelfPair, e.a);
        }
        auto key = std::minmax(e.a, e.b);
        if (!seen.insert({key.first, key.second}).second) {
            throw Error(Errc::DuplicatePair, "(" + e.a + ", " + e.b + ")");
        }
    }
}

CorrelationSpec brexit_correlations() {
    return CorrelationSpec{{
        {"Vegetables", "Fruit", 0.75},
        {"Meat", "BreadCereals", 0.4},
        {"Meat", "SugarJam", 0.4},
        {"MilkCheeseEggs", "Meat", 0.4},
        {"BreadCereals", "SugarJam", 0.72},
        {"SugarJam", "SoftDrinks", 0.3},
    }};
}

std::optional<QuantileTriple> ElicitationStudy::assessment(std::string_view expert,
                                                           std::string_view question) const {
    auto it = assessments_.find({std::string(expert), std::string(question)});
    if (it == assessments_.end()) return std::nullopt;
    return it->second;
}

const Question& ElicitationStudy::question(std::string_view id) const {
    for (const auto& q : questions_) {
        if (q.id == id) return q;
    }
    throw Error(Errc::Validation, "unknown question " + std::string(id));
}

std::vector<const Question*> ElicitationStudy::calibration_questions() const {
    std::vector<const Question*> out;
    for (const auto& q : questions_) {
        if (q.kind == QuestionKind::calibration) out.push_back(&q);
    }
    return out;
}

std::vector<const Question*> ElicitationStudy::target_questions() const {
    std::vector<const Question*> out;
    for (const auto& q : questions_) {
        if (q.kind == QuestionKind::target) out.push_back(&q);
    }
    return out;
}

ElicitationStudy validate_study(
    std::vector<std::string> experts, std::vector<Question> questions,
    std::map<ElicitationStudy::AssessmentKey, QuantileTriple> assessments) {
    if (experts.empty()) throw Error(Errc::EmptyStudy, "no experts");

    std::set<std::string> expert_ids;
    for (const auto& e : experts) {
        if (e.empty()) throw Error(Errc::Validation, "empty expert id");
        if (!expert_ids.insert(e).second) throw Error(Errc::Validation, "duplicate expert " + e);
    }

    std::size_t n_calibration = 0;
    std::set<std::string> question_ids;
    for (const auto& q : questions) {
        if (q.id.empty()) throw Error(Errc::Validation, "empty question id");
        if (!question_ids.insert(q.id).second) {
            throw Error(Errc::Validation, "duplicate question " + q.id);
        }
        if (q.kind == QuestionKind::calibration) {
            ++n_calibration;
            if (!q.realization) throw Error(Errc::MissingRealization, q.id);
            if (!std::isfinite(*q.realization)) {
                throw Error(Errc::InvalidEntry, "non-finite realization for " + q.id);
            }
        } else if (q.realization) {
            throw Error(Errc::Validation, "target question " + q.id + " carries a realization");
        }
    }
    if (n_calibration == 0) throw Error(Errc::EmptyStudy, "no calibration questions");

    for (const auto& [key, triple] : assessments) {
        const auto& [expert, question] = key;
        if (!expert_ids.count(expert)) {
            throw Error(Errc::Validation, "assessment by unknown expert " + expert);
        }
        if (!question_ids.count(question)) {
            throw Error(Errc::Validation, "assessment for unknown question " + question);
        }
        checked_triple(triple.q05, triple.q50, triple.q95, expert + "/" + question);
    }

    ElicitationStudy study;
    study.experts_ = std::move(experts);
    study.questions_ = std::move(questions);
    study.assessments_ = std::move(assessments);

    for (const auto& e : study.experts_) {
        for (const auto& q : study.questions_) {
            if (study.assessments_.count({e, q.id})) continue;
            if (q.kind == QuestionKind::calibration) {
                throw Error(Errc::MissingAssessment, e + " has no assessment for " + q.id);
            }
            study.warnings_.push_back("missing target assessment: " + e + "/" + q.id);
        }
    }
    return study;
}

} // namespace sej
