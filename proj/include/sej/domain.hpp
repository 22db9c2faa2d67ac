#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sej/error.hpp"

namespace sej {

// One expert's (5th, 50th, 95th) percentile judgement for one question.
// Equal values are allowed and denote a point judgement.
struct QuantileTriple {
    double q05 = 0.0;
    double q50 = 0.0;
    double q95 = 0.0;

    bool degenerate() const noexcept { return q05 == q95; }
    bool monotone() const noexcept { return q05 <= q50 && q50 <= q95; }

    friend bool operator==(const QuantileTriple&, const QuantileTriple&) = default;
};

// Throws NonMonotoneQuantiles naming `context` if q05 <= q50 <= q95 fails.
QuantileTriple checked_triple(double q05, double q50, double q95, const std::string& context);

enum class QuestionKind { calibration, target };

struct Question {
    std::string id;
    QuestionKind kind = QuestionKind::target;
    std::string units;
    std::optional<double> realization; // present iff kind == calibration

    friend bool operator==(const Question&, const Question&) = default;
};

// Ordered list of unique category names. The order is shared by every
// vector and matrix built over the set.
class CategorySet {
public:
    CategorySet() = default;
    explicit CategorySet(std::vector<std::string> names);

    std::size_t size() const noexcept { return names_.size(); }
    const std::vector<std::string>& names() const noexcept { return names_; }
    const std::string& name(std::size_t i) const { return names_.at(i); }

    std::optional<std::size_t> find(std::string_view name) const;
    // Throws UnknownCategory.
    std::size_t index_of(std::string_view name) const;

    friend bool operator==(const CategorySet&, const CategorySet&) = default;

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, std::size_t> index_;
};

// The ten CPI sub-food categories, in canonical order.
const CategorySet& brexit_categories();

// Named basket of weekly costs per category. Weights are derived by
// normalizing the cost vector; `total` is the quoted basket total and must
// agree with the cost sum to within a penny.
class BasketSpec {
public:
    BasketSpec() = default;
    // Throws InvalidEntry (negative cost), Validation (total mismatch, empty).
    BasketSpec(std::string name, std::map<std::string, double> costs, double total);

    const std::string& name() const noexcept { return name_; }
    const std::map<std::string, double>& costs() const noexcept { return costs_; }
    double total() const noexcept { return total_; }
    double cost_sum() const noexcept { return cost_sum_; }

    // Costs aligned to the category order. Throws Validation naming any
    // category the basket does not cover, or UnknownCategory for basket
    // entries outside the set.
    std::vector<double> aligned_costs(const CategorySet& categories) const;

    // Normalized weights (cost_i / sum of costs), aligned to the set order.
    std::vector<double> weights(const CategorySet& categories) const;

    friend bool operator==(const BasketSpec&, const BasketSpec&) = default;

private:
    std::string name_;
    std::map<std::string, double> costs_;
    double total_ = 0.0;
    double cost_sum_ = 0.0;
};

struct CorrelationEntry {
    std::string a;
    std::string b;
    double r = 0.0; // rank correlation in [-1, 1]

    friend bool operator==(const CorrelationEntry&, const CorrelationEntry&) = default;
};

// Named pairwise rank correlations; unlisted pairs default to 0.
class CorrelationSpec {
public:
    CorrelationSpec() = default;
    // Throws InvalidEntry (|r| > 1), SelfPair, DuplicatePair.
    explicit CorrelationSpec(std::vector<CorrelationEntry> entries);

    const std::vector<CorrelationEntry>& entries() const noexcept { return entries_; }

    friend bool operator==(const CorrelationSpec&, const CorrelationSpec&) = default;

private:
    std::vector<CorrelationEntry> entries_;
};

// The six pairwise correlations used for the Brexit food-price analysis.
CorrelationSpec brexit_correlations();

// Immutable experts x questions study. Calibration questions carry
// realizations; target questions do not.
class ElicitationStudy {
public:
    using AssessmentKey = std::pair<std::string, std::string>; // (expert, question)

    const std::vector<std::string>& experts() const noexcept { return experts_; }
    const std::vector<Question>& questions() const noexcept { return questions_; }
    const std::map<AssessmentKey, QuantileTriple>& assessments() const noexcept {
        return assessments_;
    }

    std::optional<QuantileTriple> assessment(std::string_view expert,
                                             std::string_view question) const;
    const Question& question(std::string_view id) const; // throws Validation

    std::vector<const Question*> calibration_questions() const;
    std::vector<const Question*> target_questions() const;

    // Missing target assessments are permitted; one note per gap.
    const std::vector<std::string>& warnings() const noexcept { return warnings_; }

    friend ElicitationStudy validate_study(std::vector<std::string>, std::vector<Question>,
                                           std::map<AssessmentKey, QuantileTriple>);

private:
    ElicitationStudy() = default;

    std::vector<std::string> experts_;
    std::vector<Question> questions_;
    std::map<AssessmentKey, QuantileTriple> assessments_;
    std::vector<std::string> warnings_;
};

// Validates raw study records into an ElicitationStudy. Throws EmptyStudy,
// MissingRealization, NonMonotoneQuantiles, MissingAssessment, Validation.
ElicitationStudy validate_study(
    std::vector<std::string> experts, std::vector<Question> questions,
    std::map<ElicitationStudy::AssessmentKey, QuantileTriple> assessments);

} // namespace sej
