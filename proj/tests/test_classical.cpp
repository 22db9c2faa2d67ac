#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "oracles.hpp"
#include "sej/classical.hpp"

using namespace sej;

TEST_CASE("chi-square(3) survival function") {
    CHECK(chi2_sf_df3(0.0) == 1.0);
    CHECK_THROWS_AS(chi2_sf_df3(-0.1), Error);
    // standard critical value
    CHECK(chi2_sf_df3(7.8147) == doctest::Approx(0.05).epsilon(1e-3));
    // against the quadrature oracle on a grid
    for (double x : {0.01, 0.1, 0.25, 0.5, 0.888, 1.0, 1.5, 2.0, 3.0, 4.0,
                     5.0, 6.0, 7.8147, 9.0, 11.0, 14.0, 18.0, 25.0, 35.0, 50.0}) {
        CHECK(chi2_sf_df3(x) ==
              doctest::Approx(oracles::chi2_sf_df3_quadrature(x)).epsilon(1e-6));
    }
}

TEST_CASE("empirical bins") {
    SUBCASE("counts split 1/4/4/1 over ten items") {
        std::vector<QuantileTriple> t(10, {0, 50, 100});
        const std::vector<double> r = {-5, 10, 20, 30, 40, 60, 70, 80, 90, 105};
        const auto s = empirical_bins(t, r);
        CHECK(s[0] == doctest::Approx(0.1));
        CHECK(s[1] == doctest::Approx(0.4));
        CHECK(s[2] == doctest::Approx(0.4));
        CHECK(s[3] == doctest::Approx(0.1));
    }
    SUBCASE("all realizations above q95") {
        std::vector<QuantileTriple> t(4, {0, 1, 2});
        const std::vector<double> r = {3, 4, 5, 6};
        const auto s = empirical_bins(t, r);
        CHECK(s == std::array<double, 4>{0, 0, 0, 1});
    }
    SUBCASE("a tie goes to the lower bin") {
        const std::vector<QuantileTriple> t = {{0, 5, 10}};
        const auto s = empirical_bins(t, std::vector<double>{5.0});
        CHECK(s[1] == 1.0); // at q50: second bin, not third
        const auto s2 = empirical_bins(t, std::vector<double>{0.0});
        CHECK(s2[0] == 1.0); // at q05: first bin
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(empirical_bins({}, {}), Error);
        const std::vector<QuantileTriple> t = {{0, 5, 10}};
        CHECK_THROWS_AS(empirical_bins(t, std::vector<double>{1.0, 2.0}), Error);
    }
}

TEST_CASE("calibration score") {
    SUBCASE("perfect calibration scores exactly one") {
        CHECK(calibration_score({0.05, 0.45, 0.45, 0.05}, 20) == 1.0);
        CHECK(calibration_score({0.05, 0.45, 0.45, 0.05}, 400) == 1.0);
    }
    SUBCASE("frozen oracle values") {
        // KL((0.1,0.4,0.4,0.1) || p) = 0.0444030076, 2*10*KL = 0.8880601517
        CHECK(calibration_score({0.1, 0.4, 0.4, 0.1}, 10) ==
              doctest::Approx(0.828308171679).epsilon(1e-6));
        CHECK(calibration_score({0, 0, 0, 1}, 10) < 1e-12);
    }
    SUBCASE("strictly decreasing in divergence") {
        const double near = calibration_score({0.06, 0.45, 0.44, 0.05}, 10);
        const double far = calibration_score({0.2, 0.35, 0.35, 0.1}, 10);
        const double worse = calibration_score({0.4, 0.2, 0.2, 0.2}, 10);
        CHECK(near > far);
        CHECK(far > worse);
    }
    SUBCASE("more items sharpen the test") {
        CHECK(calibration_score({0.1, 0.4, 0.4, 0.1}, 40) <
              calibration_score({0.1, 0.4, 0.4, 0.1}, 10));
    }
}

TEST_CASE("intrinsic range") {
    const std::vector<QuantileTriple> one = {{0, 6, 26}};
    auto r = intrinsic_range(one, std::nullopt, 0.1);
    CHECK(r.lo == doctest::Approx(-2.6).epsilon(1e-12));
    CHECK(r.hi == doctest::Approx(28.6).epsilon(1e-12));

    const std::vector<QuantileTriple> two = {{-5, 0, 5}, {0, 5, 10}};
    r = intrinsic_range(two, std::nullopt, 0.1);
    CHECK(r.lo == doctest::Approx(-6.5).epsilon(1e-12));
    CHECK(r.hi == doctest::Approx(11.5).epsilon(1e-12));

    // the realization stretches the range
    r = intrinsic_range(two, 20.0, 0.1);
    CHECK(r.hi == doctest::Approx(20.0 + 2.5).epsilon(1e-12));

    // degenerate spread
    const std::vector<QuantileTriple> point = {{7, 7, 7}};
    r = intrinsic_range(point, std::nullopt, 0.1);
    CHECK(r.lo == 6.0);
    CHECK(r.hi == 8.0);
}

TEST_CASE("information score") {
    SUBCASE("density equal to the background scores zero") {
        // quantiles cut [0, 1] into widths (0.05, 0.45, 0.45, 0.05)
        const double v = information_score_item({0.05, 0.5, 0.95}, {0.0, 1.0});
        CHECK(v == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("frozen hand-arithmetic value") {
        CHECK(information_score_item({0, 6, 26}, {-2.6, 28.6}) ==
              doctest::Approx(0.17226551210937877).epsilon(1e-9));
    }
    SUBCASE("narrower quantiles on the same range are more informative") {
        const Range range{-2.6, 28.6};
        const double wide = information_score_item({0, 6, 26}, range);
        const double narrow = information_score_item({3, 6, 9}, range);
        const double narrower = information_score_item({5, 6, 7}, range);
        CHECK(narrow > wide);
        CHECK(narrower > narrow);
    }
    SUBCASE("degenerate judgement stays finite") {
        const double v = information_score_item({5, 5, 5}, {0.0, 10.0});
        CHECK(std::isfinite(v));
        CHECK(v > information_score_item({4, 5, 6}, {0.0, 10.0}));
    }
    SUBCASE("affine invariance") {
        std::mt19937_64 rng(31);
        std::uniform_real_distribution<double> unif(-10.0, 10.0);
        std::uniform_real_distribution<double> scale(0.25, 4.0);
        for (int trial = 0; trial < 100; ++trial) {
            double q[3] = {unif(rng), unif(rng), unif(rng)};
            std::sort(q, q + 3);
            const QuantileTriple t{q[0], q[1], q[2]};
            const Range range = intrinsic_range(std::vector{t}, std::nullopt, 0.1);
            const double a = scale(rng), b = unif(rng);
            const QuantileTriple ts{a * q[0] + b, a * q[1] + b, a * q[2] + b};
            const Range ranges{a * range.lo + b, a * range.hi + b};
            CHECK(information_score_item(ts, ranges) ==
                  doctest::Approx(information_score_item(t, range)).epsilon(1e-9));
        }
    }
    SUBCASE("mean over items and the missing-assessment error") {
        const std::vector<QuantileTriple> ts = {{0, 6, 26}, {0.05, 0.5, 0.95}};
        const std::vector<Range> rs = {{-2.6, 28.6}, {0.0, 1.0}};
        CHECK(information_score(ts, rs) ==
              doctest::Approx(0.5 * 0.17226551210937877).epsilon(1e-9));
        CHECK_THROWS_AS(information_score(std::span(ts).first(1), rs), Error);
    }
}

namespace {

std::vector<ExpertScore> two_experts(double c1, double i1, double c2, double i2) {
    return {{"A", c1, i1, 0, 0}, {"B", c2, i2, 0, 0}};
}

} // namespace

TEST_CASE("global weights") {
    SUBCASE("proportional to combined score") {
        const auto w = global_weights(two_experts(1.0, 2.0, 1.0, 1.0), 0.0);
        CHECK(w[0].weight == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
        CHECK(w[1].weight == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    }
    SUBCASE("cutoff excludes poorly calibrated experts") {
        const auto w = global_weights(two_experts(0.9, 1.0, 0.1, 50.0), 0.5);
        CHECK(w[0].weight == 1.0);
        CHECK(w[1].weight == 0.0);
    }
    SUBCASE("every expert below the cutoff is an error") {
        try {
            global_weights(two_experts(0.1, 1.0, 0.2, 1.0), 0.5);
            FAIL("expected AllExpertsExcluded");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::AllExpertsExcluded);
            CHECK(e.exit_code() == 3);
        }
    }
    SUBCASE("identical experts share weight equally") {
        const auto w = global_weights(two_experts(0.7, 1.3, 0.7, 1.3), 0.0);
        CHECK(w[0].weight == doctest::Approx(0.5));
        CHECK(w[1].weight == doctest::Approx(0.5));
    }
    SUBCASE("invariant under scaling every combined score") {
        const auto w1 = global_weights(two_experts(0.8, 1.0, 0.4, 3.0), 0.0);
        const auto w2 = global_weights(two_experts(0.8, 7.0, 0.4, 21.0), 0.0);
        CHECK(w1[0].weight == doctest::Approx(w2[0].weight).epsilon(1e-12));
    }
    SUBCASE("zero combined scores fall back to equal weight") {
        const auto w = global_weights(two_experts(0.5, 0.0, 0.5, 0.0), 0.0);
        CHECK(w[0].weight == 0.5);
        CHECK(w[1].weight == 0.5);
    }
}

TEST_CASE("pooling one item") {
    SUBCASE("single expert with weight one reproduces its quantiles") {
        const QuantileTriple t{-3, 4, 12};
        const Range range = intrinsic_range(std::vector{t}, std::nullopt, 0.1);
        const auto pooled = pool_item(std::vector{1.0}, std::vector{t}, range);
        const auto q = pooled.quantiles();
        CHECK(q.q05 == doctest::Approx(t.q05).epsilon(1e-9));
        CHECK(q.q50 == doctest::Approx(t.q50).epsilon(1e-9));
        CHECK(q.q95 == doctest::Approx(t.q95).epsilon(1e-9));
        CHECK(pooled.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("two identical experts pool to the same distribution") {
        const QuantileTriple t{-3, 4, 12};
        const Range range = intrinsic_range(std::vector{t, t}, std::nullopt, 0.1);
        const auto pooled = pool_item(std::vector{0.3, 0.7}, std::vector{t, t}, range);
        const auto q = pooled.quantiles();
        CHECK(q.q05 == doctest::Approx(t.q05).epsilon(1e-9));
        CHECK(q.q50 == doctest::Approx(t.q50).epsilon(1e-9));
        CHECK(q.q95 == doctest::Approx(t.q95).epsilon(1e-9));
    }
    SUBCASE("disjoint experts against the mixture-sampling oracle") {
        const std::vector<QuantileTriple> experts = {{-5, 0, 5}, {10, 15, 20}};
        const std::vector<double> w = {0.5, 0.5};
        const Range range = intrinsic_range(experts, std::nullopt, 0.1);
        const auto pooled = pool_item(w, experts, range);
        const auto q = pooled.quantiles();
        // Frozen from mixture_quantiles_by_sampling with 1e7 draws, seed
        // 424242: (-4.537576, 7.481545, 19.538042). Tolerances are ~4
        // standard errors of that oracle; the density is nearly flat at
        // the mixture median, so its standard error dominates.
        CHECK(std::abs(q.q05 - (-4.537576)) < 0.01);
        CHECK(std::abs(q.q50 - 7.481545) < 0.25);
        CHECK(std::abs(q.q95 - 19.538042) < 0.01);
        // pooled q05 sits below both medians
        CHECK(q.q05 < 0.0);
        CHECK(q.q05 < 15.0);
    }
    SUBCASE("pooled mean equals the weighted expert means") {
        const std::vector<QuantileTriple> experts = {{-5, 0, 5}, {2, 6, 14}};
        const std::vector<double> w = {0.25, 0.75};
        const Range range = intrinsic_range(experts, std::nullopt, 0.1);
        const auto pooled = pool_item(w, experts, range);
        auto expert_mean = [&](const QuantileTriple& t) {
            const double knots[5] = {range.lo, t.q05, t.q50, t.q95, range.hi};
            double m = 0.0;
            for (int i = 0; i < 4; ++i) m += kBinMass[i] * 0.5 * (knots[i] + knots[i + 1]);
            return m;
        };
        const double expected = w[0] * expert_mean(experts[0]) + w[1] * expert_mean(experts[1]);
        CHECK(pooled.mean() == doctest::Approx(expected).epsilon(1e-9));
    }
    SUBCASE("pooled CDF is monotone from zero to one") {
        const std::vector<QuantileTriple> experts = {{-5, 0, 5}, {0, 0, 0}, {2, 6, 14}};
        const Range range = intrinsic_range(experts, std::nullopt, 0.1);
        const auto pooled =
            pool_item(std::vector{0.2, 0.5, 0.3}, experts, range);
        double prev = 0.0;
        for (int i = 0; i <= 200; ++i) {
            const double x = range.lo + (range.hi - range.lo) * i / 200.0;
            const double c = pooled.cdf(x);
            CHECK(c >= prev - 1e-12);
            prev = c;
        }
        CHECK(pooled.cdf(range.lo) == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(pooled.cdf(range.hi) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("weights must sum to one") {
        const std::vector<QuantileTriple> experts = {{-5, 0, 5}};
        CHECK_THROWS_AS(
            pool_item(std::vector{0.5}, experts, intrinsic_range(experts, std::nullopt, 0.1)),
            Error);
    }
}

TEST_CASE("equal-weight DM density is the average of expert densities") {
    const std::vector<QuantileTriple> experts = {{-5, 0, 5}, {-2, 3, 9}, {1, 4, 6}};
    const Range range = intrinsic_range(experts, std::nullopt, 0.1);
    const std::vector<double> w(3, 1.0 / 3.0);
    const auto pooled = pool_item(w, experts, range);
    for (int i = 0; i <= 50; ++i) {
        const double x = range.lo + (range.hi - range.lo) * i / 50.0;
        double avg = 0.0;
        for (const auto& t : experts) {
            const auto single = pool_item(std::vector{1.0}, std::vector{t}, range);
            avg += single.cdf(x) / 3.0;
        }
        CHECK(pooled.cdf(x) == doctest::Approx(avg).epsilon(1e-9));
    }
}

namespace {

ElicitationStudy perfect_and_terrible() {
    // X1 is perfectly calibrated over 20 questions (bins 1/9/9/1) with
    // moderate intervals. X2 puts extremely narrow intervals in the wrong
    // place: huge information, hopeless calibration.
    std::vector<std::string> experts = {"X1", "X2"};
    std::vector<Question> questions;
    std::map<ElicitationStudy::AssessmentKey, QuantileTriple> assessments;
    for (int i = 0; i < 20; ++i) {
        const double r = static_cast<double>(i);
        questions.push_back(
            {"C" + std::to_string(i + 1), QuestionKind::calibration, "units", r});
        QuantileTriple good{};
        if (i == 0) {
            good = {r + 1, r + 2, r + 3}; // realization below q05
        } else if (i < 10) {
            good = {r - 2, r + 1, r + 4}; // bin 2
        } else if (i < 19) {
            good = {r - 4, r - 1, r + 2}; // bin 3
        } else {
            good = {r - 3, r - 2, r - 1}; // above q95
        }
        assessments.emplace(std::make_pair("X1", questions.back().id), good);
        assessments.emplace(std::make_pair("X2", questions.back().id),
                            QuantileTriple{r + 5.0, r + 5.001, r + 5.002});
    }
    return validate_study(std::move(experts), std::move(questions), std::move(assessments));
}

} // namespace

TEST_CASE("scoring a study") {
    const auto study = perfect_and_terrible();
    const auto scores = score_experts(study);
    REQUIRE(scores.size() == 2);
    CHECK(scores[0].expert == "X1");
    CHECK(scores[0].calibration == 1.0); // bins exactly (0.05, 0.45, 0.45, 0.05)
    CHECK(scores[1].calibration < 1e-6);
    CHECK(scores[1].information > scores[0].information);
}

TEST_CASE("optimized decision maker") {
    SUBCASE("single-expert study: DM equals the expert") {
        const auto study = validate_study(
            {"E1"},
            {{"C1", QuestionKind::calibration, "percent", 3.0},
             {"T1", QuestionKind::target, "percent", std::nullopt}},
            {{{"E1", "C1"}, {0, 5, 10}}, {{"E1", "T1"}, {-2, 4, 9}}});
        const auto result = optimize_alpha(study);
        const auto& q = result.dm.quantile_for("T1");
        CHECK(q.q05 == doctest::Approx(-2).epsilon(1e-9));
        CHECK(q.q50 == doctest::Approx(4).epsilon(1e-9));
        CHECK(q.q95 == doctest::Approx(9).epsilon(1e-9));
    }
    SUBCASE("the candidate search matches exhaustive evaluation") {
        const auto study = perfect_and_terrible();
        const auto base = score_experts(study);
        REQUIRE(base[0].calibration == 1.0);
        REQUIRE(base[1].calibration < 1e-6); // hopeless but highly informative
        REQUIRE(base[1].information > 5.0);

        const auto result = optimize_alpha(study);
        // Exhaustive evaluation over {0} + {C_e}, ascending, strictly-better
        // wins: the oracle for both the score and the tie rule.
        std::set<double> candidates{0.0, base[0].calibration, base[1].calibration};
        double best = -1.0, best_alpha = 0.0;
        for (double alpha : candidates) {
            std::vector<ExpertScore> weighted;
            try {
                weighted = global_weights(base, alpha);
            } catch (const Error&) {
                continue;
            }
            const auto dm = build_decision_maker(study, weighted);
            const double combined = score_decision_maker(dm, study).combined;
            if (combined > best) {
                best = combined;
                best_alpha = alpha;
            }
        }
        CHECK(result.dm_score.combined == best);
        CHECK(result.alpha == best_alpha);
        // Whenever the chosen cutoff is above the bad expert's calibration,
        // its weight is exactly zero.
        if (result.alpha > base[1].calibration) {
            for (const auto& s : result.scores) {
                if (s.expert == "X2") CHECK(s.weight == 0.0);
            }
        }
    }
    SUBCASE("a positive cutoff actually fires on plausible panels") {
        int positive = 0;
        for (std::uint64_t seed = 1; seed <= 30; ++seed) {
            const auto study = oracles::random_study(seed, 5, 10, 2);
            const auto result = optimize_alpha(study);
            double weight_sum = 0.0;
            for (const auto& s : result.scores) weight_sum += s.weight;
            CHECK(weight_sum == doctest::Approx(1.0).epsilon(1e-12));
            if (result.alpha > 0.0) {
                ++positive;
                // the cutoff must exclude someone, or it would tie with 0
                bool excluded = false;
                for (const auto& s : result.scores) excluded |= (s.weight == 0.0);
                CHECK(excluded);
            }
        }
        CHECK(positive > 0);
    }
    SUBCASE("optimal score is at least the fully inclusive score") {
        for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 4ULL, 5ULL, 6ULL, 7ULL, 8ULL}) {
            const auto study = oracles::random_study(seed, 4, 12, 2);
            const auto result = optimize_alpha(study);
            const auto at_zero = global_weights(score_experts(study), 0.0);
            const auto dm0 = build_decision_maker(study, at_zero);
            CHECK(result.dm_score.combined >=
                  score_decision_maker(dm0, study).combined - 1e-12);
        }
    }
    SUBCASE("ties break toward the smaller cutoff") {
        // Two identical experts: every candidate cutoff gives the same DM.
        std::map<ElicitationStudy::AssessmentKey, QuantileTriple> assessments;
        std::vector<Question> questions;
        for (int i = 0; i < 4; ++i) {
            questions.push_back(
                {"C" + std::to_string(i), QuestionKind::calibration, "u", 2.0 * i});
            for (const char* e : {"A", "B"}) {
                assessments.emplace(std::make_pair(std::string(e), questions.back().id),
                                    QuantileTriple{2.0 * i - 2, 2.0 * i, 2.0 * i + 2});
            }
        }
        const auto study = validate_study({"A", "B"}, questions, assessments);
        CHECK(optimize_alpha(study).alpha == 0.0);
    }
}

TEST_CASE("decision maker over incomplete target assessments") {
    // E2 skipped the target; pooling renormalizes over E1 alone.
    const auto study = validate_study(
        {"E1", "E2"},
        {{"C1", QuestionKind::calibration, "percent", 3.0},
         {"T1", QuestionKind::target, "percent", std::nullopt}},
        {{{"E1", "C1"}, {0, 5, 10}},
         {{"E2", "C1"}, {1, 4, 11}},
         {{"E1", "T1"}, {-2, 4, 9}}});
    const auto weighted = global_weights(score_experts(study), 0.0);
    const auto dm = build_decision_maker(study, weighted);
    const auto& q = dm.quantile_for("T1");
    CHECK(q.q05 == doctest::Approx(-2).epsilon(1e-9));
    CHECK(q.q95 == doctest::Approx(9).epsilon(1e-9));
}
