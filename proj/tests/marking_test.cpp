#include <doctest.h>

#include <cmath>
#include <vector>

#include "dplb/errors.hpp"
#include "dplb/marking.hpp"
#include "dplb/mech.hpp"

using namespace dplb;
using namespace dplb::marking;

namespace {

CoalitionView make_view(std::vector<std::vector<int>> rows) {
    CoalitionView view;
    view.rows = BitMatrix(rows.size(), rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        view.member_ids.push_back(i);
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            view.rows(i, j) = static_cast<std::uint8_t>(rows[i][j]);
    }
    return view;
}

// independent re-computation with a plain double loop
double brute_violation_fraction(const CoalitionView& view, const BinaryWord& word) {
    std::size_t violations = 0;
    for (std::size_t j = 0; j < view.rows.cols(); ++j) {
        bool any_match = false;
        for (std::size_t i = 0; i < view.rows.rows(); ++i)
            any_match |= view.rows(i, j) == word[j];
        if (!any_match) ++violations;
    }
    return static_cast<double>(violations) / static_cast<double>(view.rows.cols());
}

}  // namespace

TEST_CASE("violation fraction basics") {
    const CoalitionView view = make_view({{0, 0}, {0, 1}});
    CHECK(marking_violation_fraction(view, view.rows.row_word(0)) == 0.0);
    CHECK(marking_violation_fraction(view, {1, 0}) == doctest::Approx(0.5));

    const CoalitionView solo = make_view({{1, 0, 1}});
    CHECK(marking_violation_fraction(solo, {0, 1, 0}) == doctest::Approx(1.0));

    CHECK_THROWS_AS(marking_violation_fraction(view, BinaryWord{1}), ConfigError);
}

TEST_CASE("violation fraction agrees with a brute-force double loop") {
    SplitRng rng(3);
    for (int round = 0; round < 50; ++round) {
        const std::size_t s = 1 + rng.below(4);
        const std::size_t d = 1 + rng.below(12);
        CoalitionView view;
        view.rows = BitMatrix(s, d);
        for (std::size_t i = 0; i < s; ++i) {
            view.member_ids.push_back(i);
            for (std::size_t j = 0; j < d; ++j) view.rows(i, j) = rng.bernoulli(0.5);
        }
        BinaryWord word(d);
        for (auto& bit : word) bit = rng.bernoulli(0.5);
        CHECK(marking_violation_fraction(view, word) ==
              doctest::Approx(brute_violation_fraction(view, word)));
    }
}

TEST_CASE("F_beta boundary is inclusive") {
    const CoalitionView view = make_view({{0, 0}, {0, 1}});
    CHECK(in_F_beta(view, view.rows.row_word(1), 1.0 / 75.0));
    CHECK(!in_F_beta(make_view({{1, 1}}), {0, 0}, 1.0 / 75.0));
    CHECK(in_F_beta(view, {1, 0}, 0.5));  // fraction exactly beta
    CHECK_THROWS_AS(in_F_beta(view, {1, 0}, 1.0), ConfigError);
}

TEST_CASE("biased mean fraction") {
    BitMatrix ones(3, 4, 1);
    CHECK(biased_mean_fraction(ones, 0.001) == 0.0);

    BitMatrix balanced(2, 1);
    balanced(0, 0) = 1;
    CHECK(biased_mean_fraction(balanced, 0.0) == 1.0);

    CHECK_THROWS_AS(biased_mean_fraction(BitMatrix(), 0.1), ConfigError);
    CHECK_THROWS_AS(biased_mean_fraction(ones, 0.6), ConfigError);
}

TEST_CASE("biased mean fraction is invariant under row and column permutations") {
    SplitRng rng(8);
    BitMatrix matrix(5, 9);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 9; ++j) matrix(i, j) = rng.bernoulli(0.4);
    const double baseline = biased_mean_fraction(matrix, 0.1);

    std::vector<std::size_t> rows{4, 2, 0, 1, 3};
    std::vector<std::size_t> cols{8, 0, 3, 1, 2, 7, 5, 6, 4};
    BitMatrix permuted(5, 9);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 9; ++j) permuted(i, j) = matrix(rows[i], cols[j]);
    CHECK(biased_mean_fraction(permuted, 0.1) == baseline);
}

TEST_CASE("round_to_binary uses a closed lower boundary at 1/2") {
    const std::vector<double> theta{0.5, 0.499, 1.2};
    CHECK(round_to_binary(theta) == BinaryWord{1, 0, 1});
    CHECK(round_to_binary(std::vector<double>(4, 0.0)) == BinaryWord{0, 0, 0, 0});
}

TEST_CASE("exact ERM on constant columns rounds back to the data bits") {
    erm::Dataset data;
    data.tag = erm::DomainTag::binary;
    data.points = Matrix(3, 4);
    for (std::size_t i = 0; i < 3; ++i) {
        data.points(i, 1) = 1.0;
        data.points(i, 3) = 1.0;
    }
    SplitRng rng(0);
    const auto theta = mech::exact_erm()->run(data, rng);
    CHECK(round_to_binary(theta) == BinaryWord{0, 1, 0, 1});
}

TEST_CASE("copy_first_row adversary never violates the marking condition") {
    const fpcode::CodeParams params = fpcode::derive_params_with_length(4, 0.1, 120);
    const SecurityStats stats =
        run_security_experiment(params, Adversary::copy_first_row(),
                                std::vector<std::size_t>{0, 1, 2}, 1.0 / 75.0, 25, SplitRng(7));
    CHECK(stats.trials == 25);
    for (const TrialRecord& record : stats.records) {
        CHECK(record.violation_fraction == 0.0);
        CHECK(record.in_f_beta);
    }
}

TEST_CASE("random_consistent adversary never violates the marking condition") {
    const fpcode::CodeParams params = fpcode::derive_params_with_length(4, 0.1, 120);
    const SecurityStats stats =
        run_security_experiment(params, Adversary::random_consistent(),
                                std::vector<std::size_t>{1, 3}, 1.0 / 75.0, 25, SplitRng(9));
    for (const TrialRecord& record : stats.records) CHECK(record.violation_fraction == 0.0);
}

TEST_CASE("security experiment is deterministic") {
    const fpcode::CodeParams params = fpcode::derive_params_with_length(4, 0.1, 200);
    const std::vector<std::size_t> coalition{0, 1, 2, 3};
    const SecurityStats a = run_security_experiment(params, Adversary::majority_vote(), coalition,
                                                    1.0 / 75.0, 30, SplitRng(101));
    const SecurityStats b = run_security_experiment(params, Adversary::majority_vote(), coalition,
                                                    1.0 / 75.0, 30, SplitRng(101));
    CHECK(a.completeness_failures == b.completeness_failures);
    CHECK(a.false_accusations == b.false_accusations);
    CHECK(a.mean_violation_fraction() == b.mean_violation_fraction());
    for (std::size_t t = 0; t < 30; ++t) CHECK(a.records[t].accused == b.records[t].accused);
}

TEST_CASE("mechanism_round adversary runs the reduction end to end") {
    const fpcode::CodeParams params = fpcode::derive_params_with_length(6, 0.1, 80);
    const Adversary adversary =
        Adversary::mechanism_round(mech::gaussian_mean({1.0, 1e-6}));
    const SecurityStats stats = run_security_experiment(
        params, adversary, std::vector<std::size_t>{0, 1, 2, 3, 4, 5}, 1.0 / 75.0, 10, SplitRng(3));
    CHECK(stats.trials == 10);
    CHECK(stats.records.size() == 10);
    for (const TrialRecord& record : stats.records) {
        CHECK(record.violation_fraction >= 0.0);
        CHECK(record.violation_fraction <= 1.0);
    }
}

TEST_CASE("experiment input validation") {
    const fpcode::CodeParams params = fpcode::derive_params_with_length(4, 0.1, 60);
    CHECK_THROWS_AS(run_security_experiment(params, Adversary::majority_vote(),
                                            std::vector<std::size_t>{}, 0.0, 5, SplitRng(0)),
                    ConfigError);
    CHECK_THROWS_AS(run_security_experiment(params, Adversary::majority_vote(),
                                            std::vector<std::size_t>{0}, 0.0, 0, SplitRng(0)),
                    ConfigError);
    CHECK_THROWS_AS(Adversary::mechanism_round(nullptr), ConfigError);
    CHECK_THROWS_AS(adversary_from_string("nope"), ConfigError);
}
