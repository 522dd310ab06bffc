#include <doctest.h>

#include <cmath>
#include <vector>

#include "dplb/errors.hpp"
#include "dplb/fpcode.hpp"
#include "dplb/rng.hpp"

using namespace dplb;
using namespace dplb::fpcode;

TEST_CASE("derive_params evaluates the stated formulas") {
    const CodeParams params = derive_params(4, 0.1);
    CHECK(params.d_core == 5903);  // ceil(1600*ln(40))
    CHECK(params.d_total() == 5 * 5903);
    CHECK(params.bias_floor == doctest::Approx(1.0 / 1200.0).epsilon(1e-12));
    CHECK(params.trace_threshold == doctest::Approx(80.0 * std::log(40.0)).epsilon(1e-12));
    CHECK(!params.d_overridden);

    const CodeParams small = derive_params(2, 1.0);
    CHECK(small.d_core == 278);  // ceil(400*ln(2))

    // sin^2(t') recovers t
    const double s = std::sin(params.bias_angle);
    CHECK(std::abs(s * s - params.bias_floor) < 1e-12);
}

TEST_CASE("derive_params rejects bad inputs") {
    CHECK_THROWS_AS(derive_params(1, 0.5), ConfigError);
    CHECK_THROWS_AS(derive_params(4, 0.0), ConfigError);
    CHECK_THROWS_AS(derive_params(4, 1.5), ConfigError);
    CHECK_THROWS_AS(derive_params_with_length(4, 0.1, 0), ConfigError);
    CHECK(derive_params_with_length(4, 0.1, 100).d_overridden);
}

TEST_CASE("gen_core respects the probability floor and the seed") {
    const CodeParams params = derive_params_with_length(3, 0.2, 500);
    SplitRng rng_a(99);
    SplitRng rng_b(99);
    const CoreCode a = gen_core(params, rng_a);
    const CoreCode b = gen_core(params, rng_b);
    CHECK(a.bits == b.bits);
    CHECK(a.column_probs == b.column_probs);
    CHECK(a.bits.rows() == 3);
    CHECK(a.bits.cols() == 500);
    for (const double p : a.column_probs) {
        CHECK(p >= params.bias_floor);
        CHECK(p <= 1.0 - params.bias_floor);
    }
}

TEST_CASE("column probabilities average to 1/2") {
    const CodeParams params = derive_params_with_length(2, 0.5, 100000);
    SplitRng rng(17);
    const CoreCode core = gen_core(params, rng);
    double sum = 0.0;
    for (const double p : core.column_probs) sum += p;
    CHECK(std::abs(sum / 100000.0 - 0.5) < 0.01);
}

TEST_CASE("augment appends 4d dummy columns and round-trips") {
    const CodeParams params = derive_params_with_length(4, 0.1, 200);
    SplitRng rng(5);
    const CoreCode core = gen_core(params, rng);
    SplitRng perm_rng(6);
    const auto [codebook, secret] = augment(core, perm_rng);

    CHECK(codebook.bits.cols() == 5 * 200);
    CHECK(codebook.bits.rows() == 4);
    CHECK(secret.perm.size() == 1000);
    CHECK(secret.dummy_marks.size() == 1000);

    std::size_t real_count = 0, zero_count = 0, one_count = 0;
    for (std::size_t pos = 0; pos < 1000; ++pos) {
        switch (secret.dummy_marks[pos]) {
            case DummyMark::real: ++real_count; break;
            case DummyMark::zero: ++zero_count; break;
            case DummyMark::one: ++one_count; break;
        }
        const std::uint8_t expected =
            secret.dummy_marks[pos] == DummyMark::one ? 1 : 0;
        if (secret.dummy_marks[pos] != DummyMark::real)
            for (std::size_t i = 0; i < 4; ++i) CHECK(codebook.bits(i, pos) == expected);
    }
    CHECK(real_count == 200);
    CHECK(zero_count == 400);
    CHECK(one_count == 400);

    const CoreCode recovered = recover_core(codebook, secret);
    CHECK(recovered.bits == core.bits);
    CHECK(recovered.column_probs == core.column_probs);
}

TEST_CASE("gen is deterministic end to end") {
    const CodeParams params = derive_params_with_length(4, 0.1, 128);
    SplitRng a(123), b(123);
    const auto [cb1, s1] = gen(params, a);
    const auto [cb2, s2] = gen(params, b);
    CHECK(cb1.bits == cb2.bits);
    CHECK(s1.perm == s2.perm);
    CHECK(s1.column_probs == s2.column_probs);
}

TEST_CASE("all-zero word traces to nobody") {
    const CodeParams params = derive_params_with_length(4, 0.1, 64);
    SplitRng rng(1);
    const CoreCode core = gen_core(params, rng);
    SplitRng trace_rng(2);
    const Accusation result = trace_core(core, BinaryWord(64, 0), trace_rng);
    CHECK(!result.accused.has_value());
    CHECK(result.accused_set.empty());
    for (const double s : result.scores) CHECK(s == 0.0);
}

TEST_CASE("word length mismatch is rejected") {
    const CodeParams params = derive_params_with_length(4, 0.1, 64);
    SplitRng rng(1);
    const CoreCode core = gen_core(params, rng);
    SplitRng trace_rng(2);
    CHECK_THROWS_AS(trace_core(core, BinaryWord(63, 0), trace_rng), ConfigError);

    SplitRng gen_rng(3);
    const auto [codebook, secret] = gen(params, gen_rng);
    CHECK_THROWS_AS(trace(codebook, secret, BinaryWord(17, 0), trace_rng), ConfigError);
}

TEST_CASE("score at exactly Z/2 is accused") {
    CodeParams params;
    params.n = 2;
    params.xi = 0.5;
    params.d_core = 4;
    params.d_overridden = true;
    params.bias_floor = 0.25;
    params.bias_angle = std::asin(std::sqrt(0.25));
    params.trace_threshold = 4.0;  // accusation threshold Z/2 = 2

    CoreCode core;
    core.params = params;
    core.column_probs.assign(4, 0.5);  // q_j = 1, so U is +/-1
    core.bits = BitMatrix(2, 4);
    // user 0: three ones, one zero -> S_0 = 3 - 1 = 2 == Z/2
    core.bits(0, 0) = 1;
    core.bits(0, 1) = 1;
    core.bits(0, 2) = 1;
    // user 1: all zeros -> S_1 = -4
    SplitRng rng(9);
    const Accusation result = trace_core(core, BinaryWord(4, 1), rng);
    CHECK(result.scores[0] == doctest::Approx(2.0));
    CHECK(result.scores[1] == doctest::Approx(-4.0));
    REQUIRE(result.accused_set.size() == 1);
    CHECK(result.accused_set[0] == 0);
    CHECK(result.accused == 0);
}

TEST_CASE("sum of scores matches the column decomposition") {
    const CodeParams params = derive_params_with_length(5, 0.3, 97);
    SplitRng rng(31);
    const CoreCode core = gen_core(params, rng);
    SplitRng word_rng(32);
    BinaryWord word(97);
    for (auto& bit : word) bit = word_rng.bernoulli(0.5) ? 1 : 0;

    const std::vector<double> scores = trace_scores(core, word);
    double total = 0.0;
    for (const double s : scores) total += s;

    double expected = 0.0;
    for (std::size_t j = 0; j < 97; ++j) {
        if (!word[j]) continue;
        const double p = core.column_probs[j];
        const double q = std::sqrt((1.0 - p) / p);
        const double ones = static_cast<double>(core.bits.column_popcount(j));
        expected += ones * q - (5.0 - ones) / q;
    }
    CHECK(total == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("a user tracing their own codeword is caught") {
    const CodeParams params = derive_params(4, 0.1);
    int accused_self = 0;
    for (int trial = 0; trial < 100; ++trial) {
        SplitRng rng(1000 + trial);
        SplitRng gen_rng = rng.substream(0);
        SplitRng trace_rng = rng.substream(1);
        const CoreCode core = gen_core(params, gen_rng);
        const Accusation result = trace_core(core, core.bits.row_word(0), trace_rng);
        if (result.accused == 0) ++accused_self;
    }
    CHECK(accused_self >= 99);
}

TEST_CASE("a word independent of a user rarely accuses them") {
    const CodeParams params = derive_params(4, 0.1);
    int accusations = 0;
    for (int trial = 0; trial < 200; ++trial) {
        SplitRng rng(5000 + trial);
        SplitRng gen_rng = rng.substream(0);
        SplitRng word_rng = rng.substream(1);
        const CoreCode core = gen_core(params, gen_rng);
        BinaryWord word(params.d_core);
        for (std::size_t j = 0; j < params.d_core; ++j)
            word[j] = word_rng.bernoulli(core.column_probs[j]) ? 1 : 0;
        const std::vector<double> scores = trace_scores(core, word);
        if (scores[2] >= params.trace_threshold / 2.0) ++accusations;
    }
    CHECK(static_cast<double>(accusations) / 200.0 <= 0.01);
}

TEST_CASE("trace through augmentation matches trace_core") {
    const CodeParams params = derive_params_with_length(4, 0.1, 300);
    SplitRng gen_rng(77);
    const CoreCode core = gen_core(params, gen_rng);
    SplitRng perm_rng(78);
    const auto [codebook, secret] = augment(core, perm_rng);

    // core word: user 1's codeword; augmented word: place it through the
    // permutation with correct dummy values
    const BinaryWord core_word = core.bits.row_word(1);
    BinaryWord augmented(params.d_total());
    for (std::size_t pos = 0; pos < params.d_total(); ++pos) {
        const std::size_t src = secret.perm[pos];
        if (src < params.d_core)
            augmented[pos] = core_word[src];
        else
            augmented[pos] = secret.dummy_marks[pos] == DummyMark::one ? 1 : 0;
    }

    SplitRng trace_a(5), trace_b(5);
    const Accusation via_core = trace_core(core, core_word, trace_a);
    const Accusation via_full = trace(codebook, secret, augmented, trace_b);
    CHECK(via_core.accused_set == via_full.accused_set);
    CHECK(via_core.accused == via_full.accused);
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(via_core.scores[i] == doctest::Approx(via_full.scores[i]).epsilon(1e-12));

    SplitRng trace_c(6);
    const Accusation zero = trace(codebook, secret, BinaryWord(params.d_total(), 0), trace_c);
    CHECK(!zero.accused.has_value());
}

TEST_CASE("majority vote of the full coalition is traced back") {
    const CodeParams params = derive_params(4, 0.1);
    int caught = 0;
    for (int trial = 0; trial < 200; ++trial) {
        SplitRng rng(42000 + trial);
        SplitRng gen_rng = rng.substream(0);
        SplitRng trace_rng = rng.substream(1);
        const auto [codebook, secret] = gen(params, gen_rng);
        BinaryWord word(params.d_total());
        for (std::size_t j = 0; j < params.d_total(); ++j)
            word[j] = 2 * codebook.bits.column_popcount(j) >= 4 ? 1 : 0;
        const Accusation result = trace(codebook, secret, word, trace_rng);
        if (result.accused.has_value()) ++caught;
    }
    CHECK(static_cast<double>(caught) / 200.0 >= 0.9);
}

TEST_CASE("corrupted dummy column is detected") {
    const CodeParams params = derive_params_with_length(4, 0.1, 50);
    SplitRng gen_rng(13);
    auto [codebook, secret] = gen(params, gen_rng);
    std::size_t dummy_pos = 0;
    while (secret.dummy_marks[dummy_pos] == DummyMark::real) ++dummy_pos;
    codebook.bits(2, dummy_pos) ^= 1;
    SplitRng trace_rng(14);
    CHECK_THROWS_AS(trace(codebook, secret, BinaryWord(params.d_total(), 0), trace_rng),
                    IntegrityError);
}

TEST_CASE("secret from a different code is rejected") {
    const CodeParams params = derive_params_with_length(4, 0.1, 50);
    SplitRng rng_a(1), rng_b(2);
    const auto [codebook_a, secret_a] = gen(params, rng_a);
    const auto [codebook_b, secret_b] = gen(params, rng_b);
    SplitRng trace_rng(3);
    CHECK_THROWS_AS(trace(codebook_a, secret_b, BinaryWord(params.d_total(), 0), trace_rng),
                    IntegrityError);
}
