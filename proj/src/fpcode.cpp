#include "dplb/fpcode.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "dplb/errors.hpp"

namespace dplb::fpcode {

namespace {

void validate_inputs(std::size_t n, double xi) {
    if (n < 2) throw ConfigError("fpcode: need at least 2 users, got " + std::to_string(n));
    if (!(xi > 0.0) || xi > 1.0)
        throw ConfigError("fpcode: security parameter xi must lie in (0,1]");
}

CodeParams finish_params(std::size_t n, double xi, std::size_t d_core, bool overridden) {
    CodeParams params;
    params.n = n;
    params.xi = xi;
    params.d_core = d_core;
    params.d_overridden = overridden;
    params.bias_floor = 1.0 / (300.0 * static_cast<double>(n));
    params.bias_angle = std::asin(std::sqrt(params.bias_floor));
    params.trace_threshold = 20.0 * static_cast<double>(n) * std::log(static_cast<double>(n) / xi);
    return params;
}

}  // namespace

CodeParams derive_params(std::size_t n, double xi) {
    validate_inputs(n, xi);
    const double nd = static_cast<double>(n);
    const double length = std::ceil(100.0 * nd * nd * std::log(nd / xi));
    return finish_params(n, xi, static_cast<std::size_t>(length), /*overridden=*/false);
}

CodeParams derive_params_with_length(std::size_t n, double xi, std::size_t d_core_override) {
    validate_inputs(n, xi);
    if (d_core_override == 0) throw ConfigError("fpcode: core length override must be positive");
    return finish_params(n, xi, d_core_override, /*overridden=*/true);
}

CoreCode gen_core(const CodeParams& params, SplitRng& rng) {
    const std::size_t n = params.n;
    const std::size_t d = params.d_core;
    CoreCode core;
    core.params = params;
    core.bits = BitMatrix(n, d);
    core.column_probs.resize(d);
    const double lo = params.bias_angle;
    const double hi = std::numbers::pi / 2.0 - params.bias_angle;
    for (std::size_t j = 0; j < d; ++j) {
        SplitRng col = rng.substream(j);
        const double r = col.uniform(lo, hi);
        const double s = std::sin(r);
        // clamp guards against the interval endpoints rounding past the floor
        const double p = std::clamp(s * s, params.bias_floor, 1.0 - params.bias_floor);
        core.column_probs[j] = p;
        for (std::size_t i = 0; i < n; ++i) core.bits(i, j) = col.bernoulli(p) ? 1 : 0;
    }
    return core;
}

std::pair<Codebook, CodeSecret> augment(const CoreCode& core, SplitRng& rng) {
    const std::size_t n = core.bits.rows();
    const std::size_t d = core.bits.cols();
    const std::size_t d_total = 5 * d;

    std::vector<std::size_t> perm(d_total);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    rng.shuffle(perm);

    CodeSecret secret;
    secret.column_probs = core.column_probs;
    secret.perm = perm;
    secret.dummy_marks.resize(d_total);
    secret.params = core.params;

    Codebook codebook;
    codebook.params = core.params;
    codebook.bits = BitMatrix(n, d_total);
    for (std::size_t pos = 0; pos < d_total; ++pos) {
        const std::size_t src = perm[pos];
        if (src < d) {
            secret.dummy_marks[pos] = DummyMark::real;
            for (std::size_t i = 0; i < n; ++i) codebook.bits(i, pos) = core.bits(i, src);
        } else if (src < 3 * d) {
            secret.dummy_marks[pos] = DummyMark::zero;
        } else {
            secret.dummy_marks[pos] = DummyMark::one;
            for (std::size_t i = 0; i < n; ++i) codebook.bits(i, pos) = 1;
        }
    }
    return {std::move(codebook), std::move(secret)};
}

std::pair<Codebook, CodeSecret> gen(const CodeParams& params, SplitRng& rng) {
    SplitRng core_rng = rng.substream(0);
    SplitRng perm_rng = rng.substream(1);
    const CoreCode core = gen_core(params, core_rng);
    return augment(core, perm_rng);
}

CoreCode recover_core(const Codebook& codebook, const CodeSecret& secret) {
    const std::size_t n = codebook.bits.rows();
    const std::size_t d = secret.params.d_core;
    const std::size_t d_total = 5 * d;
    if (codebook.bits.cols() != d_total || secret.perm.size() != d_total ||
        secret.dummy_marks.size() != d_total || secret.column_probs.size() != d) {
        throw IntegrityError("fpcode: codebook and secret dimensions disagree");
    }
    if (codebook.params.n != secret.params.n || codebook.params.d_core != secret.params.d_core) {
        throw IntegrityError("fpcode: codebook and secret parameters disagree");
    }

    CoreCode core;
    core.params = secret.params;
    core.column_probs = secret.column_probs;
    core.bits = BitMatrix(n, d);
    for (std::size_t pos = 0; pos < d_total; ++pos) {
        const std::size_t src = secret.perm[pos];
        const DummyMark mark = secret.dummy_marks[pos];
        const DummyMark expected =
            src < d ? DummyMark::real : (src < 3 * d ? DummyMark::zero : DummyMark::one);
        if (mark != expected)
            throw IntegrityError("fpcode: dummy marks inconsistent with permutation");
        if (mark == DummyMark::real) {
            for (std::size_t i = 0; i < n; ++i) core.bits(i, src) = codebook.bits(i, pos);
        } else {
            const std::uint8_t want = mark == DummyMark::one ? 1 : 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (codebook.bits(i, pos) != want)
                    throw IntegrityError(
                        "fpcode: dummy column content contradicts the secret (mismatched pair?)");
            }
        }
    }
    return core;
}

std::vector<double> trace_scores(const CoreCode& core, const BinaryWord& word) {
    const std::size_t n = core.bits.rows();
    const std::size_t d = core.bits.cols();
    if (word.size() != d)
        throw ConfigError("fpcode: word length " + std::to_string(word.size()) +
                          " != core length " + std::to_string(d));
    std::vector<double> scores(n, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
        if (!word[j]) continue;
        const double p = core.column_probs[j];
        const double q = std::sqrt((1.0 - p) / p);
        const double neg = -1.0 / q;
        for (std::size_t i = 0; i < n; ++i) scores[i] += core.bits(i, j) ? q : neg;
    }
    return scores;
}

Accusation trace_core(const CoreCode& core, const BinaryWord& word, SplitRng& rng) {
    Accusation result;
    result.scores = trace_scores(core, word);
    const double threshold = core.params.trace_threshold / 2.0;
    for (std::size_t i = 0; i < result.scores.size(); ++i) {
        if (result.scores[i] >= threshold) result.accused_set.push_back(i);
    }
    if (!result.accused_set.empty()) {
        result.accused = result.accused_set[rng.below(result.accused_set.size())];
    }
    return result;
}

Accusation trace(const Codebook& codebook, const CodeSecret& secret, const BinaryWord& word,
                 SplitRng& rng) {
    if (word.size() != codebook.bits.cols())
        throw ConfigError("fpcode: word length " + std::to_string(word.size()) +
                          " != codebook length " + std::to_string(codebook.bits.cols()));
    const CoreCode core = recover_core(codebook, secret);
    // Strip dummy positions; a symbol that contradicts its dummy value is
    // dropped like any other (the marking statistics account for it).
    BinaryWord core_word(secret.params.d_core);
    for (std::size_t pos = 0; pos < secret.perm.size(); ++pos) {
        const std::size_t src = secret.perm[pos];
        if (src < secret.params.d_core) core_word[src] = word[pos];
    }
    return trace_core(core, core_word, rng);
}

}  // namespace dplb::fpcode
