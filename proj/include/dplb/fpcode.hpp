#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "dplb/bits.hpp"
#include "dplb/rng.hpp"

namespace dplb::fpcode {

// Code parameters for n users at security level xi. The core length grows as
// 100*n^2*ln(n/xi); tests override d_core explicitly (flagged) because the
// formula value is quadratic in n.
struct CodeParams {
    std::size_t n = 0;
    double xi = 0.0;
    std::size_t d_core = 0;
    bool d_overridden = false;
    double bias_floor = 0.0;       // t = 1/(300n); column probabilities stay in [t, 1-t]
    double bias_angle = 0.0;       // t' with sin^2(t') = t
    double trace_threshold = 0.0;  // Z = 20*n*ln(n/xi); users with score >= Z/2 are accused

    std::size_t d_total() const { return 5 * d_core; }
};

CodeParams derive_params(std::size_t n, double xi);
CodeParams derive_params_with_length(std::size_t n, double xi, std::size_t d_core_override);

// Core codebook before augmentation: bits(i,j) ~ Bernoulli(p_j) with
// p_j = sin^2(r_j), r_j uniform on [t', pi/2 - t'].
struct CoreCode {
    BitMatrix bits;
    std::vector<double> column_probs;
    CodeParams params;
};

enum class DummyMark : std::uint8_t { real = 0, zero = 1, one = 2 };

// Hidden tracing state shared between Gen and Trace. perm[pos] is the
// pre-permutation column stored at augmented position pos; pre-permutation
// layout is [d_core real | 2*d_core zero dummies | 2*d_core one dummies].
// dummy_marks is indexed by augmented position.
struct CodeSecret {
    std::vector<double> column_probs;
    std::vector<std::size_t> perm;
    std::vector<DummyMark> dummy_marks;
    CodeParams params;
};

// Augmented public codebook (n x 5*d_core).
struct Codebook {
    BitMatrix bits;
    CodeParams params;
};

struct Accusation {
    std::optional<std::size_t> accused;    // empty means no user reached the threshold
    std::vector<double> scores;            // S_i for every user
    std::vector<std::size_t> accused_set;  // { i : S_i >= Z/2 }
};

CoreCode gen_core(const CodeParams& params, SplitRng& rng);

// Appends 2*d_core all-zero and 2*d_core all-one columns and applies a random
// column permutation.
std::pair<Codebook, CodeSecret> augment(const CoreCode& core, SplitRng& rng);

// Gen' followed by augmentation.
std::pair<Codebook, CodeSecret> gen(const CodeParams& params, SplitRng& rng);

// Undoes the permutation, strips dummy columns, and checks that every dummy
// column of the codebook matches its mark (throws IntegrityError otherwise).
CoreCode recover_core(const Codebook& codebook, const CodeSecret& secret);

// Per-user scores S_i = sum_j c_j * U_ij with U_ij = q_j when bit set and
// -1/q_j otherwise, q_j = sqrt((1-p_j)/p_j). Innocent-user scores are
// mean-zero with per-column variance exactly 1.
std::vector<double> trace_scores(const CoreCode& core, const BinaryWord& word);

Accusation trace_core(const CoreCode& core, const BinaryWord& word, SplitRng& rng);

// Full tracing on an augmented word: recover the core word via the secret,
// then trace. The accused is drawn uniformly from the accused set.
Accusation trace(const Codebook& codebook, const CodeSecret& secret, const BinaryWord& word,
                 SplitRng& rng);

}  // namespace dplb::fpcode
