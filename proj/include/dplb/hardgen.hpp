#pragma once

#include <cstddef>
#include <vector>

#include "dplb/bits.hpp"
#include "dplb/erm.hpp"
#include "dplb/fpcode.hpp"
#include "dplb/rng.hpp"

namespace dplb::hardgen {

// Sign vectors scaled to the unit sphere with pairwise l2 separation >= 1/8.
struct PackingFamily {
    Matrix points;
    double min_separation = 0.125;
};

// Rejection sampling with explicit verification; throws ConfigError after
// 10*m^2 failed draws (a fresh draw collides with probability ~m*2^{-d/2},
// so the budget is never reached at sane sizes).
PackingFamily packing_points(std::size_t d, std::size_t m, SplitRng& rng);

// n* = min(n, ceil(d/(20*eps))) copies of one random packing point padded
// with zero rows; the row sum has l2 norm exactly n*.
erm::Dataset pure_dp_instance(std::size_t n, std::size_t d, double epsilon, SplitRng& rng);

struct GroupPrivacyPlan {
    std::size_t k = 1;       // replication factor
    std::size_t n_k = 0;     // floor(n/k) users in the core instance
    std::size_t pad_zero = 0;
    std::size_t pad_one = 0;
    std::size_t pad_half = 0;
};

GroupPrivacyPlan replication_plan(std::size_t n, std::size_t k);

struct FpInstance {
    erm::Dataset data;  // k stacked copies of the codebook rows + zero padding
    fpcode::Codebook codebook;
    fpcode::CodeSecret secret;
    GroupPrivacyPlan plan;
};

// The Theorem-2-style hard instance: run Gen for n_k = floor(n/k) users, stack
// the (augmented) codebook rows k times, append n - k*n_k zero rows. With
// core_only the dataset keeps only the recovered core columns (ablation).
FpInstance fp_hard_instance(std::size_t n, std::size_t k, const fpcode::CodeParams& params,
                            SplitRng& rng, bool core_only = false);

// Balanced dummy padding to n_target rows: half {0}^d and half {1}^d, plus a
// single {1/2}^d row when the deficit is odd (the tag widens to binary_half).
erm::Dataset pad_dataset(const erm::Dataset& data, std::size_t n_target);

struct GroupPrivacy {
    double epsilon = 0.0;
    double delta = 0.0;
    bool saturated = false;  // e^(k*eps) overflowed; delta reported as +inf
};

// (eps, delta) degrades to (k*eps, k*delta*e^(k*eps)) for neighbors differing
// in k elements.
GroupPrivacy group_privacy_params(double epsilon, double delta, std::size_t k);

// Padding q = n - k*n_k zeros onto k*n_k rows shifts a column mean m to
// m*k*n_k/n; a bias of at least q/(2n) + 1/(2n) keeps the side of 1/2.
double dilution_bound(std::size_t k, std::size_t n);

// Per-column verdict on the core matrix D^k: true iff the column is biased at
// level alpha (mean strictly off 1/2) and its side of 1/2 survives
// k-replication plus zero-padding to n rows.
std::vector<bool> biased_column_stability(const BitMatrix& data_k, std::size_t k, std::size_t n,
                                          double alpha);

}  // namespace dplb::hardgen
