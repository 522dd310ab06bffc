#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dplb/bits.hpp"
#include "dplb/fpcode.hpp"
#include "dplb/mech.hpp"
#include "dplb/rng.hpp"

namespace dplb::marking {

// What a coalition sees: its own rows of the (augmented) codebook and nothing
// else. Adversaries take only this plus randomness, so they cannot read the
// code secret by construction.
struct CoalitionView {
    BitMatrix rows;
    std::vector<std::size_t> member_ids;
};

CoalitionView coalition_view(const fpcode::Codebook& codebook,
                             std::span<const std::size_t> members);

enum class AdversaryKind { majority_vote, copy_first_row, random_consistent, mechanism_round };

AdversaryKind adversary_from_string(const std::string& name);
std::string to_string(AdversaryKind kind);

struct Adversary {
    AdversaryKind kind = AdversaryKind::majority_vote;
    mech::MechanismHandle mechanism;  // required for mechanism_round

    static Adversary majority_vote() { return {AdversaryKind::majority_vote, nullptr}; }
    static Adversary copy_first_row() { return {AdversaryKind::copy_first_row, nullptr}; }
    static Adversary random_consistent() { return {AdversaryKind::random_consistent, nullptr}; }
    static Adversary mechanism_round(mech::MechanismHandle mechanism);
};

BinaryWord run_adversary(const Adversary& adversary, const CoalitionView& view, SplitRng& rng);

// Fraction of columns where the coalition is constant but the word disagrees.
// Columns with internal disagreement can never violate the marking condition.
double marking_violation_fraction(const CoalitionView& view, const BinaryWord& word);

// F_beta membership: at most a beta fraction of violated columns (inclusive).
bool in_F_beta(const CoalitionView& view, const BinaryWord& word, double beta);

// G_alpha as a fraction: |{j : |mean_j - 1/2| <= alpha}| / d.
double biased_mean_fraction(const BitMatrix& matrix, double alpha);

// Coordinates >= 1/2 round to 1, the rest to 0.
BinaryWord round_to_binary(std::span<const double> theta);

struct TrialRecord {
    std::size_t trial = 0;
    std::optional<std::size_t> accused;
    double violation_fraction = 0.0;
    bool in_f_beta = false;
};

struct SecurityStats {
    std::size_t trials = 0;
    std::size_t completeness_failures = 0;  // word in F_beta but Trace output empty
    std::size_t false_accusations = 0;      // accused outside the coalition
    std::vector<TrialRecord> records;

    double mean_violation_fraction() const;
};

// Per trial: fresh Gen, adversary sees only the coalition rows, Trace runs
// with the matching secret. Trial t uses rng.substream(t), so trials can be
// evaluated in any order.
SecurityStats run_security_experiment(const fpcode::CodeParams& params, const Adversary& adversary,
                                      std::span<const std::size_t> coalition, double beta,
                                      std::size_t trials, const SplitRng& rng);

}  // namespace dplb::marking
