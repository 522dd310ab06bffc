#include "dplb/marking.hpp"

#include <algorithm>
#include <string>

#include "dplb/errors.hpp"

namespace dplb::marking {

CoalitionView coalition_view(const fpcode::Codebook& codebook,
                             std::span<const std::size_t> members) {
    if (members.empty()) throw ConfigError("coalition_view: coalition must be nonempty");
    std::vector<std::size_t> sorted(members.begin(), members.end());
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw ConfigError("coalition_view: member ids must be distinct");
    if (sorted.back() >= codebook.bits.rows())
        throw ConfigError("coalition_view: member id out of range");

    CoalitionView view;
    view.member_ids.assign(members.begin(), members.end());
    view.rows = BitMatrix(members.size(), codebook.bits.cols());
    for (std::size_t r = 0; r < members.size(); ++r)
        for (std::size_t j = 0; j < codebook.bits.cols(); ++j)
            view.rows(r, j) = codebook.bits(members[r], j);
    return view;
}

AdversaryKind adversary_from_string(const std::string& name) {
    if (name == "majority_vote") return AdversaryKind::majority_vote;
    if (name == "copy_first_row") return AdversaryKind::copy_first_row;
    if (name == "random_consistent") return AdversaryKind::random_consistent;
    if (name == "mechanism_round") return AdversaryKind::mechanism_round;
    throw ConfigError("unknown adversary: " + name);
}

std::string to_string(AdversaryKind kind) {
    switch (kind) {
        case AdversaryKind::majority_vote: return "majority_vote";
        case AdversaryKind::copy_first_row: return "copy_first_row";
        case AdversaryKind::random_consistent: return "random_consistent";
        case AdversaryKind::mechanism_round: return "mechanism_round";
    }
    return "majority_vote";
}

Adversary Adversary::mechanism_round(mech::MechanismHandle mechanism) {
    if (!mechanism) throw ConfigError("mechanism_round adversary needs a mechanism handle");
    return {AdversaryKind::mechanism_round, std::move(mechanism)};
}

BinaryWord run_adversary(const Adversary& adversary, const CoalitionView& view, SplitRng& rng) {
    const std::size_t d = view.rows.cols();
    const std::size_t s = view.rows.rows();
    BinaryWord word(d, 0);
    switch (adversary.kind) {
        case AdversaryKind::majority_vote:
            for (std::size_t j = 0; j < d; ++j)
                word[j] = 2 * view.rows.column_popcount(j) >= s ? 1 : 0;  // ties go to 1
            break;
        case AdversaryKind::copy_first_row:
            word = view.rows.row_word(0);
            break;
        case AdversaryKind::random_consistent:
            for (std::size_t j = 0; j < d; ++j) {
                const std::size_t ones = view.rows.column_popcount(j);
                if (ones == 0)
                    word[j] = 0;
                else if (ones == s)
                    word[j] = 1;
                else
                    word[j] = rng.bernoulli(0.5) ? 1 : 0;
            }
            break;
        case AdversaryKind::mechanism_round: {
            erm::Dataset data;
            data.tag = erm::DomainTag::binary;
            data.points = Matrix(s, d);
            for (std::size_t i = 0; i < s; ++i)
                for (std::size_t j = 0; j < d; ++j) data.points(i, j) = view.rows(i, j);
            word = round_to_binary(adversary.mechanism->run(data, rng));
            break;
        }
    }
    return word;
}

double marking_violation_fraction(const CoalitionView& view, const BinaryWord& word) {
    const std::size_t d = view.rows.cols();
    if (word.size() != d)
        throw ConfigError("marking_violation_fraction: word length != view columns");
    if (d == 0) return 0.0;
    std::size_t violations = 0;
    for (std::size_t j = 0; j < d; ++j) {
        const std::size_t ones = view.rows.column_popcount(j);
        if (ones == 0 && word[j] == 1) ++violations;
        if (ones == view.rows.rows() && word[j] == 0) ++violations;
    }
    return static_cast<double>(violations) / static_cast<double>(d);
}

bool in_F_beta(const CoalitionView& view, const BinaryWord& word, double beta) {
    if (beta < 0.0 || beta >= 1.0) throw ConfigError("in_F_beta: beta must lie in [0,1)");
    return marking_violation_fraction(view, word) <= beta;
}

double biased_mean_fraction(const BitMatrix& matrix, double alpha) {
    if (matrix.rows() == 0 || matrix.cols() == 0)
        throw ConfigError("biased_mean_fraction: empty matrix");
    if (alpha < 0.0 || alpha > 0.5)
        throw ConfigError("biased_mean_fraction: alpha must lie in [0, 1/2]");
    std::size_t near = 0;
    for (std::size_t j = 0; j < matrix.cols(); ++j)
        if (std::abs(matrix.column_mean(j) - 0.5) <= alpha) ++near;
    return static_cast<double>(near) / static_cast<double>(matrix.cols());
}

BinaryWord round_to_binary(std::span<const double> theta) {
    BinaryWord word(theta.size());
    for (std::size_t j = 0; j < theta.size(); ++j) word[j] = theta[j] >= 0.5 ? 1 : 0;
    return word;
}

double SecurityStats::mean_violation_fraction() const {
    if (records.empty()) return 0.0;
    double total = 0.0;
    for (const TrialRecord& r : records) total += r.violation_fraction;
    return total / static_cast<double>(records.size());
}

SecurityStats run_security_experiment(const fpcode::CodeParams& params, const Adversary& adversary,
                                      std::span<const std::size_t> coalition, double beta,
                                      std::size_t trials, const SplitRng& rng) {
    if (trials < 1) throw ConfigError("run_security_experiment: trials must be >= 1");
    if (coalition.empty()) throw ConfigError("run_security_experiment: coalition must be nonempty");

    SecurityStats stats;
    stats.trials = trials;
    stats.records.reserve(trials);
    for (std::size_t t = 0; t < trials; ++t) {
        SplitRng trial_rng = rng.substream(t);
        SplitRng gen_rng = trial_rng.substream(0);
        SplitRng adv_rng = trial_rng.substream(1);
        SplitRng trace_rng = trial_rng.substream(2);

        auto [codebook, secret] = fpcode::gen(params, gen_rng);
        const CoalitionView view = coalition_view(codebook, coalition);
        const BinaryWord word = run_adversary(adversary, view, adv_rng);

        TrialRecord record;
        record.trial = t;
        record.violation_fraction = marking_violation_fraction(view, word);
        record.in_f_beta = record.violation_fraction <= beta;

        const fpcode::Accusation accusation = fpcode::trace(codebook, secret, word, trace_rng);
        record.accused = accusation.accused;
        if (record.in_f_beta && !accusation.accused) ++stats.completeness_failures;
        if (accusation.accused &&
            std::find(coalition.begin(), coalition.end(), *accusation.accused) == coalition.end())
            ++stats.false_accusations;
        stats.records.push_back(std::move(record));
    }
    return stats;
}

}  // namespace dplb::marking
