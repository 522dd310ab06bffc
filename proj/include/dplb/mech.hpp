#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dplb/erm.hpp"
#include "dplb/rng.hpp"

namespace dplb::mech {

struct PrivacyBudget {
    double epsilon = 0.0;
    double delta = 0.0;
};

// Baseline comparators. Evaluation is pure given (data, seed); handles are
// immutable and safe to share across threads.
class Mechanism {
public:
    virtual ~Mechanism() = default;

    virtual std::string name() const = 0;
    virtual PrivacyBudget budget() const = 0;
    virtual bool is_private() const { return true; }
    // Human-readable accounting rule behind the budget claim.
    virtual std::string accounting() const = 0;
    virtual std::vector<double> run(const erm::Dataset& data, SplitRng& rng) const = 0;
};

using MechanismHandle = std::shared_ptr<const Mechanism>;

// Non-private l1 ERM oracle (coordinate-wise median); excess loss is zero.
MechanismHandle exact_erm();

// q(D) + iid Laplace(diam_1(domain)/(n*eps)) per coordinate; requires delta = 0.
MechanismHandle laplace_mean(PrivacyBudget budget);

// q(D) + iid N(0, sigma^2), sigma = (sqrt(d)/n) * sqrt(2*ln(1.25/delta)) / eps.
// The (eps,delta) claim is valid for eps <= 1 (classical calibration); larger
// eps still runs but the claim is flagged.
MechanismHandle gaussian_mean(PrivacyBudget budget);

struct SubgradientConfig {
    std::size_t steps = 1;
    double step_size = 0.0;
    double clip = 0.0;
    std::optional<std::vector<double>> start;  // default: center of [0,1]^d
};

// Projected noisy subgradient descent on the mean l1 loss over [0,1]^d.
// Privacy by basic composition: each step spends (eps/steps, delta/steps).
MechanismHandle noisy_subgradient(PrivacyBudget budget, SubgradientConfig config);

// Secrecy-of-the-sample amplification: include each record independently with
// probability target_epsilon and run the base on the sample. A (1,delta)-DP
// base yields a (2*target_epsilon, target_epsilon*delta) mechanism.
MechanismHandle subsample_amplify(MechanismHandle base, double target_epsilon);

// Calibration helpers, exposed so tests can pin the formulas directly.
double gaussian_sigma(std::size_t d, std::size_t n, const PrivacyBudget& budget);
double domain_l1_diameter(erm::DomainTag tag, std::size_t d);
double laplace_scale(const erm::Dataset& data, const PrivacyBudget& budget);

}  // namespace dplb::mech
