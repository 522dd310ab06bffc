#include "dplb/mech.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>

#include "dplb/errors.hpp"

namespace dplb::mech {

namespace {

void warn_weak_delta(const erm::Dataset& data, double delta) {
    if (delta > 0.0 && delta >= 1.0 / static_cast<double>(data.size())) {
        std::cerr << "warning: delta=" << delta << " is not < 1/n for n=" << data.size()
                  << "; the privacy guarantee is vacuous at this scale\n";
    }
}

class ExactErm final : public Mechanism {
public:
    std::string name() const override { return "exact_erm"; }
    PrivacyBudget budget() const override {
        return {std::numeric_limits<double>::infinity(), 0.0};
    }
    bool is_private() const override { return false; }
    std::string accounting() const override { return "none (not differentially private)"; }
    std::vector<double> run(const erm::Dataset& data, SplitRng&) const override {
        return erm::l1_minimizer(data);
    }
};

class LaplaceMean final : public Mechanism {
public:
    explicit LaplaceMean(PrivacyBudget budget) : budget_(budget) {
        if (!(budget.epsilon > 0.0)) throw ConfigError("laplace_mean: epsilon must be positive");
        if (budget.delta != 0.0) throw ConfigError("laplace_mean: requires delta = 0 (pure DP)");
    }
    std::string name() const override { return "laplace_mean"; }
    PrivacyBudget budget() const override { return budget_; }
    std::string accounting() const override {
        return "laplace mechanism on q(D), l1 sensitivity diam_1/n, replace-one neighbors";
    }
    std::vector<double> run(const erm::Dataset& data, SplitRng& rng) const override {
        const double scale = laplace_scale(data, budget_);
        std::vector<double> out = erm::mean_point(data);
        for (double& v : out) v += rng.laplace(scale);
        return out;
    }

private:
    PrivacyBudget budget_;
};

class GaussianMean final : public Mechanism {
public:
    explicit GaussianMean(PrivacyBudget budget) : budget_(budget) {
        if (!(budget.epsilon > 0.0)) throw ConfigError("gaussian_mean: epsilon must be positive");
        if (!(budget.delta > 0.0) || budget.delta >= 1.0)
            throw ConfigError("gaussian_mean: requires delta in (0,1)");
        if (budget.epsilon > 1.0) {
            std::cerr << "warning: gaussian_mean calibrated for epsilon <= 1; at epsilon="
                      << budget.epsilon << " the (eps,delta)-DP claim does not hold\n";
        }
    }
    std::string name() const override { return "gaussian_mean"; }
    PrivacyBudget budget() const override { return budget_; }
    std::string accounting() const override {
        return budget_.epsilon <= 1.0
                   ? "gaussian mechanism on q(D), l2 sensitivity sqrt(d)/n, replace-one neighbors"
                   : "gaussian noise at the eps<=1 calibration formula; DP claim invalid for eps>1";
    }
    std::vector<double> run(const erm::Dataset& data, SplitRng& rng) const override {
        if (data.size() == 0) throw ConfigError("gaussian_mean: empty dataset");
        for (std::size_t i = 0; i < data.size(); ++i)
            for (double v : data.points.row(i))
                if (v < 0.0 || v > 1.0)
                    throw ConfigError("gaussian_mean: entries must lie in [0,1]");
        warn_weak_delta(data, budget_.delta);
        const double sigma = gaussian_sigma(data.dim(), data.size(), budget_);
        std::vector<double> out = erm::mean_point(data);
        for (double& v : out) v += rng.normal(0.0, sigma);
        return out;
    }

private:
    PrivacyBudget budget_;
};

class NoisySubgradient final : public Mechanism {
public:
    NoisySubgradient(PrivacyBudget budget, SubgradientConfig config)
        : budget_(budget), config_(std::move(config)) {
        if (!(budget.epsilon > 0.0))
            throw ConfigError("noisy_subgradient: epsilon must be positive");
        if (!(budget.delta > 0.0) || budget.delta >= 1.0)
            throw ConfigError("noisy_subgradient: per-step gaussian noise requires delta in (0,1)");
        if (config_.steps < 1) throw ConfigError("noisy_subgradient: steps must be >= 1");
        if (!(config_.step_size > 0.0))
            throw ConfigError("noisy_subgradient: step_size must be positive");
        if (!(config_.clip > 0.0)) throw ConfigError("noisy_subgradient: clip must be positive");
    }
    std::string name() const override { return "noisy_subgradient"; }
    PrivacyBudget budget() const override { return budget_; }
    std::string accounting() const override {
        return "basic composition over " + std::to_string(config_.steps) +
               " steps at (eps/steps, delta/steps) each";
    }
    std::vector<double> run(const erm::Dataset& data, SplitRng& rng) const override {
        if (data.size() == 0) throw ConfigError("noisy_subgradient: empty dataset");
        warn_weak_delta(data, budget_.delta);
        const std::size_t d = data.dim();
        const std::size_t n = data.size();
        const double steps = static_cast<double>(config_.steps);
        const double eps_step = budget_.epsilon / steps;
        const double delta_step = budget_.delta / steps;
        // Replace-one changes each mean-sign coordinate by at most 2/n; clipping
        // is a contraction, so both bounds apply.
        const double sensitivity =
            std::min(2.0 * std::sqrt(static_cast<double>(d)) / static_cast<double>(n),
                     2.0 * config_.clip);
        const double sigma = sensitivity * std::sqrt(2.0 * std::log(1.25 / delta_step)) / eps_step;

        std::vector<double> theta(d, 0.5);
        if (config_.start) {
            if (config_.start->size() != d)
                throw ConfigError("noisy_subgradient: start point dimension mismatch");
            theta = *config_.start;
        }
        std::vector<double> grad(d);
        for (std::size_t step = 0; step < config_.steps; ++step) {
            std::fill(grad.begin(), grad.end(), 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                const auto row = data.points.row(i);
                for (std::size_t j = 0; j < d; ++j) {
                    const double diff = theta[j] - row[j];
                    if (diff > 0.0)
                        grad[j] += 1.0;
                    else if (diff < 0.0)
                        grad[j] -= 1.0;
                }
            }
            double norm2 = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                grad[j] /= static_cast<double>(n);
                norm2 += grad[j] * grad[j];
            }
            const double norm = std::sqrt(norm2);
            if (norm > config_.clip) {
                const double shrink = config_.clip / norm;
                for (double& g : grad) g *= shrink;
            }
            for (std::size_t j = 0; j < d; ++j) {
                const double update = grad[j] + rng.normal(0.0, sigma);
                theta[j] = std::clamp(theta[j] - config_.step_size * update, 0.0, 1.0);
            }
        }
        return theta;
    }

private:
    PrivacyBudget budget_;
    SubgradientConfig config_;
};

class Subsampled final : public Mechanism {
public:
    Subsampled(MechanismHandle base, double target_epsilon)
        : base_(std::move(base)), target_epsilon_(target_epsilon) {
        if (!base_) throw ConfigError("subsample_amplify: null base mechanism");
        if (!(target_epsilon > 0.0) || target_epsilon >= 1.0)
            throw ConfigError("subsample_amplify: target epsilon must lie in (0,1)");
        if (base_->is_private() && std::abs(base_->budget().epsilon - 1.0) > 1e-12)
            throw ConfigError("subsample_amplify: base must be (1,delta)-DP");
    }
    std::string name() const override { return "subsampled(" + base_->name() + ")"; }
    PrivacyBudget budget() const override {
        return {2.0 * target_epsilon_, target_epsilon_ * base_->budget().delta};
    }
    bool is_private() const override { return base_->is_private(); }
    std::string accounting() const override {
        return "secrecy of the sample: include each record w.p. eps, run base on the sample; "
               "(1,delta) base -> (2*eps, eps*delta)";
    }
    std::vector<double> run(const erm::Dataset& data, SplitRng& rng) const override {
        SplitRng select = rng.substream(0);
        SplitRng inner = rng.substream(1);
        std::vector<std::size_t> picked;
        for (std::size_t i = 0; i < data.size(); ++i)
            if (select.bernoulli(target_epsilon_)) picked.push_back(i);
        if (picked.empty()) return std::vector<double>(data.dim(), 0.0);
        erm::Dataset sample;
        sample.tag = data.tag;
        sample.points = Matrix(picked.size(), data.dim());
        for (std::size_t r = 0; r < picked.size(); ++r) {
            const auto row = data.points.row(picked[r]);
            for (std::size_t j = 0; j < data.dim(); ++j) sample.points(r, j) = row[j];
        }
        return base_->run(sample, inner);
    }

private:
    MechanismHandle base_;
    double target_epsilon_;
};

}  // namespace

MechanismHandle exact_erm() { return std::make_shared<ExactErm>(); }

MechanismHandle laplace_mean(PrivacyBudget budget) {
    return std::make_shared<LaplaceMean>(budget);
}

MechanismHandle gaussian_mean(PrivacyBudget budget) {
    return std::make_shared<GaussianMean>(budget);
}

MechanismHandle noisy_subgradient(PrivacyBudget budget, SubgradientConfig config) {
    return std::make_shared<NoisySubgradient>(budget, std::move(config));
}

MechanismHandle subsample_amplify(MechanismHandle base, double target_epsilon) {
    return std::make_shared<Subsampled>(std::move(base), target_epsilon);
}

double gaussian_sigma(std::size_t d, std::size_t n, const PrivacyBudget& budget) {
    return (std::sqrt(static_cast<double>(d)) / static_cast<double>(n)) *
           std::sqrt(2.0 * std::log(1.25 / budget.delta)) / budget.epsilon;
}

double domain_l1_diameter(erm::DomainTag tag, std::size_t d) {
    const double dd = static_cast<double>(d);
    switch (tag) {
        case erm::DomainTag::binary:
        case erm::DomainTag::binary_half: return dd;
        case erm::DomainTag::packing: return 2.0 * std::sqrt(dd);
        case erm::DomainTag::real: return 2.0 * dd;  // entries assumed in [-1,1]
    }
    return 2.0 * dd;
}

double laplace_scale(const erm::Dataset& data, const PrivacyBudget& budget) {
    if (data.size() == 0) throw ConfigError("laplace_scale: empty dataset");
    if (data.tag == erm::DomainTag::real) {
        for (std::size_t i = 0; i < data.size(); ++i)
            for (double v : data.points.row(i))
                if (v < -1.0 || v > 1.0)
                    throw ConfigError("laplace_mean: entries must lie in [-1,1]");
    }
    const double sensitivity =
        domain_l1_diameter(data.tag, data.dim()) / static_cast<double>(data.size());
    return sensitivity / budget.epsilon;
}

}  // namespace dplb::mech
