#include "dplb/hardgen.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "dplb/errors.hpp"

namespace dplb::hardgen {

namespace {

double l2_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double d = a[j] - b[j];
        s += d * d;
    }
    return std::sqrt(s);
}

}  // namespace

PackingFamily packing_points(std::size_t d, std::size_t m, SplitRng& rng) {
    if (d < 1) throw ConfigError("packing_points: dimension must be positive");
    if (m < 1) throw ConfigError("packing_points: need at least one point");
    if (d / 2 < 64) {
        const std::uint64_t capacity = 1ULL << (d / 2);
        if (m > capacity)
            throw ConfigError("packing_points: m exceeds 2^(d/2) = " + std::to_string(capacity));
    }

    PackingFamily family;
    family.points = Matrix(m, d);
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    const std::size_t budget = 10 * m * m;
    std::size_t attempts = 0;
    std::vector<double> candidate(d);
    for (std::size_t placed = 0; placed < m;) {
        if (attempts++ > budget)
            throw ConfigError("packing_points: separation not reached after " +
                              std::to_string(budget) + " resamples (placed " +
                              std::to_string(placed) + "/" + std::to_string(m) + ")");
        for (std::size_t j = 0; j < d; ++j)
            candidate[j] = rng.bernoulli(0.5) ? scale : -scale;
        bool separated = true;
        for (std::size_t i = 0; i < placed && separated; ++i)
            separated = l2_distance(family.points.row(i), candidate) >= family.min_separation;
        if (!separated) continue;
        for (std::size_t j = 0; j < d; ++j) family.points(placed, j) = candidate[j];
        ++placed;
    }
    return family;
}

erm::Dataset pure_dp_instance(std::size_t n, std::size_t d, double epsilon, SplitRng& rng) {
    if (n < 2 || d < 2) throw ConfigError("pure_dp_instance: need n, d >= 2");
    if (!(epsilon > 0.0)) throw ConfigError("pure_dp_instance: epsilon must be positive");
    const auto n_star = static_cast<std::size_t>(
        std::min(static_cast<double>(n), std::ceil(static_cast<double>(d) / (20.0 * epsilon))));
    const PackingFamily family = packing_points(d, 1, rng);

    erm::Dataset data;
    data.tag = erm::DomainTag::packing;
    data.points = Matrix(n, d, 0.0);
    for (std::size_t i = 0; i < n_star; ++i)
        for (std::size_t j = 0; j < d; ++j) data.points(i, j) = family.points(0, j);
    return data;
}

GroupPrivacyPlan replication_plan(std::size_t n, std::size_t k) {
    if (k < 1) throw ConfigError("replication_plan: k must be >= 1");
    GroupPrivacyPlan plan;
    plan.k = k;
    plan.n_k = n / k;
    if (plan.n_k < 2) throw ConfigError("replication_plan: floor(n/k) must be >= 2");
    plan.pad_zero = n - k * plan.n_k;
    return plan;
}

FpInstance fp_hard_instance(std::size_t n, std::size_t k, const fpcode::CodeParams& params,
                            SplitRng& rng, bool core_only) {
    GroupPrivacyPlan plan = replication_plan(n, k);
    if (params.n != plan.n_k)
        throw ConfigError("fp_hard_instance: code parameters are for " + std::to_string(params.n) +
                          " users, expected floor(n/k) = " + std::to_string(plan.n_k));

    FpInstance instance;
    instance.plan = plan;
    auto [codebook, secret] = fpcode::gen(params, rng);
    instance.codebook = std::move(codebook);
    instance.secret = std::move(secret);

    const BitMatrix* source = &instance.codebook.bits;
    fpcode::CoreCode core;
    if (core_only) {
        core = fpcode::recover_core(instance.codebook, instance.secret);
        source = &core.bits;
    }
    const std::size_t d = source->cols();
    instance.data.tag = erm::DomainTag::binary;
    instance.data.points = Matrix(n, d, 0.0);
    for (std::size_t copy = 0; copy < k; ++copy)
        for (std::size_t i = 0; i < plan.n_k; ++i)
            for (std::size_t j = 0; j < d; ++j)
                instance.data.points(copy * plan.n_k + i, j) = (*source)(i, j);
    // remaining plan.pad_zero rows stay all-zero
    return instance;
}

erm::Dataset pad_dataset(const erm::Dataset& data, std::size_t n_target) {
    if (n_target < data.size())
        throw ConfigError("pad_dataset: target size below current size");
    const std::size_t deficit = n_target - data.size();
    if (deficit == 0) return data;

    const std::size_t half_rows = deficit % 2;
    const std::size_t each = (deficit - half_rows) / 2;
    const std::size_t d = data.dim();

    erm::Dataset padded;
    padded.tag = data.tag;
    if (half_rows > 0 && data.tag == erm::DomainTag::binary)
        padded.tag = erm::DomainTag::binary_half;
    padded.points = Matrix(n_target, d);
    for (std::size_t i = 0; i < data.size(); ++i)
        for (std::size_t j = 0; j < d; ++j) padded.points(i, j) = data.points(i, j);
    std::size_t row = data.size();
    for (std::size_t i = 0; i < each; ++i, ++row)
        for (std::size_t j = 0; j < d; ++j) padded.points(row, j) = 0.0;
    for (std::size_t i = 0; i < each; ++i, ++row)
        for (std::size_t j = 0; j < d; ++j) padded.points(row, j) = 1.0;
    if (half_rows > 0) {
        for (std::size_t j = 0; j < d; ++j) padded.points(row, j) = 0.5;
    }
    return padded;
}

GroupPrivacy group_privacy_params(double epsilon, double delta, std::size_t k) {
    if (!(epsilon > 0.0)) throw ConfigError("group_privacy_params: epsilon must be positive");
    if (delta < 0.0 || delta >= 1.0)
        throw ConfigError("group_privacy_params: delta must lie in [0,1)");
    if (k < 1) throw ConfigError("group_privacy_params: k must be >= 1");

    GroupPrivacy result;
    const double kd = static_cast<double>(k);
    result.epsilon = kd * epsilon;
    if (delta == 0.0) {
        result.delta = 0.0;
        return result;
    }
    const double growth = std::exp(kd * epsilon);
    if (!std::isfinite(growth)) {
        result.delta = std::numeric_limits<double>::infinity();
        result.saturated = true;
        return result;
    }
    result.delta = kd * delta * growth;
    result.saturated = !std::isfinite(result.delta);
    return result;
}

double dilution_bound(std::size_t k, std::size_t n) {
    const GroupPrivacyPlan plan = replication_plan(n, k);
    const double nd = static_cast<double>(n);
    return static_cast<double>(plan.pad_zero) / (2.0 * nd) + 1.0 / (2.0 * nd);
}

std::vector<bool> biased_column_stability(const BitMatrix& data_k, std::size_t k, std::size_t n,
                                          double alpha) {
    if (data_k.rows() == 0 || data_k.cols() == 0)
        throw ConfigError("biased_column_stability: empty matrix");
    const GroupPrivacyPlan plan = replication_plan(n, k);
    if (data_k.rows() != plan.n_k)
        throw ConfigError("biased_column_stability: matrix has " + std::to_string(data_k.rows()) +
                          " rows, expected floor(n/k) = " + std::to_string(plan.n_k));

    const double shrink = static_cast<double>(k * plan.n_k) / static_cast<double>(n);
    std::vector<bool> verdicts(data_k.cols());
    for (std::size_t j = 0; j < data_k.cols(); ++j) {
        const double mean = data_k.column_mean(j);
        // a column sitting exactly at 1/2 has no side to preserve
        if (mean == 0.5 || std::abs(mean - 0.5) < alpha) {
            verdicts[j] = false;
            continue;
        }
        const double padded_mean = mean * shrink;  // replication keeps the mean; zeros dilute it
        verdicts[j] = (mean > 0.5) ? (padded_mean > 0.5) : (padded_mean < 0.5);
    }
    return verdicts;
}

}  // namespace dplb::hardgen
