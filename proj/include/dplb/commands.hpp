#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dplb/fpcode.hpp"
#include "dplb/hardgen.hpp"
#include "dplb/marking.hpp"

// Command implementations behind the CLI. Everything here is deterministic
// given its config (seed included): reruns produce byte-identical files.
namespace dplb::commands {

struct GenConfig {
    std::size_t n = 0;  // code users; derived from rows/k when rows is set
    double xi = 0.1;
    std::optional<std::size_t> d_override;
    std::uint64_t seed = 0;
    std::filesystem::path out_dir = ".";
    std::string prefix = "code";
    // When rows is set, also emit the replicated hard-instance dataset.
    std::optional<std::size_t> rows;
    std::size_t k = 1;
};

struct GenResult {
    fpcode::CodeParams params;
    std::filesystem::path codebook_path;
    std::filesystem::path secret_path;
    std::filesystem::path manifest_path;
    std::optional<std::filesystem::path> dataset_path;
    nlohmann::json manifest;
};

GenResult cmd_gen(const GenConfig& config);

struct TraceConfig {
    std::filesystem::path codebook_path;
    std::filesystem::path secret_path;
    std::filesystem::path word_path;
    std::uint64_t seed = 0;
};

nlohmann::json cmd_trace(const TraceConfig& config);

struct AuditConfig {
    std::size_t n = 0;
    std::size_t d_core = 0;
    double alpha = 0.0;
    std::size_t seeds = 0;  // run count; run s draws from substream(s) of seed
    std::uint64_t seed = 0;
    std::optional<std::filesystem::path> out_csv;
};

struct AuditResult {
    std::vector<double> fractions;  // one per run, in run order
    double p50 = 0.0;
    double p95 = 0.0;
    double max = 0.0;
    std::string csv;
};

AuditResult cmd_audit_bias(const AuditConfig& config);

struct AttackConfig {
    std::size_t n = 0;
    double xi = 0.1;
    std::optional<std::size_t> d_override;
    std::string adversary = "majority_vote";
    std::vector<std::size_t> coalition;  // empty means the full coalition [n]
    double beta = 1.0 / 75.0;
    std::size_t trials = 0;
    std::uint64_t seed = 0;
    double slack = 0.05;  // finite-trial allowance on top of xi
    // mechanism_round only:
    std::string mechanism = "gaussian_mean";
    double mech_epsilon = 1.0;
    double mech_delta = 1e-6;
    std::optional<std::filesystem::path> out_csv;
};

struct AttackResult {
    marking::SecurityStats stats;
    bool soundness_ok = false;
    bool completeness_ok = false;
    nlohmann::json summary;
};

AttackResult cmd_attack(const AttackConfig& config);

struct SweepConfig {
    std::vector<std::string> mechanisms;
    std::vector<std::size_t> n_list;
    std::vector<std::size_t> d_list;  // core length for code instances
    std::vector<double> epsilon_list;
    std::vector<double> delta_list;
    std::vector<std::string> p_list = {"2"};
    std::size_t k = 1;
    std::size_t trials = 20;
    std::uint64_t seed = 0;
    double c0 = 0.01;
    double xi = 0.1;
    std::size_t sg_steps = 50;
    double sg_step_size = 0.05;
    double sg_clip = 1.0;
    std::optional<std::filesystem::path> out_csv;
};

struct SweepRow {
    std::string mechanism;
    std::size_t n = 0;
    std::size_t d = 0;       // swept value (core length for code instances)
    std::size_t d_data = 0;  // dataset dimension the excess is measured on
    std::size_t k = 1;
    double epsilon = 0.0;
    double delta = 0.0;
    std::string p;
    std::size_t trials = 0;
    double mean_excess = 0.0;
    double mean_excess_per_dim = 0.0;
    double curve = 0.0;
    double curve_per_dim = 0.0;
    double lipschitz_g = 0.0;
    double diameter_c = 0.0;
    bool skipped = false;
    std::string reason;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::string csv;
};

SweepResult cmd_lowerbound(const SweepConfig& config);

// Least-squares slope of ln(y) against ln(x).
double fit_loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys);

// Nearest-rank quantile (q in (0,1]) of an unsorted sample.
double quantile(std::vector<double> values, double q);

}  // namespace dplb::commands
