#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dplb/commands.hpp"
#include "dplb/errors.hpp"
#include "dplb/io.hpp"

namespace {

using dplb::commands::AttackConfig;
using dplb::commands::AuditConfig;
using dplb::commands::GenConfig;
using dplb::commands::SweepConfig;
using dplb::commands::TraceConfig;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIntegrity = 3;

int run(int argc, char** argv) {
    CLI::App app{"Fingerprinting codes, hard instances and baseline DP mechanisms "
                 "for empirical lower-bound experiments on private ERM"};
    app.require_subcommand(1);
    app.set_config("--config")->configurable(false);

    GenConfig gen;
    CLI::App* gen_cmd = app.add_subcommand("gen", "Generate a codebook, its secret, and a manifest");
    gen_cmd->add_option("--n", gen.n, "Number of users");
    gen_cmd->add_option("--xi", gen.xi, "Security parameter in (0,1]")->capture_default_str();
    gen_cmd->add_option("--d", gen.d_override, "Core length override (default: formula value)");
    gen_cmd->add_option("--seed", gen.seed, "64-bit seed")->capture_default_str();
    gen_cmd->add_option("--out", gen.out_dir, "Output directory")->capture_default_str();
    gen_cmd->add_option("--prefix", gen.prefix, "Output file prefix")->capture_default_str();
    gen_cmd->add_option("--rows", gen.rows, "Also emit a dataset with this many rows");
    gen_cmd->add_option("--k", gen.k, "Replication factor for the dataset")->capture_default_str();

    TraceConfig trace;
    CLI::App* trace_cmd = app.add_subcommand("trace", "Trace a word against a codebook");
    trace_cmd->add_option("--codebook", trace.codebook_path, "Codebook file")->required();
    trace_cmd->add_option("--secret", trace.secret_path, "Secret file")->required();
    trace_cmd->add_option("--word", trace.word_path, "Word file (0/1 characters)")->required();
    trace_cmd->add_option("--seed", trace.seed, "64-bit seed")->capture_default_str();

    AuditConfig audit;
    CLI::App* audit_cmd =
        app.add_subcommand("audit-bias", "Fraction of near-unbiased columns across seeds");
    audit_cmd->add_option("--n", audit.n, "Number of rows")->required();
    audit_cmd->add_option("--d", audit.d_core, "Core length")->required();
    audit_cmd->add_option("--alpha", audit.alpha, "Bias threshold")->required();
    audit_cmd->add_option("--seeds", audit.seeds, "Number of seeded runs")->required();
    audit_cmd->add_option("--seed", audit.seed, "Base seed")->capture_default_str();
    audit_cmd->add_option("--out", audit.out_csv, "CSV output path");

    AttackConfig attack;
    std::vector<std::string> coalition_tokens{"all"};
    CLI::App* attack_cmd = app.add_subcommand("attack", "Run a tracing security experiment");
    attack_cmd->add_option("--n", attack.n, "Number of users")->required();
    attack_cmd->add_option("--xi", attack.xi, "Security parameter")->capture_default_str();
    attack_cmd->add_option("--d", attack.d_override, "Core length override");
    attack_cmd
        ->add_option("--adversary", attack.adversary,
                     "majority_vote | copy_first_row | random_consistent | mechanism_round")
        ->capture_default_str();
    attack_cmd->add_option("--coalition", coalition_tokens,
                           "Comma-separated 0-based user ids, or 'all'")
        ->delimiter(',');
    attack_cmd->add_option("--beta", attack.beta, "Marking error tolerance")->capture_default_str();
    attack_cmd->add_option("--trials", attack.trials, "Trial count")->required();
    attack_cmd->add_option("--seed", attack.seed, "64-bit seed")->capture_default_str();
    attack_cmd->add_option("--slack", attack.slack, "Monte Carlo allowance over xi")
        ->capture_default_str();
    attack_cmd->add_option("--mechanism", attack.mechanism, "Mechanism for mechanism_round")
        ->capture_default_str();
    attack_cmd->add_option("--epsilon", attack.mech_epsilon, "Mechanism epsilon")
        ->capture_default_str();
    attack_cmd->add_option("--delta", attack.mech_delta, "Mechanism delta")->capture_default_str();
    attack_cmd->add_option("--out", attack.out_csv, "Per-trial CSV output path");

    SweepConfig sweep;
    CLI::App* sweep_cmd =
        app.add_subcommand("lowerbound", "Sweep mechanisms over hard instances, emit CSV");
    sweep_cmd->add_option("--mechanisms", sweep.mechanisms, "Mechanism names")
        ->delimiter(',')
        ->required();
    sweep_cmd->add_option("--n", sweep.n_list, "Dataset sizes")->delimiter(',')->required();
    sweep_cmd->add_option("--d", sweep.d_list, "Core lengths")->delimiter(',')->required();
    sweep_cmd->add_option("--epsilon", sweep.epsilon_list, "Epsilons")->delimiter(',')->required();
    sweep_cmd->add_option("--delta", sweep.delta_list, "Deltas")->delimiter(',')->required();
    sweep_cmd->add_option("--p", sweep.p_list, "lp geometries (numbers or 'inf')")
        ->delimiter(',')
        ->capture_default_str();
    sweep_cmd->add_option("--k", sweep.k, "Replication factor")->capture_default_str();
    sweep_cmd->add_option("--trials", sweep.trials, "Trials per cell")->capture_default_str();
    sweep_cmd->add_option("--seed", sweep.seed, "64-bit seed")->capture_default_str();
    sweep_cmd->add_option("--c0", sweep.c0, "Reference-curve constant")->capture_default_str();
    sweep_cmd->add_option("--xi", sweep.xi, "Code security parameter")->capture_default_str();
    sweep_cmd->add_option("--sg-steps", sweep.sg_steps, "noisy_subgradient steps")
        ->capture_default_str();
    sweep_cmd->add_option("--sg-step-size", sweep.sg_step_size, "noisy_subgradient step size")
        ->capture_default_str();
    sweep_cmd->add_option("--sg-clip", sweep.sg_clip, "noisy_subgradient clip norm")
        ->capture_default_str();
    sweep_cmd->add_option("--out", sweep.out_csv, "CSV output path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (gen_cmd->parsed()) {
            if (gen.n == 0 && !gen.rows) throw dplb::ConfigError("gen: --n (or --rows) is required");
            const auto result = dplb::commands::cmd_gen(gen);
            std::cout << result.manifest.dump(2) << "\n";
        } else if (trace_cmd->parsed()) {
            std::cout << dplb::commands::cmd_trace(trace).dump(2) << "\n";
        } else if (audit_cmd->parsed()) {
            const auto result = dplb::commands::cmd_audit_bias(audit);
            if (!audit.out_csv) std::cout << result.csv;
            const nlohmann::json summary{
                {"p50", result.p50}, {"p95", result.p95}, {"max", result.max}};
            std::cout << summary.dump(2) << "\n";
        } else if (attack_cmd->parsed()) {
            if (coalition_spec != "all") {
                attack.coalition.clear();
                std::size_t start = 0;
                while (start <= coalition_spec.size()) {
                    const std::size_t comma = coalition_spec.find(',', start);
                    const std::size_t end =
                        comma == std::string::npos ? coalition_spec.size() : comma;
                    const std::string token = coalition_spec.substr(start, end - start);
                    try {
                        attack.coalition.push_back(std::stoul(token));
                    } catch (const std::exception&) {
                        throw dplb::ConfigError("attack: bad coalition entry '" + token + "'");
                    }
                    if (comma == std::string::npos) break;
                    start = comma + 1;
                }
            }
            const auto result = dplb::commands::cmd_attack(attack);
            std::cout << result.summary.dump(2) << "\n";
            std::printf("[%s] soundness: false accusations %zu/%zu (bound %.4f)\n",
                        result.soundness_ok ? "PASS" : "FAIL", result.stats.false_accusations,
                        result.stats.trials, attack.xi + attack.slack);
            std::printf("[%s] completeness: failures %zu/%zu (bound %.4f)\n",
                        result.completeness_ok ? "PASS" : "FAIL",
                        result.stats.completeness_failures, result.stats.trials,
                        attack.xi + attack.slack);
        } else if (sweep_cmd->parsed()) {
            const auto result = dplb::commands::cmd_lowerbound(sweep);
            if (!sweep.out_csv) std::cout << result.csv;
        }
    } catch (const dplb::IntegrityError& err) {
        std::cerr << "integrity error: " << err.what() << "\n";
        return kExitIntegrity;
    } catch (const dplb::ConfigError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitConfig;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
