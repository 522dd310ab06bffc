#include "dplb/commands.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "dplb/errors.hpp"
#include "dplb/io.hpp"
#include "dplb/mech.hpp"

namespace dplb::commands {

namespace {

using nlohmann::json;

fpcode::CodeParams make_params(std::size_t n, double xi,
                               const std::optional<std::size_t>& d_override) {
    return d_override ? fpcode::derive_params_with_length(n, xi, *d_override)
                      : fpcode::derive_params(n, xi);
}

json params_summary(const fpcode::CodeParams& params) {
    return json{{"n", params.n},
                {"xi", params.xi},
                {"d_core", params.d_core},
                {"d_total", params.d_total()},
                {"d_overridden", params.d_overridden},
                {"bias_floor", params.bias_floor},
                {"bias_angle", params.bias_angle},
                {"trace_threshold", params.trace_threshold}};
}

mech::MechanismHandle make_mechanism(const std::string& name, double epsilon, double delta,
                                     const SweepConfig* sweep) {
    if (name == "exact_erm") return mech::exact_erm();
    if (name == "laplace_mean") return mech::laplace_mean({epsilon, delta});
    if (name == "gaussian_mean") return mech::gaussian_mean({epsilon, delta});
    if (name == "noisy_subgradient") {
        mech::SubgradientConfig config;
        if (sweep) {
            config.steps = sweep->sg_steps;
            config.step_size = sweep->sg_step_size;
            config.clip = sweep->sg_clip;
        } else {
            config.steps = 50;
            config.step_size = 0.05;
            config.clip = 1.0;
        }
        return mech::noisy_subgradient({epsilon, delta}, config);
    }
    throw ConfigError("unknown mechanism: " + name);
}

bool known_mechanism(const std::string& name) {
    return name == "exact_erm" || name == "laplace_mean" || name == "gaussian_mean" ||
           name == "noisy_subgradient";
}

std::string feasibility_reason(const std::string& mechanism, std::size_t n, double epsilon,
                               double delta) {
    if (mechanism == "laplace_mean" && delta != 0.0) return "laplace_mean requires delta=0";
    if (mechanism == "gaussian_mean") {
        if (delta <= 0.0) return "gaussian_mean requires delta>0";
        if (epsilon > 1.0) return "gaussian calibration requires epsilon<=1";
    }
    if (mechanism == "noisy_subgradient" && delta <= 0.0)
        return "noisy_subgradient requires delta>0";
    if (delta > 0.0 && delta >= 1.0 / static_cast<double>(n))
        return "delta >= 1/n (privacy guarantee vacuous)";
    return {};
}

}  // namespace

GenResult cmd_gen(const GenConfig& config) {
    std::size_t users = config.n;
    if (config.rows) {
        if (config.k < 1) throw ConfigError("gen: k must be >= 1");
        const std::size_t derived = *config.rows / config.k;
        if (config.n != 0 && config.n != derived)
            throw ConfigError("gen: n=" + std::to_string(config.n) +
                              " conflicts with floor(rows/k)=" + std::to_string(derived));
        users = derived;
    }
    const fpcode::CodeParams params = make_params(users, config.xi, config.d_override);

    std::filesystem::create_directories(config.out_dir);
    GenResult result;
    result.params = params;
    result.codebook_path = config.out_dir / (config.prefix + "_codebook.txt");
    result.secret_path = config.out_dir / (config.prefix + "_secret.json");
    result.manifest_path = config.out_dir / (config.prefix + "_manifest.json");

    json files{{"codebook", result.codebook_path.filename().string()},
               {"secret", result.secret_path.filename().string()}};

    SplitRng rng(config.seed);
    if (config.rows) {
        const hardgen::FpInstance instance =
            hardgen::fp_hard_instance(*config.rows, config.k, params, rng);
        result.dataset_path = config.out_dir / (config.prefix + "_dataset.csv");
        io::write_codebook(result.codebook_path, instance.codebook);
        io::write_secret(result.secret_path, instance.secret);
        io::write_dataset(*result.dataset_path, instance.data);
        files["dataset"] = result.dataset_path->filename().string();
        result.manifest = json{{"command", "gen"},
                               {"seed", config.seed},
                               {"params", params_summary(params)},
                               {"rows", *config.rows},
                               {"k", config.k},
                               {"n_k", instance.plan.n_k},
                               {"pad_zero", instance.plan.pad_zero},
                               {"padding", "zero"},
                               {"files", files}};
    } else {
        auto [codebook, secret] = fpcode::gen(params, rng);
        io::write_codebook(result.codebook_path, codebook);
        io::write_secret(result.secret_path, secret);
        result.manifest = json{{"command", "gen"},
                               {"seed", config.seed},
                               {"params", params_summary(params)},
                               {"files", files}};
    }
    io::write_json(result.manifest_path, result.manifest);
    return result;
}

nlohmann::json cmd_trace(const TraceConfig& config) {
    const fpcode::Codebook codebook = io::read_codebook(config.codebook_path);
    const fpcode::CodeSecret secret = io::read_secret(config.secret_path);
    const BinaryWord word = io::read_word(config.word_path);

    SplitRng rng(config.seed);
    const fpcode::Accusation accusation = fpcode::trace(codebook, secret, word, rng);

    const auto max_it = std::max_element(accusation.scores.begin(), accusation.scores.end());
    json out{{"accused", nullptr},
             {"accused_set", accusation.accused_set},
             {"threshold", codebook.params.trace_threshold / 2.0},
             {"max_score", *max_it},
             {"max_score_user", static_cast<std::size_t>(max_it - accusation.scores.begin())},
             {"n", codebook.params.n},
             {"d_core", codebook.params.d_core}};
    if (accusation.accused) out["accused"] = *accusation.accused;
    return out;
}

AuditResult cmd_audit_bias(const AuditConfig& config) {
    if (config.seeds < 1) throw ConfigError("audit-bias: need at least one seed");
    if (config.d_core < 1) throw ConfigError("audit-bias: need an explicit d");
    // xi does not enter the column model (t = 1/300n), so it is fixed here.
    const fpcode::CodeParams params =
        fpcode::derive_params_with_length(config.n, 0.1, config.d_core);

    AuditResult result;
    SplitRng root(config.seed);
    std::ostringstream csv;
    csv << "seed,near_unbiased_fraction\n";
    for (std::size_t s = 0; s < config.seeds; ++s) {
        SplitRng rng = root.substream(s);
        const fpcode::CoreCode core = fpcode::gen_core(params, rng);
        const double fraction = marking::biased_mean_fraction(core.bits, config.alpha);
        result.fractions.push_back(fraction);
        csv << s << ',' << io::format_double(fraction) << '\n';
    }
    result.p50 = quantile(result.fractions, 0.50);
    result.p95 = quantile(result.fractions, 0.95);
    result.max = *std::max_element(result.fractions.begin(), result.fractions.end());
    result.csv = csv.str();
    if (config.out_csv) io::write_text(*config.out_csv, result.csv);
    return result;
}

AttackResult cmd_attack(const AttackConfig& config) {
    const fpcode::CodeParams params = make_params(config.n, config.xi, config.d_override);
    std::vector<std::size_t> coalition = config.coalition;
    if (coalition.empty()) {
        coalition.resize(config.n);
        std::iota(coalition.begin(), coalition.end(), std::size_t{0});
    }

    marking::Adversary adversary;
    const marking::AdversaryKind kind = marking::adversary_from_string(config.adversary);
    if (kind == marking::AdversaryKind::mechanism_round) {
        adversary = marking::Adversary::mechanism_round(
            make_mechanism(config.mechanism, config.mech_epsilon, config.mech_delta, nullptr));
    } else {
        adversary.kind = kind;
    }

    AttackResult result;
    result.stats = marking::run_security_experiment(params, adversary, coalition, config.beta,
                                                    config.trials, SplitRng(config.seed));
    const double trials = static_cast<double>(result.stats.trials);
    const double failure_bound = config.xi + config.slack;
    result.soundness_ok =
        static_cast<double>(result.stats.false_accusations) / trials <= failure_bound;
    result.completeness_ok =
        static_cast<double>(result.stats.completeness_failures) / trials <= failure_bound;

    result.summary = io::security_stats_json(result.stats);
    result.summary["adversary"] = config.adversary;
    result.summary["coalition"] = coalition;
    result.summary["beta"] = config.beta;
    result.summary["xi"] = config.xi;
    result.summary["slack"] = config.slack;
    result.summary["soundness_ok"] = result.soundness_ok;
    result.summary["completeness_ok"] = result.completeness_ok;
    if (config.out_csv) io::write_text(*config.out_csv, io::security_trials_csv(result.stats));
    return result;
}

SweepResult cmd_lowerbound(const SweepConfig& config) {
    if (config.mechanisms.empty()) throw ConfigError("lowerbound: mechanism list is empty");
    if (config.n_list.empty() || config.d_list.empty() || config.epsilon_list.empty() ||
        config.delta_list.empty() || config.p_list.empty())
        throw ConfigError("lowerbound: every sweep axis needs at least one value");
    if (config.trials < 1) throw ConfigError("lowerbound: trials must be >= 1");

    auto sorted_unique = [](auto values) {
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        return values;
    };
    const auto mechanisms = sorted_unique(config.mechanisms);
    const auto n_list = sorted_unique(config.n_list);
    const auto d_list = sorted_unique(config.d_list);
    const auto epsilon_list = sorted_unique(config.epsilon_list);
    const auto delta_list = sorted_unique(config.delta_list);
    auto p_list = config.p_list;
    {
        // normalize then sort so "2.0" and "2" are one cell
        std::vector<std::pair<erm::LpGeometry, std::string>> parsed;
        for (const std::string& text : p_list) {
            const erm::LpGeometry geometry = erm::lp_from_string(text);
            parsed.emplace_back(geometry, geometry.to_string());
        }
        std::sort(parsed.begin(), parsed.end(), [](const auto& a, const auto& b) {
            const double pa = a.first.is_infinity ? std::numeric_limits<double>::infinity()
                                                  : a.first.p;
            const double pb = b.first.is_infinity ? std::numeric_limits<double>::infinity()
                                                  : b.first.p;
            return pa < pb;
        });
        p_list.clear();
        for (const auto& [geometry, text] : parsed)
            if (p_list.empty() || p_list.back() != text) p_list.push_back(text);
    }
    for (const std::string& name : mechanisms)
        if (!known_mechanism(name)) throw ConfigError("unknown mechanism: " + name);

    const SplitRng root(config.seed);
    SweepResult result;
    std::size_t cell_index = 0;
    for (const std::string& mechanism : mechanisms)
        for (const std::size_t n : n_list)
            for (const std::size_t d : d_list)
                for (const double epsilon : epsilon_list)
                    for (const double delta : delta_list)
                        for (const std::string& p_text : p_list) {
                            SweepRow row;
                            row.mechanism = mechanism;
                            row.n = n;
                            row.d = d;
                            row.k = config.k;
                            row.epsilon = epsilon;
                            row.delta = delta;
                            row.p = p_text;
                            row.trials = config.trials;
                            SplitRng cell_rng = root.substream(cell_index++);

                            const std::string reason = feasibility_reason(mechanism, n, epsilon, delta);
                            if (!reason.empty()) {
                                row.skipped = true;
                                row.reason = reason;
                                result.rows.push_back(std::move(row));
                                continue;
                            }
                            try {
                                const bool packing_instance = mechanism == "laplace_mean";
                                erm::Dataset data;
                                SplitRng instance_rng = cell_rng.substream(0);
                                if (packing_instance) {
                                    data = hardgen::pure_dp_instance(n, d, epsilon, instance_rng);
                                } else {
                                    const fpcode::CodeParams params =
                                        fpcode::derive_params_with_length(n / config.k, config.xi, d);
                                    data = hardgen::fp_hard_instance(n, config.k, params, instance_rng)
                                               .data;
                                }
                                row.d_data = data.dim();

                                const erm::LpGeometry geometry = erm::lp_from_string(p_text);
                                const erm::LpConstants constants =
                                    erm::lp_constants(row.d_data, geometry);
                                row.lipschitz_g = constants.lipschitz;
                                row.diameter_c = constants.diameter;
                                row.curve = delta > 0.0
                                                ? erm::lower_bound_curve(n, row.d_data, epsilon,
                                                                         delta, config.c0)
                                                : erm::lower_bound_curve_pure(n, row.d_data,
                                                                              epsilon, config.c0);
                                row.curve_per_dim = row.curve / static_cast<double>(row.d_data);

                                const mech::MechanismHandle handle =
                                    make_mechanism(mechanism, epsilon, delta, &config);
                                const erm::LossFamily loss =
                                    erm::LossFamily::l1_for_dimension(row.d_data, geometry);
                                double total = 0.0;
                                for (std::size_t t = 0; t < config.trials; ++t) {
                                    SplitRng trial_rng = cell_rng.substream(1 + t);
                                    const std::vector<double> theta = handle->run(data, trial_rng);
                                    total += erm::excess_loss(loss, theta, data).excess;
                                }
                                row.mean_excess = total / static_cast<double>(config.trials);
                                row.mean_excess_per_dim =
                                    row.mean_excess / static_cast<double>(row.d_data);
                            } catch (const ConfigError& err) {
                                row.skipped = true;
                                row.reason = err.what();
                            }
                            result.rows.push_back(std::move(row));
                        }

    std::ostringstream csv;
    csv << "mechanism,n,d,d_data,k,epsilon,delta,p,trials,mean_excess_l1,mean_excess_l1_per_dim,"
           "lower_curve,lower_curve_per_dim,lipschitz_G,diameter_C,status,reason\n";
    for (const SweepRow& row : result.rows) {
        csv << row.mechanism << ',' << row.n << ',' << row.d << ',';
        if (!row.skipped) csv << row.d_data;
        csv << ',' << row.k << ',' << io::format_double(row.epsilon) << ','
            << io::format_double(row.delta) << ',' << row.p << ',' << row.trials << ',';
        if (!row.skipped) {
            csv << io::format_double(row.mean_excess) << ','
                << io::format_double(row.mean_excess_per_dim) << ','
                << io::format_double(row.curve) << ',' << io::format_double(row.curve_per_dim)
                << ',' << io::format_double(row.lipschitz_g) << ','
                << io::format_double(row.diameter_c) << ",ok,";
        } else {
            std::string reason = row.reason;
            std::replace(reason.begin(), reason.end(), ',', ';');
            csv << ",,,,,,skipped," << reason;
        }
        csv << '\n';
    }
    result.csv = csv.str();
    if (config.out_csv) io::write_text(*config.out_csv, result.csv);
    return result;
}

double fit_loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw ConfigError("fit_loglog_slope: need at least two matching points");
    const double count = static_cast<double>(xs.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!(xs[i] > 0.0) || !(ys[i] > 0.0))
            throw ConfigError("fit_loglog_slope: values must be positive");
        const double lx = std::log(xs[i]);
        const double ly = std::log(ys[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double denom = count * sxx - sx * sx;
    if (denom == 0.0) throw ConfigError("fit_loglog_slope: degenerate abscissae");
    return (count * sxy - sx * sy) / denom;
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw ConfigError("quantile: empty sample");
    if (!(q > 0.0) || q > 1.0) throw ConfigError("quantile: q must lie in (0,1]");
    std::sort(values.begin(), values.end());
    const auto rank = static_cast<std::size_t>(
        std::ceil(q * static_cast<double>(values.size())));
    return values[rank - 1];
}

}  // namespace dplb::commands
