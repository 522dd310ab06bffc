#include "dplb/erm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "dplb/errors.hpp"

namespace dplb::erm {

namespace {

double l2_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

void require_same_dim(std::size_t a, std::size_t b, const char* where) {
    if (a != b)
        throw ConfigError(std::string(where) + ": dimension mismatch (" + std::to_string(a) +
                          " vs " + std::to_string(b) + ")");
}

}  // namespace

std::string to_string(DomainTag tag) {
    switch (tag) {
        case DomainTag::binary: return "binary";
        case DomainTag::binary_half: return "binary_half";
        case DomainTag::packing: return "packing";
        case DomainTag::real: return "real";
    }
    return "real";
}

DomainTag domain_tag_from_string(const std::string& name) {
    if (name == "binary") return DomainTag::binary;
    if (name == "binary_half") return DomainTag::binary_half;
    if (name == "packing") return DomainTag::packing;
    if (name == "real") return DomainTag::real;
    throw ConfigError("unknown domain tag: " + name);
}

void validate_domain(const Dataset& data) {
    const Matrix& m = data.points;
    switch (data.tag) {
        case DomainTag::binary:
            for (std::size_t i = 0; i < m.rows(); ++i)
                for (std::size_t j = 0; j < m.cols(); ++j)
                    if (m(i, j) != 0.0 && m(i, j) != 1.0)
                        throw IntegrityError("dataset tagged binary has a non-binary entry");
            break;
        case DomainTag::binary_half:
            for (std::size_t i = 0; i < m.rows(); ++i)
                for (std::size_t j = 0; j < m.cols(); ++j)
                    if (m(i, j) != 0.0 && m(i, j) != 0.5 && m(i, j) != 1.0)
                        throw IntegrityError("dataset tagged binary_half has an entry not in {0,1/2,1}");
            break;
        case DomainTag::packing: {
            const double s = 1.0 / std::sqrt(static_cast<double>(m.cols()));
            for (std::size_t i = 0; i < m.rows(); ++i) {
                bool all_zero = true;
                bool all_sign = true;
                for (std::size_t j = 0; j < m.cols(); ++j) {
                    const double v = m(i, j);
                    if (v != 0.0) all_zero = false;
                    if (v != s && v != -s) all_sign = false;
                }
                if (!all_zero && !all_sign)
                    throw IntegrityError("dataset tagged packing has a row that is neither a sign vector nor zero");
            }
            break;
        }
        case DomainTag::real: break;
    }
}

std::vector<double> mean_point(const Dataset& data) {
    if (data.size() == 0) throw ConfigError("mean_point: empty dataset");
    std::vector<double> mean(data.dim(), 0.0);
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto row = data.points.row(i);
        for (std::size_t j = 0; j < data.dim(); ++j) mean[j] += row[j];
    }
    for (double& v : mean) v /= static_cast<double>(data.size());
    return mean;
}

bool Ball::contains(std::span<const double> point, double tol) const {
    require_same_dim(point.size(), center.size(), "Ball::contains");
    if (norm == BallNorm::l2) {
        double s = 0.0;
        for (std::size_t j = 0; j < point.size(); ++j) {
            const double d = point[j] - center[j];
            s += d * d;
        }
        return std::sqrt(s) <= radius + tol;
    }
    for (std::size_t j = 0; j < point.size(); ++j)
        if (std::abs(point[j] - center[j]) > radius + tol) return false;
    return true;
}

std::vector<double> project(std::span<const double> theta, const Ball& ball) {
    require_same_dim(theta.size(), ball.center.size(), "project");
    std::vector<double> out(theta.begin(), theta.end());
    if (ball.norm == BallNorm::box) {
        for (std::size_t j = 0; j < out.size(); ++j)
            out[j] = std::clamp(out[j], ball.center[j] - ball.radius, ball.center[j] + ball.radius);
        return out;
    }
    double dist2 = 0.0;
    for (std::size_t j = 0; j < out.size(); ++j) {
        const double d = out[j] - ball.center[j];
        dist2 += d * d;
    }
    const double dist = std::sqrt(dist2);
    // the relative slack absorbs round-off from a previous projection, which
    // can leave a boundary point an ulp outside; this keeps projection
    // exactly idempotent
    if (dist <= ball.radius * (1.0 + 1e-12)) return out;
    const double scale = ball.radius / dist;
    for (std::size_t j = 0; j < out.size(); ++j)
        out[j] = ball.center[j] + (out[j] - ball.center[j]) * scale;
    return out;
}

LpGeometry LpGeometry::finite(double p) {
    if (!(p >= 1.0)) throw ConfigError("lp geometry requires p >= 1");
    return LpGeometry{false, p};
}

LpGeometry LpGeometry::infinity() { return LpGeometry{true, 0.0}; }

std::string LpGeometry::to_string() const {
    if (is_infinity) return "inf";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", p);
    return buf;
}

LpGeometry lp_from_string(const std::string& text) {
    if (text == "inf" || text == "infinity" || text == "oo") return LpGeometry::infinity();
    try {
        std::size_t used = 0;
        const double p = std::stod(text, &used);
        if (used != text.size()) throw ConfigError("bad lp value: " + text);
        return LpGeometry::finite(p);
    } catch (const std::invalid_argument&) {
        throw ConfigError("bad lp value: " + text);
    } catch (const std::out_of_range&) {
        throw ConfigError("bad lp value: " + text);
    }
}

LpConstants lp_constants(std::size_t d, const LpGeometry& p) {
    if (d < 1) throw ConfigError("lp_constants: dimension must be positive");
    const double dd = static_cast<double>(d);
    if (p.is_infinity) return {dd, 1.0};
    if (p.p == 1.0) return {1.0, dd};
    if (p.p == 2.0) {
        const double r = std::sqrt(dd);
        return {r, r};
    }
    return {std::pow(dd, 1.0 - 1.0 / p.p), std::pow(dd, 1.0 / p.p)};
}

double l1_loss(std::span<const double> theta, std::span<const double> z) {
    require_same_dim(theta.size(), z.size(), "l1_loss");
    double s = 0.0;
    for (std::size_t j = 0; j < theta.size(); ++j) s += std::abs(theta[j] - z[j]);
    return s;
}

namespace {

// Minimize -<y,z2> + ||t2 - y|| over the unit circle in the 2-D reduced
// coordinates: coarse scan to bracket the global minimum, then golden section.
double boundary_minimum_2d(double theta_norm, double z1, double z2) {
    const auto value = [&](double phi) {
        const double y1 = std::cos(phi);
        const double y2 = std::sin(phi);
        const double dx = theta_norm - y1;
        return -(y1 * z1 + y2 * z2) + std::sqrt(dx * dx + y2 * y2);
    };
    constexpr int kGrid = 512;
    constexpr double kTau = 2.0 * std::numbers::pi;
    double best_phi = 0.0;
    double best = value(0.0);
    for (int i = 1; i < kGrid; ++i) {
        const double phi = kTau * i / kGrid;
        const double v = value(phi);
        if (v < best) {
            best = v;
            best_phi = phi;
        }
    }
    double a = best_phi - kTau / kGrid;
    double b = best_phi + kTau / kGrid;
    constexpr double kRatio = 0.6180339887498949;
    double c1 = b - kRatio * (b - a);
    double c2 = a + kRatio * (b - a);
    double f1 = value(c1);
    double f2 = value(c2);
    while (b - a > 1e-13) {
        if (f1 < f2) {
            b = c2;
            c2 = c1;
            f2 = f1;
            c1 = b - kRatio * (b - a);
            f1 = value(c1);
        } else {
            a = c1;
            c1 = c2;
            f1 = f2;
            c2 = a + kRatio * (b - a);
            f2 = value(c2);
        }
    }
    return std::min({best, f1, f2});
}

}  // namespace

double extended_linear_loss(std::span<const double> theta, std::span<const double> z) {
    require_same_dim(theta.size(), z.size(), "extended_linear_loss");
    const double zn = l2_norm(z);
    if (zn > 1.0 + 1e-12) throw ConfigError("extended_linear_loss: ||z||_2 must be <= 1");
    const double tn = l2_norm(theta);
    if (tn <= 1.0) return -dot(theta, z);          // y = theta is feasible and optimal
    if (zn == 0.0) return std::max(0.0, tn - 1.0); // plain distance to the ball

    // 2-D reduction: e1 along theta, e2 the component of z orthogonal to it.
    // Any y-component outside span{theta,z} only grows ||theta-y||.
    const double z_par = dot(theta, z) / tn;
    double z_perp2 = zn * zn - z_par * z_par;
    const double z_perp = z_perp2 > 0.0 ? std::sqrt(z_perp2) : 0.0;
    return boundary_minimum_2d(tn, z_par, z_perp);
}

LipschitzExtension::LipschitzExtension(ConvexLoss base, Ball domain, double lipschitz_g,
                                       ExtensionOptions options)
    : base_(std::move(base)), domain_(std::move(domain)), lipschitz_g_(lipschitz_g),
      options_(options) {
    if (!(lipschitz_g_ > 0.0)) throw ConfigError("LipschitzExtension: G must be positive");
}

LipschitzExtension::Eval LipschitzExtension::evaluate(std::span<const double> x) const {
    // On the domain the extension equals the base: base(y) + G||x-y|| >= base(x)
    // for every y by Lipschitzness, with equality at y = x.
    if (domain_.contains(x, 1e-12)) return {base_(x), 0.0, true};

    const std::size_t d = x.size();
    const auto objective = [&](const std::vector<double>& y) {
        double dist2 = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double diff = x[j] - y[j];
            dist2 += diff * diff;
        }
        return base_(y) + lipschitz_g_ * std::sqrt(dist2);
    };

    // Projected subgradient with finite-difference gradients and a shrinking
    // step. Starting at the projection of x is already near-optimal for
    // well-behaved bases; the loop polishes it.
    std::vector<double> y = project(x, domain_);
    double fy = objective(y);
    double step = std::max(domain_.radius, 1e-3);
    const double h = 1e-6 * std::max(1.0, domain_.radius);
    double last_improvement = std::numeric_limits<double>::infinity();
    std::vector<double> grad(d), candidate(d), probe(d);
    for (std::size_t iter = 0; iter < options_.max_iters; ++iter) {
        probe.assign(y.begin(), y.end());
        for (std::size_t j = 0; j < d; ++j) {
            const double orig = y[j];
            probe[j] = orig + h;
            const double fp = objective(probe);
            probe[j] = orig - h;
            const double fm = objective(probe);
            probe[j] = orig;
            grad[j] = (fp - fm) / (2.0 * h);
        }
        double gn = l2_norm(grad);
        if (gn == 0.0) return {fy, 0.0, true};
        bool improved = false;
        double trial_step = step;
        for (int backtrack = 0; backtrack < 30; ++backtrack) {
            for (std::size_t j = 0; j < d; ++j) candidate[j] = y[j] - trial_step * grad[j] / gn;
            candidate = project(candidate, domain_);
            const double fc = objective(candidate);
            if (fc < fy) {
                last_improvement = fy - fc;
                y.swap(candidate);
                fy = fc;
                improved = true;
                break;
            }
            trial_step *= 0.5;
        }
        if (!improved) return {fy, 0.0, true};  // no descent direction left at this scale
        step = std::max(trial_step, 1e-12);
        if (last_improvement < options_.tol && iter > 8) return {fy, last_improvement, true};
    }
    return {fy, last_improvement, false};
}

double LipschitzExtension::operator()(std::span<const double> x) const {
    const Eval eval = evaluate(x);
    if (!eval.converged)
        throw IntegrityError("LipschitzExtension: minimization did not converge (residual " +
                             std::to_string(eval.residual) + ")");
    return eval.value;
}

LossFamily LossFamily::l1_for_dimension(std::size_t d, LpGeometry geometry) {
    LossFamily family;
    family.kind = Kind::l1;
    family.geometry = geometry;
    family.lipschitz_g = lp_constants(d, geometry).lipschitz;
    return family;
}

LossFamily LossFamily::extended_linear() {
    LossFamily family;
    family.kind = Kind::extended_linear;
    family.geometry = LpGeometry::finite(2.0);
    family.lipschitz_g = 1.0;
    return family;
}

LossFamily LossFamily::generic(std::shared_ptr<const LipschitzExtension> extension,
                               LpGeometry geometry) {
    if (!extension) throw ConfigError("LossFamily::generic: null extension");
    LossFamily family;
    family.kind = Kind::generic_extension;
    family.geometry = geometry;
    family.lipschitz_g = extension->lipschitz_g();
    family.extension = std::move(extension);
    return family;
}

double point_loss(const LossFamily& loss, std::span<const double> theta,
                  std::span<const double> z) {
    switch (loss.kind) {
        case LossFamily::Kind::l1: return l1_loss(theta, z);
        case LossFamily::Kind::extended_linear: return extended_linear_loss(theta, z);
        case LossFamily::Kind::generic_extension: return (*loss.extension)(theta);
    }
    throw ConfigError("point_loss: unknown loss kind");
}

double empirical_loss(const LossFamily& loss, std::span<const double> theta, const Dataset& data) {
    if (data.size() == 0) throw ConfigError("empirical_loss: empty dataset");
    require_same_dim(theta.size(), data.dim(), "empirical_loss");
    double total = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) total += point_loss(loss, theta, data.points.row(i));
    return total / static_cast<double>(data.size());
}

std::vector<double> l1_minimizer(const Dataset& data) {
    if (data.size() == 0) throw ConfigError("l1_minimizer: empty dataset");
    const std::size_t n = data.size();
    const std::size_t d = data.dim();
    const std::size_t median_index = (n + 1) / 2 - 1;  // ceil(n/2) - 1
    std::vector<double> column(n);
    std::vector<double> result(d);
    for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t i = 0; i < n; ++i) column[i] = data.points(i, j);
        std::nth_element(column.begin(), column.begin() + static_cast<std::ptrdiff_t>(median_index),
                         column.end());
        result[j] = column[median_index];
    }
    return result;
}

namespace {

std::vector<double> numeric_minimizer_over_ball(const LossFamily& loss, const Dataset& data,
                                                const Ball& domain) {
    // Projected subgradient on the empirical loss with finite differences.
    // Loose by design (documented tolerance 1e-4); the exact paths never get here.
    const std::size_t d = data.dim();
    std::vector<double> theta = domain.center;
    double f = empirical_loss(loss, theta, data);
    double step = std::max(domain.radius, 1e-3);
    const double h = 1e-5;
    std::vector<double> grad(d), candidate(d), probe(d);
    for (std::size_t iter = 0; iter < 2000; ++iter) {
        probe = theta;
        for (std::size_t j = 0; j < d; ++j) {
            const double orig = theta[j];
            probe[j] = orig + h;
            const double fp = empirical_loss(loss, probe, data);
            probe[j] = orig - h;
            const double fm = empirical_loss(loss, probe, data);
            probe[j] = orig;
            grad[j] = (fp - fm) / (2.0 * h);
        }
        double gn = 0.0;
        for (double g : grad) gn += g * g;
        gn = std::sqrt(gn);
        if (gn == 0.0) break;
        bool improved = false;
        double trial = step;
        for (int backtrack = 0; backtrack < 24; ++backtrack) {
            for (std::size_t j = 0; j < d; ++j) candidate[j] = theta[j] - trial * grad[j] / gn;
            candidate = project(candidate, domain);
            const double fc = empirical_loss(loss, candidate, data);
            if (fc < f) {
                theta.swap(candidate);
                f = fc;
                improved = true;
                break;
            }
            trial *= 0.5;
        }
        if (!improved) break;
        step = trial;
        if (step < 1e-10) break;
    }
    return theta;
}

}  // namespace

ExcessLossReport excess_loss(const LossFamily& loss, std::span<const double> theta,
                             const Dataset& data) {
    ExcessLossReport report;
    switch (loss.kind) {
        case LossFamily::Kind::l1: report.minimizer = l1_minimizer(data); break;
        case LossFamily::Kind::extended_linear: {
            // On the unit ball every term is -<theta,z_i>, so the optimum is the
            // normalized mean with value -||mean||_2.
            std::vector<double> mean = mean_point(data);
            const double norm = l2_norm(mean);
            if (norm > 0.0)
                for (double& v : mean) v /= norm;
            report.minimizer = std::move(mean);
            break;
        }
        case LossFamily::Kind::generic_extension:
            report.minimizer =
                numeric_minimizer_over_ball(loss, data, loss.extension->domain());
            break;
    }
    report.loss_at_theta = empirical_loss(loss, theta, data);
    report.optimal_loss = empirical_loss(loss, report.minimizer, data);
    report.excess = report.loss_at_theta - report.optimal_loss;
    if (report.excess < -1e-9)
        throw IntegrityError("excess_loss: computed optimum worse than the query point");
    return report;
}

double lower_bound_curve(std::size_t n, std::size_t d, double epsilon, double delta, double c0) {
    if (!(epsilon > 0.0)) throw ConfigError("lower_bound_curve: epsilon must be positive");
    if (!(delta > 0.0) || delta >= 1.0)
        throw ConfigError("lower_bound_curve: delta must lie in (0,1)");
    if (!(c0 > 0.0)) throw ConfigError("lower_bound_curve: c0 must be positive");
    const double dd = static_cast<double>(d);
    const double rate =
        std::sqrt(dd * std::log(1.0 / delta)) / (static_cast<double>(n) * epsilon);
    return c0 * std::min(1.0, rate) * dd;
}

double lower_bound_curve_pure(std::size_t n, std::size_t d, double epsilon, double c0,
                              double scale) {
    if (!(epsilon > 0.0)) throw ConfigError("lower_bound_curve_pure: epsilon must be positive");
    if (!(c0 > 0.0)) throw ConfigError("lower_bound_curve_pure: c0 must be positive");
    const double rate = static_cast<double>(d) / (static_cast<double>(n) * epsilon);
    return c0 * std::min(1.0, rate) * scale;
}

}  // namespace dplb::erm
