#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "dplb/matrix.hpp"

namespace dplb::erm {

enum class DomainTag { binary, binary_half, packing, real };

std::string to_string(DomainTag tag);
DomainTag domain_tag_from_string(const std::string& name);

struct Dataset {
    Matrix points;
    DomainTag tag = DomainTag::real;

    std::size_t size() const { return points.rows(); }
    std::size_t dim() const { return points.cols(); }
};

// Throws IntegrityError if any entry falls outside the tagged domain.
void validate_domain(const Dataset& data);

// q(D): the coordinate-wise mean of the rows.
std::vector<double> mean_point(const Dataset& data);

enum class BallNorm { l2, box };

struct Ball {
    std::vector<double> center;
    double radius = 0.0;
    BallNorm norm = BallNorm::l2;

    bool contains(std::span<const double> point, double tol = 0.0) const;
};

std::vector<double> project(std::span<const double> theta, const Ball& ball);

// --- lp geometry ------------------------------------------------------------

// p = infinity is a distinct case, not a float sentinel.
struct LpGeometry {
    static LpGeometry finite(double p);
    static LpGeometry infinity();

    bool is_infinity = false;
    double p = 2.0;

    std::string to_string() const;
};

LpGeometry lp_from_string(const std::string& text);

struct LpConstants {
    double lipschitz;  // G = d^(1-1/p)
    double diameter;   // C = d^(1/p); G*C = d for every p >= 1
};

LpConstants lp_constants(std::size_t d, const LpGeometry& p);

// --- losses -----------------------------------------------------------------

double l1_loss(std::span<const double> theta, std::span<const double> z);

// min_{||y||<=1} -<y,z> + ||theta-y||_2. Equals -<theta,z> inside the unit
// ball and max(0,||theta||-1) at z=0; outside the ball the 2-D reduction to
// span{theta,z} is minimized on the boundary circle (coarse scan + golden
// section, value tolerance ~1e-9).
double extended_linear_loss(std::span<const double> theta, std::span<const double> z);

using ConvexLoss = std::function<double(std::span<const double>)>;

struct ExtensionOptions {
    std::size_t max_iters = 4000;
    double tol = 1e-9;  // stop when an iterate improves by less than this
};

// Inf-convolution extension of a convex G-Lipschitz base loss from a ball to
// all of R^d: x -> min_{y in K} base(y) + G*||x-y||_2. Agrees with base on K
// and stays G-Lipschitz globally. Evaluation outside K runs a projected
// subgradient minimization; non-convergence is reported, not hidden.
class LipschitzExtension {
public:
    LipschitzExtension(ConvexLoss base, Ball domain, double lipschitz_g,
                       ExtensionOptions options = {});

    struct Eval {
        double value = 0.0;
        double residual = 0.0;  // last improvement seen when the budget ran out
        bool converged = true;
    };

    Eval evaluate(std::span<const double> x) const;
    double operator()(std::span<const double> x) const;  // throws on non-convergence

    double lipschitz_g() const { return lipschitz_g_; }
    const Ball& domain() const { return domain_; }

private:
    ConvexLoss base_;
    Ball domain_;
    double lipschitz_g_;
    ExtensionOptions options_;
};

struct LossFamily {
    enum class Kind { l1, extended_linear, generic_extension };

    Kind kind = Kind::l1;
    double lipschitz_g = 1.0;
    LpGeometry geometry = LpGeometry::finite(2.0);
    std::shared_ptr<const LipschitzExtension> extension;  // generic_extension only

    static LossFamily l1_for_dimension(std::size_t d, LpGeometry geometry);
    static LossFamily extended_linear();
    static LossFamily generic(std::shared_ptr<const LipschitzExtension> extension,
                              LpGeometry geometry);
};

double point_loss(const LossFamily& loss, std::span<const double> theta,
                  std::span<const double> z);

// L(theta; D) = (1/n) sum_i loss(theta; z_i)
double empirical_loss(const LossFamily& loss, std::span<const double> theta, const Dataset& data);

// Exact l1 ERM oracle: the coordinate-wise lower median (element ceil(n/2)-1
// of the sorted column).
std::vector<double> l1_minimizer(const Dataset& data);

struct ExcessLossReport {
    double loss_at_theta = 0.0;
    double optimal_loss = 0.0;
    double excess = 0.0;
    std::vector<double> minimizer;
};

ExcessLossReport excess_loss(const LossFamily& loss, std::span<const double> theta,
                             const Dataset& data);

// --- reference curves --------------------------------------------------------

// c0 * min(1, sqrt(d*ln(1/delta))/(n*eps)) * d  (approximate-DP rate, GC = d).
double lower_bound_curve(std::size_t n, std::size_t d, double epsilon, double delta, double c0);

// c0 * min(1, d/(n*eps)) * scale  (pure-DP rate; unit scale by default).
double lower_bound_curve_pure(std::size_t n, std::size_t d, double epsilon, double c0,
                              double scale = 1.0);

}  // namespace dplb::erm
