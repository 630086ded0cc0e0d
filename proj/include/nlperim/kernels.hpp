#pragma once

#include <array>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace nlp {

enum class KernelFamily { Fractional, TruncatedFractional, Bump, Tabulated };
enum class Normalization { None, UnitMass, MassD };

/// Exponents and radius used by the monotonicity hypotheses; eta <= 0 means
/// "half the horizon".
struct HypothesisExponents {
    double sigma = 0.5;
    double gamma = 0.5;
    double nu = 0.0;
    double eta = 0.0;
};

namespace detail {
class MonotoneCubic;
}

/**
 * @brief Radial interaction kernel rho(z) = rbar(|z|).
 *
 * The profile is stored as a base profile with a length scale and an
 * amplitude: rbar(r) = scale * base(r / length). Rescaling and normalizing
 * only touch those two numbers, so the base tables are shared between copies.
 */
class KernelSpec {
public:
    static KernelSpec fractional(int d, double alpha);
    /// rbar(r) = r^{-(d+alpha-1)} on (0, eps]; eps may be +infinity.
    static KernelSpec truncated_fractional(int d, double alpha, double eps);
    /// rbar(r) = exp(a / (r^2 - eps^2)) r^{-s} on (0, eps).
    static KernelSpec bump(int d, double eps, double a, double s);
    static KernelSpec tabulated(int d, std::vector<double> radii, std::vector<double> values);

    KernelFamily family() const { return family_; }
    int dim() const { return dim_; }
    double alpha() const { return alpha_; }
    double horizon() const;
    bool finite_horizon() const;
    double scale() const { return scale_; }
    double length() const { return length_; }
    Normalization normalization() const { return norm_; }
    const HypothesisExponents& hypotheses() const { return hyp_; }
    double bump_a() const { return bump_a_; }
    double bump_s() const { return bump_s_; }
    const std::vector<double>& table_radii() const { return table_r_; }
    const std::vector<double>& table_values() const { return table_v_; }

    KernelSpec with_hypotheses(const HypothesisExponents& h) const;

    /// rbar(r) for r > 0.
    double profile(double r) const;
    /// Profile with any hard truncation removed (the power law continued past
    /// the horizon); used to average the kernel over cell pairs.
    double extended_profile(double r) const;
    /// Q(r) = int_r^inf rbar(t)/t dt.
    double potential(double r) const;
    /// Mass of the base profile (scale = length = 1).
    double base_mass() const { return base_mass_; }

    std::string describe() const;

private:
    friend KernelSpec normalize_kernel(const KernelSpec&, Normalization);
    friend KernelSpec rescale_kernel(const KernelSpec&, double);

    double base_profile(double r) const;
    double base_potential(double r) const;
    void build_tables();

    KernelFamily family_ = KernelFamily::TruncatedFractional;
    int dim_ = 2;
    double alpha_ = 0.5;
    double base_horizon_ = 1.0;
    double bump_a_ = 0.0;
    double bump_s_ = 0.0;
    std::vector<double> table_r_, table_v_;
    double scale_ = 1.0;
    double length_ = 1.0;
    Normalization norm_ = Normalization::None;
    HypothesisExponents hyp_;
    double base_mass_ = 0.0;
    std::shared_ptr<const detail::MonotoneCubic> profile_table_;
    std::shared_ptr<const detail::MonotoneCubic> q_table_;
    double q_rmin_ = 0.0;
};

double eval_kernel(const KernelSpec& spec, std::span<const double> z);
double potential_Q(const KernelSpec& spec, double r);

/// c_{d,a} = 2^a pi^{-d/2} Gamma((d+a+1)/2) / Gamma((1-a)/2).
double frac_constant(int d, double a);
/// K_d = mean of |e_1 . sigma| over the unit sphere.
double localization_constant(int d);
double unit_ball_volume(int d);
double sphere_area(int d);
/// c(d, alpha) = C^{d-alpha} int_{B_1} int_{B_1^c} |x-y|^{-d-alpha}, C = |B_1|^{-1/d}.
double profile_constant(int d, double alpha);

/// Total mass int rho over R^d (infinite for the fractional family).
double kernel_mass(const KernelSpec& spec);
/// int_{r0 < |z| < r1} rho(z)/|z| dz.
double pair_weight_integral(const KernelSpec& spec, double r0, double r1);

KernelSpec normalize_kernel(const KernelSpec& spec, Normalization mode);
KernelSpec rescale_kernel(const KernelSpec& spec, double t);

/// True when rbar is nonincreasing on sampled radii inside the horizon.
bool radially_nonincreasing(const KernelSpec& spec, int samples = 512);
/// True when f(r) = r^{d-2} rbar(r) is strictly decreasing on sampled radii.
bool strictly_decreasing_f(const KernelSpec& spec, int samples = 512);

struct HypothesisCheck {
    std::string name;
    std::string status;      // "pass", "violated", "unverified"
    double worst_ratio = 1;  // worst consecutive-sample ratio against the required direction
    double almost_constant = 1;  // smallest C with g(s) <= C g(t) in the required direction
};

struct HypothesisReport {
    HypothesisCheck h1, h2, h3, h4;
    double sigma = 0, gamma = 0, eta = 0;
};

HypothesisReport validate_hypotheses(const KernelSpec& spec, const std::vector<double>& samples,
                                     double almost_bound = 10.0);

}  // namespace nlp
