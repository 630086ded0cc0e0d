#include "nlperim/kernels.hpp"

#include <boost/math/constants/constants.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "interp.hpp"
#include "nlperim/errors.hpp"
#include "quad.hpp"

namespace nlp {

namespace {

constexpr double kPi = boost::math::constants::pi<double>();
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kQTableSize = 4096;
constexpr double kQTableSpan = 1e-6;

void check_dim(int d) { require(d >= 1 && d <= 3, ErrorKind::Unsupported, "dimension must be 1, 2 or 3"); }

}  // namespace

double unit_ball_volume(int d) {
    check_dim(d);
    static const double v[] = {0, 2.0, kPi, 4.0 * kPi / 3.0};
    return v[d];
}

double sphere_area(int d) {
    check_dim(d);
    static const double v[] = {0, 2.0, 2.0 * kPi, 4.0 * kPi};
    return v[d];
}

double localization_constant(int d) {
    check_dim(d);
    static const double v[] = {0, 1.0, 2.0 / kPi, 0.5};
    return v[d];
}

double frac_constant(int d, double a) {
    check_dim(d);
    const double num_arg = 0.5 * (d + a + 1.0);
    const double den_arg = 0.5 * (1.0 - a);
    auto is_pole = [](double x) { return x <= 0 && std::floor(x) == x; };
    require(!is_pole(num_arg) && !is_pole(den_arg), ErrorKind::Domain, "frac_constant: Gamma pole");
    return std::pow(2.0, a) * std::pow(kPi, -0.5 * d) * std::tgamma(num_arg) / std::tgamma(den_arg);
}

double profile_constant(int d, double alpha) {
    check_dim(d);
    require(alpha > 0 && alpha < 1, ErrorKind::Domain, "profile_constant: alpha must lie in (0,1)");
    // Distance from s*e1 to the unit sphere along a direction at angle phi from e1.
    auto t_of = [](double s, double c) { return -s * c + std::sqrt(s * s * c * c + 1.0 - s * s); };
    auto angular = [&](double s) -> double {
        if (d == 1) return std::pow(1.0 - s, -alpha) + std::pow(1.0 + s, -alpha);
        auto g = [&](double phi) {
            double v = std::pow(t_of(s, std::cos(phi)), -alpha);
            return d == 2 ? 2.0 * v : 2.0 * kPi * v * std::sin(phi);
        };
        return detail::integrate_singular(g, 0.0, kPi, 1e-11);
    };
    auto radial = [&](double s) { return sphere_area(d) * std::pow(s, d - 1) * angular(s); };
    const double inner = detail::integrate_singular(radial, 0.0, 1.0, 1e-10);
    const double I = inner / alpha;
    const double C = std::pow(unit_ball_volume(d), -1.0 / d);
    return std::pow(C, d - alpha) * I;
}

// ---------------------------------------------------------------------------

KernelSpec KernelSpec::fractional(int d, double alpha) {
    check_dim(d);
    require(alpha > 0 && alpha < 1, ErrorKind::Domain, "fractional kernel: alpha must lie in (0,1)");
    KernelSpec k;
    k.family_ = KernelFamily::Fractional;
    k.dim_ = d;
    k.alpha_ = alpha;
    k.base_horizon_ = kInf;
    k.base_mass_ = kInf;
    return k;
}

KernelSpec KernelSpec::truncated_fractional(int d, double alpha, double eps) {
    check_dim(d);
    require(alpha > 0 && alpha < 1, ErrorKind::Domain, "truncated fractional kernel: alpha must lie in (0,1)");
    require(eps > 0, ErrorKind::Domain, "truncated fractional kernel: eps must be positive");
    KernelSpec k;
    k.family_ = KernelFamily::TruncatedFractional;
    k.dim_ = d;
    k.alpha_ = alpha;
    k.base_horizon_ = eps;
    k.base_mass_ = std::isinf(eps) ? kInf : sphere_area(d) * std::pow(eps, 1.0 - alpha) / (1.0 - alpha);
    return k;
}

KernelSpec KernelSpec::bump(int d, double eps, double a, double s) {
    check_dim(d);
    require(eps > 0 && std::isfinite(eps), ErrorKind::Domain, "bump kernel: eps must be finite and positive");
    require(a >= 0, ErrorKind::Domain, "bump kernel: amplitude exponent must be nonnegative");
    require(s < d, ErrorKind::Domain, "bump kernel: singularity exponent must be below d for integrability");
    KernelSpec k;
    k.family_ = KernelFamily::Bump;
    k.dim_ = d;
    k.alpha_ = std::max(0.0, s - (d - 1));
    k.base_horizon_ = eps;
    k.bump_a_ = a;
    k.bump_s_ = s;
    k.build_tables();
    return k;
}

KernelSpec KernelSpec::tabulated(int d, std::vector<double> radii, std::vector<double> values) {
    check_dim(d);
    require(radii.size() >= 2 && radii.size() == values.size(), ErrorKind::Domain,
            "tabulated kernel: need at least two (r, value) samples");
    for (std::size_t i = 0; i < radii.size(); ++i) {
        require(radii[i] > 0 && std::isfinite(radii[i]), ErrorKind::Domain, "tabulated kernel: radii must be positive");
        require(values[i] >= 0 && std::isfinite(values[i]), ErrorKind::Domain,
                "tabulated kernel: values must be finite and nonnegative");
        if (i) require(radii[i] > radii[i - 1], ErrorKind::Domain, "tabulated kernel: radii must increase");
    }
    KernelSpec k;
    k.family_ = KernelFamily::Tabulated;
    k.dim_ = d;
    k.alpha_ = 0.0;
    k.base_horizon_ = radii.back();
    k.table_r_ = std::move(radii);
    k.table_v_ = std::move(values);
    k.profile_table_ = std::make_shared<detail::MonotoneCubic>(k.table_r_, k.table_v_);
    k.build_tables();
    return k;
}

void KernelSpec::build_tables() {
    const double H = base_horizon_;
    q_rmin_ = H * kQTableSpan;
    std::vector<double> logr(kQTableSize), q(kQTableSize);
    const double lmin = std::log(q_rmin_), lmax = std::log(H);
    for (int i = 0; i < kQTableSize; ++i) logr[i] = lmin + (lmax - lmin) * i / (kQTableSize - 1);
    logr.back() = lmax;
    q.back() = 0.0;
    auto f = [this](double t) { return base_profile(t) / t; };
    for (int i = kQTableSize - 2; i >= 0; --i) {
        double a = std::exp(logr[i]), b = std::exp(logr[i + 1]);
        q[i] = q[i + 1] + boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 0);
    }
    q_table_ = std::make_shared<detail::MonotoneCubic>(logr, q);
    auto m = [this](double r) { return std::pow(r, dim_ - 1) * base_profile(r); };
    double mass = 0;
    if (family_ == KernelFamily::Tabulated) {
        // integrate piecewise so kinks of the interpolant sit on interval ends
        mass = detail::integrate_smooth(m, 0.0, table_r_.front());
        for (std::size_t i = 0; i + 1 < table_r_.size(); ++i)
            mass += detail::integrate_smooth(m, table_r_[i], table_r_[i + 1], 1e-12);
    } else {
        mass = detail::integrate_singular(m, 0.0, H, 1e-12);
    }
    base_mass_ = sphere_area(dim_) * mass;
}

double KernelSpec::horizon() const { return base_horizon_ * length_; }
bool KernelSpec::finite_horizon() const { return std::isfinite(base_horizon_); }

KernelSpec KernelSpec::with_hypotheses(const HypothesisExponents& h) const {
    KernelSpec k = *this;
    k.hyp_ = h;
    return k;
}

double KernelSpec::base_profile(double r) const {
    switch (family_) {
        case KernelFamily::Fractional:
            return frac_constant(dim_, alpha_) * std::pow(r, -(dim_ - 1 + alpha_));
        case KernelFamily::TruncatedFractional:
            return r <= base_horizon_ ? std::pow(r, -(dim_ + alpha_ - 1)) : 0.0;
        case KernelFamily::Bump: {
            if (r >= base_horizon_) return 0.0;
            double v = std::exp(bump_a_ / (r * r - base_horizon_ * base_horizon_));
            return bump_s_ == 0 ? v : v * std::pow(r, -bump_s_);
        }
        case KernelFamily::Tabulated:
            if (r > base_horizon_) return 0.0;
            return std::max(0.0, (*profile_table_)(r));
    }
    return 0.0;
}

double KernelSpec::base_potential(double r) const {
    switch (family_) {
        case KernelFamily::Fractional: {
            const double p = dim_ - 1 + alpha_;
            return frac_constant(dim_, alpha_) * std::pow(r, -p) / p;
        }
        case KernelFamily::TruncatedFractional: {
            if (r >= base_horizon_) return 0.0;
            const double p = dim_ + alpha_ - 1;
            const double tail = std::isinf(base_horizon_) ? 0.0 : std::pow(base_horizon_, -p);
            return (std::pow(r, -p) - tail) / p;
        }
        case KernelFamily::Bump:
        case KernelFamily::Tabulated: {
            if (r >= base_horizon_) return 0.0;
            if (r >= q_rmin_) return std::max(0.0, (*q_table_)(std::log(r)));
            auto f = [this](double t) { return base_profile(t) / t; };
            return (*q_table_)(std::log(q_rmin_)) + detail::integrate_singular(f, r, q_rmin_, 1e-10);
        }
    }
    return 0.0;
}

double KernelSpec::profile(double r) const { return scale_ * base_profile(r / length_); }
double KernelSpec::extended_profile(double r) const {
    if (family_ == KernelFamily::TruncatedFractional) return scale_ * std::pow(r / length_, -(dim_ + alpha_ - 1));
    return profile(r);
}

double KernelSpec::potential(double r) const { return scale_ * base_potential(r / length_); }

std::string KernelSpec::describe() const {
    std::ostringstream os;
    os.precision(12);
    switch (family_) {
        case KernelFamily::Fractional: os << "fractional(alpha=" << alpha_ << ")"; break;
        case KernelFamily::TruncatedFractional: os << "truncated_fractional(alpha=" << alpha_ << ")"; break;
        case KernelFamily::Bump: os << "bump(a=" << bump_a_ << ",s=" << bump_s_ << ")"; break;
        case KernelFamily::Tabulated: os << "tabulated(n=" << table_r_.size() << ")"; break;
    }
    os << " d=" << dim_ << " horizon=" << horizon() << " scale=" << scale_;
    return os.str();
}

// ---------------------------------------------------------------------------

double eval_kernel(const KernelSpec& spec, std::span<const double> z) {
    double r2 = 0;
    for (int i = 0; i < spec.dim() && i < static_cast<int>(z.size()); ++i) r2 += z[i] * z[i];
    require(r2 > 0, ErrorKind::Domain, "eval_kernel: kernel is singular at the origin");
    return spec.profile(std::sqrt(r2));
}

double potential_Q(const KernelSpec& spec, double r) {
    require(r > 0, ErrorKind::Domain, "potential_Q: radius must be positive");
    return spec.potential(r);
}

double kernel_mass(const KernelSpec& spec) {
    return spec.scale() * std::pow(spec.length(), spec.dim()) * spec.base_mass();
}

double pair_weight_integral(const KernelSpec& spec, double r0, double r1) {
    r1 = std::min(r1, spec.horizon());
    if (!(r1 > r0)) return 0.0;
    require(r0 > 0, ErrorKind::Domain, "pair_weight_integral: inner radius must be positive");
    const int d = spec.dim();
    if (spec.family() == KernelFamily::Fractional || spec.family() == KernelFamily::TruncatedFractional) {
        // rbar(r) = A r^{-(d+alpha-1)} so r^{d-2} rbar(r) = A r^{-1-alpha}
        const double a = spec.alpha();
        const double A = spec.profile(r0) * std::pow(r0, d + a - 1);
        const double hi = std::isinf(r1) ? 0.0 : std::pow(r1, -a);
        return sphere_area(d) * A * (std::pow(r0, -a) - hi) / a;
    }
    auto f = [&](double r) { return std::pow(r, d - 2) * spec.profile(r); };
    return sphere_area(d) * detail::integrate_singular(f, r0, r1, 1e-11);
}

KernelSpec normalize_kernel(const KernelSpec& spec, Normalization mode) {
    KernelSpec k = spec;
    k.norm_ = mode;
    if (mode == Normalization::None) return k;
    require(std::isfinite(spec.base_mass()), ErrorKind::Unsupported,
            "normalize_kernel: kernel is not integrable");
    const double target = mode == Normalization::UnitMass ? 1.0 : static_cast<double>(spec.dim());
    k.scale_ = target / (std::pow(spec.length_, spec.dim_) * spec.base_mass_);
    return k;
}

KernelSpec rescale_kernel(const KernelSpec& spec, double t) {
    require(t > 0 && std::isfinite(t), ErrorKind::Domain, "rescale_kernel: scale must be positive");
    require(spec.finite_horizon(), ErrorKind::Unsupported, "rescale_kernel: kernel horizon must be finite");
    KernelSpec k = spec;
    k.length_ *= t;
    k.scale_ /= std::pow(t, spec.dim_);
    return k;
}

namespace {

std::vector<double> probe_radii(const KernelSpec& spec, int n) {
    const double H = spec.finite_horizon() ? spec.horizon() : 1e3 * spec.length();
    const double lo = std::log(H * 1e-4), hi = std::log(H * (1 - 1e-3));
    std::vector<double> r(n);
    for (int i = 0; i < n; ++i) r[i] = std::exp(lo + (hi - lo) * i / (n - 1));
    return r;
}

}  // namespace

bool radially_nonincreasing(const KernelSpec& spec, int samples) {
    auto r = probe_radii(spec, samples);
    double prev = spec.profile(r[0]);
    for (std::size_t i = 1; i < r.size(); ++i) {
        double v = spec.profile(r[i]);
        if (v > prev * (1 + 1e-12)) return false;
        prev = v;
    }
    return true;
}

bool strictly_decreasing_f(const KernelSpec& spec, int samples) {
    auto r = probe_radii(spec, samples);
    const int d = spec.dim();
    double prev = std::pow(r[0], d - 2) * spec.profile(r[0]);
    for (std::size_t i = 1; i < r.size(); ++i) {
        double v = std::pow(r[i], d - 2) * spec.profile(r[i]);
        if (!(v < prev)) return false;
        prev = v;
    }
    return true;
}

HypothesisReport validate_hypotheses(const KernelSpec& spec, const std::vector<double>& samples, double almost_bound) {
    require(samples.size() >= 2, ErrorKind::Domain, "validate_hypotheses: need at least two sample radii");
    for (std::size_t i = 0; i < samples.size(); ++i) {
        require(samples[i] > 0, ErrorKind::Precondition, "validate_hypotheses: radii must be positive");
        if (spec.finite_horizon())
            require(samples[i] < spec.horizon(), ErrorKind::Precondition, "validate_hypotheses: radii must lie below the horizon");
        if (i) require(samples[i] > samples[i - 1], ErrorKind::Precondition, "validate_hypotheses: radii must increase");
    }
    const int d = spec.dim();
    const auto& hp = spec.hypotheses();
    const double eta = hp.eta > 0 ? hp.eta : (spec.finite_horizon() ? 0.5 * spec.horizon() : kInf);
    HypothesisReport rep;
    rep.sigma = hp.sigma;
    rep.gamma = hp.gamma;
    rep.eta = eta;

    // worst consecutive ratio and almost-monotonicity constant for a sequence
    // that should be nonincreasing (decreasing = true) or nondecreasing
    auto check = [&](const std::string& name, double expo, bool decreasing, bool only_eta, bool almost) {
        HypothesisCheck c;
        c.name = name;
        std::vector<double> g;
        for (double r : samples)
            if (!only_eta || r < eta) g.push_back(std::pow(r, expo) * spec.profile(r));
        if (g.size() < 2) {
            c.status = "unverified";
            return c;
        }
        double worst = 0, C = 1, extreme = g[0];
        for (std::size_t i = 1; i < g.size(); ++i) {
            double num = decreasing ? g[i] : g[i - 1];
            double den = decreasing ? g[i - 1] : g[i];
            double ratio = den > 0 ? num / den : (num > 0 ? kInf : 1.0);
            worst = std::max(worst, ratio);
            // decreasing: need g[j] <= C g[i] for i<j -> track min so far
            if (decreasing) {
                extreme = std::min(extreme, g[i - 1]);
                double q = extreme > 0 ? g[i] / extreme : (g[i] > 0 ? kInf : 1.0);
                C = std::max(C, q);
            } else {
                extreme = std::max(extreme, g[i - 1]);
                double q = g[i] > 0 ? extreme / g[i] : (extreme > 0 ? kInf : 1.0);
                C = std::max(C, q);
            }
        }
        c.worst_ratio = worst;
        c.almost_constant = C;
        bool ok = almost ? (C <= almost_bound) : (worst <= 1 + 1e-12);
        c.status = ok ? "pass" : "violated";
        return c;
    };
    rep.h1 = check("H1", d - 2, true, false, false);
    if (hp.nu > 0) {
        auto extra = check("H1", d - 2 + hp.nu, true, true, false);
        rep.h1.worst_ratio = std::max(rep.h1.worst_ratio, extra.worst_ratio);
        if (extra.status == "violated") rep.h1.status = "violated";
    }
    rep.h2.name = "H2";
    rep.h2.status = "unverified";
    rep.h3 = check("H3", d + hp.sigma - 1, true, true, true);
    rep.h4 = check("H4", d + hp.gamma - 1, false, true, true);
    return rep;
}

}  // namespace nlp
