#include "pairs.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <string>
#include <unordered_map>

namespace nlp::detail {

double near_pair_weight(const KernelSpec& spec, int dim, double h, const std::array<int, 3>& k, int s) {
    // sub-sample differences j = b - a with multiplicity prod (s - |j_i|)
    const int lo = -(s - 1), hi = s - 1;
    const int lo1 = dim > 1 ? lo : 0, hi1 = dim > 1 ? hi : 0;
    const int lo2 = dim > 2 ? lo : 0, hi2 = dim > 2 ? hi : 0;
    double acc = 0;
    for (int j2 = lo2; j2 <= hi2; ++j2)
        for (int j1 = lo1; j1 <= hi1; ++j1)
            for (int j0 = lo; j0 <= hi; ++j0) {
                const int j[3] = {j0, j1, j2};
                double mult = 1, r2 = 0;
                for (int a = 0; a < dim; ++a) {
                    mult *= s - std::abs(j[a]);
                    double z = (k[a] + double(j[a]) / s) * h;
                    r2 += z * z;
                }
                double r = std::sqrt(r2);
                acc += mult * spec.profile(r) / r;
            }
    const double norm = std::pow(double(s), 2 * dim);
    return std::pow(h, 2 * dim) * acc / norm;
}

namespace {

// Gauss-Legendre rules on [-1, 1]
constexpr double kG4x[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526};
constexpr double kG4w[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538};
constexpr double kG3x[3] = {-0.7745966692414834, 0.0, 0.7745966692414834};
constexpr double kG3w[3] = {0.5555555555555556, 0.8888888888888888, 0.5555555555555556};

// Density of the difference of two uniform points in neighbouring cells (in
// units of h) times rho(z)/|z| at z = h (k + t).
struct PairIntegrand {
    const KernelSpec& spec;
    int dim;
    double h;
    std::array<int, 3> k;
    double operator()(const double* t) const {
        double r2 = 0, tent = 1;
        for (int a = 0; a < dim; ++a) {
            double z = k[a] + t[a];
            r2 += z * z;
            tent *= 1.0 - std::abs(t[a]);
        }
        if (r2 <= 0 || tent <= 0) return 0.0;
        double r = h * std::sqrt(r2);
        return tent * spec.extended_profile(r) / r;
    }
};

template <int G>
double gauss_box(const PairIntegrand& f, const double* lo, const double* hi, const double* xs, const double* ws) {
    const int d = f.dim;
    double half[3], mid[3];
    for (int a = 0; a < d; ++a) half[a] = 0.5 * (hi[a] - lo[a]), mid[a] = 0.5 * (hi[a] + lo[a]);
    double acc = 0, t[3] = {0, 0, 0};
    const int n1 = d > 1 ? G : 1, n2 = d > 2 ? G : 1;
    for (int i2 = 0; i2 < n2; ++i2)
        for (int i1 = 0; i1 < n1; ++i1)
            for (int i0 = 0; i0 < G; ++i0) {
                const int ii[3] = {i0, i1, i2};
                double w = 1;
                for (int a = 0; a < d; ++a) {
                    t[a] = mid[a] + half[a] * xs[ii[a]];
                    w *= ws[ii[a]] * half[a];
                }
                acc += w * f(t);
            }
    return acc;
}

double adapt_box(const PairIntegrand& f, const double* lo, const double* hi, double tol, int depth, double& err) {
    const int d = f.dim;
    const double whole = gauss_box<4>(f, lo, hi, kG4x, kG4w);
    double parts = 0;
    double clo[8][3], chi[8][3], vals[8];
    const int nc = 1 << d;
    for (int c = 0; c < nc; ++c) {
        for (int a = 0; a < d; ++a) {
            double m = 0.5 * (lo[a] + hi[a]);
            bool upper = (c >> a) & 1;
            clo[c][a] = upper ? m : lo[a];
            chi[c][a] = upper ? hi[a] : m;
        }
        vals[c] = gauss_box<4>(f, clo[c], chi[c], kG4x, kG4w);
        parts += vals[c];
    }
    const double diff = std::abs(parts - whole);
    if (diff <= tol || diff <= 1e-14 * std::abs(parts) || depth >= 40) {
        err += diff;
        return parts;
    }
    double acc = 0;
    for (int c = 0; c < nc; ++c) acc += adapt_box(f, clo[c], chi[c], tol, depth + 1, err);
    return acc;
}

// squared offset (in cells) beyond which the moment-corrected midpoint rule replaces
// the cached product Gauss rule
double gauss_limit(int dim) { return dim <= 2 ? 1024 : 64; }

struct Weight {
    double w, err;
};

Weight compute_weight(const KernelSpec& spec, int dim, double h, const std::array<int, 3>& k) {
    double c2 = 0;
    for (int a = 0; a < dim; ++a) c2 += double(k[a]) * k[a];
    const double r = h * std::sqrt(c2);
    const double h2d = std::pow(h, 2 * dim);
    PairIntegrand f{spec, dim, h, k};
    if (c2 >= gauss_limit(dim)) {
        // midpoint plus second-moment correction (variance h^2/6 per axis)
        auto w = [&](double x) { return spec.extended_profile(x) / x; };
        const double dl = 1e-2 * h;
        const double w0 = w(r), wp = w(r + dl), wm = w(r - dl);
        const double lap = (wp - 2 * w0 + wm) / (dl * dl) + (dim - 1) * (wp - wm) / (2 * dl * r);
        const double corr = h * h / 12.0 * lap;
        const double err = w0 > 0 ? std::min(std::abs(corr), corr * corr / w0) : std::abs(corr);
        return {h2d * (w0 + corr), h2d * std::abs(err)};
    }
    double total = 0, err = 0;
    const int nc = 1 << dim;
    // tolerance scale: largest kernel value over the radii the pair spans (from h outward)
    double scale = spec.extended_profile(std::max(r, h)) / std::max(r, h);
    for (int i = 0; i <= 16; ++i) {
        const double x = h + (r + h) * i / 16.0;
        const double v = spec.extended_profile(x) / x;
        if (std::isfinite(v)) scale = std::max(scale, v);
    }
    scale = std::max(scale, 1e-300);
    for (int c = 0; c < nc; ++c) {
        double lo[3], hi[3];
        for (int a = 0; a < dim; ++a) {
            bool upper = (c >> a) & 1;
            lo[a] = upper ? 0.0 : -1.0;
            hi[a] = upper ? 1.0 : 0.0;
        }
        if (c2 < 4) {
            total += adapt_box(f, lo, hi, 1e-11 * scale, 0, err);
        } else {
            double g4 = gauss_box<4>(f, lo, hi, kG4x, kG4w);
            double g3 = gauss_box<3>(f, lo, hi, kG3x, kG3w);
            total += g4;
            err += std::abs(g4 - g3);
        }
    }
    return {h2d * total, h2d * err};
}

std::mutex g_cache_mu;
std::unordered_map<std::string, Weight> g_cache;

Weight cached_weight(const KernelSpec& spec, int dim, double h, const std::array<int, 3>& k) {
    double c2 = 0;
    for (int a = 0; a < dim; ++a) c2 += double(k[a]) * k[a];
    if (c2 >= gauss_limit(dim)) return compute_weight(spec, dim, h, k);
    // the weight only depends on |k_i| up to permutation
    std::array<int, 3> key{std::abs(k[0]), std::abs(k[1]), std::abs(k[2])};
    std::sort(key.begin(), key.begin() + dim);
    char buf[96];
    std::snprintf(buf, sizeof buf, "|%.17g|%d|%d|%d|%d", h, dim, key[0], key[1], key[2]);
    std::string id = spec.describe() + buf;
    {
        std::lock_guard<std::mutex> lk(g_cache_mu);
        auto it = g_cache.find(id);
        if (it != g_cache.end()) return it->second;
    }
    Weight w = compute_weight(spec, dim, h, key);
    std::lock_guard<std::mutex> lk(g_cache_mu);
    if (g_cache.size() > 200000) g_cache.clear();
    g_cache.emplace(id, w);
    return w;
}

}  // namespace

double cell_pair_weight(const KernelSpec& spec, int dim, double h, const std::array<int, 3>& k, double* err) {
    Weight w = cached_weight(spec, dim, h, k);
    if (err) *err = w.err;
    return w.w;
}

void enumerate_half_stencil(const KernelSpec& spec, int dim, double h, double radius_cells, int /*refinement*/,
                            const std::function<void(const Offset&)>& visit) {
    const double R = spec.horizon();
    double rc = radius_cells;
    if (std::isfinite(R)) rc = std::min(rc, R / h);
    const int M = static_cast<int>(std::floor(rc + 1e-9));
    const int M1 = dim > 1 ? M : 0, M2 = dim > 2 ? M : 0;
    const double rc2 = rc * rc;
    for (int k2 = 0; k2 <= M2; ++k2)
        for (int k1 = k2 == 0 ? 0 : -M1; k1 <= M1; ++k1)
            for (int k0 = (k2 == 0 && k1 == 0) ? 1 : -M; k0 <= M; ++k0) {
                const double c2 = double(k0) * k0 + double(k1) * k1 + double(k2) * k2;
                if (c2 > rc2 * (1 + 1e-12)) continue;
                // center-distance convention: pairs with distance <= horizon count fully
                if (std::isfinite(R) && std::sqrt(c2) * h > R * (1 + 1e-12)) continue;
                Offset o;
                o.k = {k0, k1, k2};
                o.w = cell_pair_weight(spec, dim, h, o.k, &o.err);
                visit(o);
            }
}

std::vector<Offset> full_stencil(const KernelSpec& spec, int dim, double h, double radius, int refinement) {
    std::vector<Offset> out;
    enumerate_half_stencil(spec, dim, h, radius / h, refinement, [&](const Offset& o) {
        if (o.w <= 0) return;
        out.push_back(o);
        Offset m = o;
        for (auto& v : m.k) v = -v;
        out.push_back(m);
    });
    return out;
}

std::array<double, 3> vector_weight(const KernelSpec& spec, int dim, double h, const std::array<double, 3>& z,
                                    bool refine, int s) {
    std::array<double, 3> g{0, 0, 0};
    const double hd = std::pow(h, dim);
    if (!refine) {
        double r2 = 0;
        for (int a = 0; a < dim; ++a) r2 += z[a] * z[a];
        if (r2 <= 0) return g;
        double f = hd * spec.profile(std::sqrt(r2)) / r2;
        for (int a = 0; a < dim; ++a) g[a] = f * z[a];
        return g;
    }
    const int n1 = dim > 1 ? s : 1, n2 = dim > 2 ? s : 1;
    const double sub = hd / std::pow(double(s), dim);
    for (int i2 = 0; i2 < n2; ++i2)
        for (int i1 = 0; i1 < n1; ++i1)
            for (int i0 = 0; i0 < s; ++i0) {
                const int ii[3] = {i0, i1, i2};
                std::array<double, 3> y{0, 0, 0};
                double r2 = 0;
                for (int a = 0; a < dim; ++a) {
                    y[a] = z[a] + ((ii[a] + 0.5) / s - 0.5) * h;
                    r2 += y[a] * y[a];
                }
                if (r2 <= 0) continue;
                double f = sub * spec.profile(std::sqrt(r2)) / r2;
                for (int a = 0; a < dim; ++a) g[a] += f * y[a];
            }
    return g;
}

}  // namespace nlp::detail
