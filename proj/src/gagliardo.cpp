#include "nlperim/gagliardo.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>

#include "nlperim/errors.hpp"
#include "nlperim/parallel.hpp"
#include "pairs.hpp"
#include "quad.hpp"

namespace nlp {

namespace {

using detail::Offset;
using Clock = std::chrono::steady_clock;

// Largest stencil radius (in cells) enumerated explicitly; beyond it the
// constant-count far field is integrated in the continuum.
double enumeration_cap(int dim) {
    switch (dim) {
        case 1: return 4.0e6;
        case 2: return 1600.0;
        default: return 125.0;
    }
}

struct Box {
    Index3 lo{0, 0, 0};
    Index3 e{0, 0, 0};  // extents; zero when empty
    std::size_t size() const { return std::size_t(e[0]) * e[1] * e[2]; }
    std::size_t linear(int i, int j, int k) const { return (std::size_t(k) * e[1] + j) * e[0] + i; }
};

template <class Pred>
Box bounding_box(const Lattice& L, Pred nonzero) {
    Index3 lo{L.n[0], L.n[1], L.n[2]}, hi{-1, -1, -1};
    for (std::size_t i = 0; i < L.size(); ++i) {
        if (!nonzero(i)) continue;
        Index3 c = L.unravel(i);
        for (int a = 0; a < 3; ++a) lo[a] = std::min(lo[a], c[a]), hi[a] = std::max(hi[a], c[a]);
    }
    Box b;
    if (hi[0] < 0) return b;
    b.lo = lo;
    for (int a = 0; a < 3; ++a) b.e[a] = hi[a] - lo[a] + 1;
    return b;
}

// Overlap ranges of x and x+k inside a box of extents e.
struct Overlap {
    int lo[3], hi[3];
    bool empty = false;
};

Overlap overlap_of(const Index3& e, const Index3& k) {
    Overlap o;
    for (int a = 0; a < 3; ++a) {
        o.lo[a] = std::max(0, -k[a]);
        o.hi[a] = std::min(e[a], e[a] - k[a]);
        if (o.hi[a] <= o.lo[a]) o.empty = true;
    }
    return o;
}

// Shared pair-sum driver. S(k) is the symmetric difference measure of the
// pair offset k (2N(k) for indicators); sfar is its value for offsets with no
// overlap (2 x mass). Returns value = sum over both halves = 2 sum_{k>0} W S.
template <class DirectS>
PerimeterResult pair_sum(int dim, double h, const Index3& e, double sfar, const KernelSpec& spec,
                         const QuadratureConfig& q, DirectS&& S) {
    require(q.refinement >= 1, ErrorKind::Domain, "quadrature refinement must be at least 1");
    PerimeterResult res;
    const double horizon = spec.horizon();
    const bool explicit_trunc = q.truncation > 0 && q.truncation < horizon;
    const double R = explicit_trunc ? q.truncation : horizon;
    double diam = 0;
    for (int a = 0; a < dim; ++a) diam += double(e[a]) * e[a];
    diam = std::sqrt(diam);
    double rc = std::isfinite(R) ? R / h : std::numeric_limits<double>::infinity();
    const double cap = std::max(enumeration_cap(dim), diam + 2.0);
    rc = std::min(rc, cap);

    std::vector<Offset> direct;
    double w_count = 0, err_count = 0, n_count = 0;
    detail::enumerate_half_stencil(spec, dim, h, rc, q.refinement, [&](const Offset& o) {
        bool inside = true;
        for (int a = 0; a < 3; ++a)
            if (std::abs(o.k[a]) >= std::max(e[a], 1)) inside = false;
        if (inside && o.k != std::array<int, 3>{0, 0, 0}) {
            direct.push_back(o);
        } else {
            w_count += o.w;
            err_count += o.err;
            n_count += 1;
        }
    });

    std::vector<double> s(direct.size());
    parallel_chunks(direct.size(), std::max<std::size_t>(1, q.chunk), [&](std::size_t, std::size_t b, std::size_t f) {
        for (std::size_t i = b; i < f; ++i) s[i] = S(direct[i].k);
    });
    double sum = 0, err = 0, pairs = 0;
    for (std::size_t i = 0; i < direct.size(); ++i) {
        sum += direct[i].w * s[i];
        err += direct[i].err * s[i];
        pairs += s[i];
    }
    sum += w_count * sfar;
    err += err_count * sfar;
    pairs += n_count * sfar;
    double value = 2.0 * sum;
    double error = 2.0 * err;
    const double hd = std::pow(h, dim);
    const double rc_len = rc * h;
    if (R > rc_len * (1 + 1e-12)) {
        // every pair beyond the enumerated radius has exactly one end outside the set
        value += sfar * hd * pair_weight_integral(spec, rc_len, R);
        // lattice-vs-continuum mismatch of one shell of offsets
        double shell = sphere_area(dim) * std::pow(rc, dim - 1);
        error += sfar * std::pow(h, 2 * dim) * spec.profile(rc_len) / rc_len * shell;
    }
    if (explicit_trunc) res.tail = sfar * hd * pair_weight_integral(spec, R, horizon);
    res.value = value;
    res.error = error;
    res.pairs = pairs;
    return res;
}

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

PerimeterResult gagliardo_perimeter(const GridSet& set, const KernelSpec& spec, const QuadratureConfig& q) {
    auto t0 = Clock::now();
    require(set.lat.dim == spec.dim(), ErrorKind::Precondition, "gagliardo_perimeter: kernel and set dimensions differ");
    if (set.complement && !spec.finite_horizon() && !(q.truncation > 0))
        fail(ErrorKind::Unsupported, "gagliardo_perimeter: infinite-measure set with an untruncated infinite-horizon kernel");
    // P(E) = P(E^c): always work with the finite mask
    const Lattice& L = set.lat;
    Box box = bounding_box(L, [&](std::size_t i) { return set.occ[i] != 0; });
    PerimeterResult res;
    if (box.size() == 0) {
        res.seconds = seconds_since(t0);
        return res;
    }
    std::vector<std::uint8_t> b(box.size());
    std::uint64_t count = 0;
    for (int k = 0; k < box.e[2]; ++k)
        for (int j = 0; j < box.e[1]; ++j)
            for (int i = 0; i < box.e[0]; ++i) {
                std::uint8_t v = set.occ[L.linear(box.lo[0] + i, box.lo[1] + j, box.lo[2] + k)] ? 1 : 0;
                b[box.linear(i, j, k)] = v;
                count += v;
            }
    auto S = [&](const std::array<int, 3>& k) {
        Overlap o = overlap_of(box.e, k);
        std::uint64_t A = 0;
        if (!o.empty) {
            const int n0 = o.hi[0] - o.lo[0];
            for (int z = o.lo[2]; z < o.hi[2]; ++z)
                for (int y = o.lo[1]; y < o.hi[1]; ++y) {
                    const std::uint8_t* p = &b[box.linear(o.lo[0], y, z)];
                    const std::uint8_t* r = &b[box.linear(o.lo[0] + k[0], y + k[1], z + k[2])];
                    std::uint32_t acc = 0;
                    for (int x = 0; x < n0; ++x) acc += p[x] & r[x];
                    A += acc;
                }
        }
        return 2.0 * static_cast<double>(count - A);
    };
    res = pair_sum(L.dim, L.h, box.e, 2.0 * static_cast<double>(count), spec, q, S);
    res.seconds = seconds_since(t0);
    return res;
}

PerimeterResult gagliardo_seminorm(const GridField& u, const KernelSpec& spec, const QuadratureConfig& q) {
    auto t0 = Clock::now();
    require(u.components == 1, ErrorKind::Precondition, "gagliardo_seminorm: field must be scalar");
    require(u.lat.dim == spec.dim(), ErrorKind::Precondition, "gagliardo_seminorm: kernel and field dimensions differ");
    const Lattice& L = u.lat;
    for (double v : u.data) require(std::isfinite(v), ErrorKind::Domain, "gagliardo_seminorm: non-finite sample");
    Box box = bounding_box(L, [&](std::size_t i) { return u.data[i] != 0.0; });
    PerimeterResult res;
    if (box.size() == 0) {
        res.seconds = seconds_since(t0);
        return res;
    }
    std::vector<double> v(box.size());
    double total = 0;
    for (int k = 0; k < box.e[2]; ++k)
        for (int j = 0; j < box.e[1]; ++j)
            for (int i = 0; i < box.e[0]; ++i) {
                double x = u.data[L.linear(box.lo[0] + i, box.lo[1] + j, box.lo[2] + k)];
                v[box.linear(i, j, k)] = x;
                total += std::abs(x);
            }
    auto S = [&](const std::array<int, 3>& k) {
        Overlap o = overlap_of(box.e, k);
        double shared = 0;
        if (!o.empty) {
            const int n0 = o.hi[0] - o.lo[0];
            for (int z = o.lo[2]; z < o.hi[2]; ++z)
                for (int y = o.lo[1]; y < o.hi[1]; ++y) {
                    const double* p = &v[box.linear(o.lo[0], y, z)];
                    const double* r = &v[box.linear(o.lo[0] + k[0], y + k[1], z + k[2])];
                    double acc = 0;
                    for (int x = 0; x < n0; ++x) acc += std::abs(p[x]) + std::abs(r[x]) - std::abs(p[x] - r[x]);
                    shared += acc;
                }
        }
        return 2.0 * total - shared;
    };
    res = pair_sum(L.dim, L.h, box.e, 2.0 * total, spec, q, S);
    res.seconds = seconds_since(t0);
    return res;
}

CoareaResult coarea_residual(const GridField& u, const KernelSpec& spec, const QuadratureConfig& q) {
    require(u.components == 1, ErrorKind::Precondition, "coarea_residual: field must be scalar");
    CoareaResult r;
    r.seminorm = gagliardo_seminorm(u, spec, q).value;
    std::vector<double> vals(u.data.begin(), u.data.end());
    vals.push_back(0.0);  // value outside the window
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    double acc = 0;
    for (std::size_t j = 0; j + 1 < vals.size(); ++j) {
        const double t = 0.5 * (vals[j] + vals[j + 1]);
        const double dt = vals[j + 1] - vals[j];
        GridSet level(u.lat);
        level.complement = t < 0;
        for (std::size_t i = 0; i < u.data.size(); ++i) {
            bool member = u.data[i] > t;
            level.occ[i] = member != level.complement;
        }
        acc += dt * gagliardo_perimeter(level, spec, q).value;
        r.thresholds.push_back(t);
    }
    r.level_sum = acc;
    r.residual = std::abs(r.seminorm - acc);
    return r;
}

CrossTerm cross_term(const GridSet& a, const GridSet& b, const KernelSpec& spec, const QuadratureConfig& q) {
    require(a.lat.same_as(b.lat), ErrorKind::Precondition, "cross_term: lattice mismatch");
    require(!a.complement && !b.complement, ErrorKind::Precondition, "cross_term: sets must have finite measure");
    const Lattice& L = a.lat;
    Box box = bounding_box(L, [&](std::size_t i) { return a.occ[i] || b.occ[i]; });
    CrossTerm ct;
    if (box.size() == 0) return ct;
    std::vector<std::uint8_t> va(box.size()), vb(box.size());
    for (int k = 0; k < box.e[2]; ++k)
        for (int j = 0; j < box.e[1]; ++j)
            for (int i = 0; i < box.e[0]; ++i) {
                std::size_t src = L.linear(box.lo[0] + i, box.lo[1] + j, box.lo[2] + k);
                va[box.linear(i, j, k)] = a.occ[src] ? 1 : 0;
                vb[box.linear(i, j, k)] = b.occ[src] ? 1 : 0;
            }
    const bool trunc = q.truncation > 0 && q.truncation < spec.horizon();
    double R = trunc ? q.truncation : spec.horizon();
    double diam = 0;
    for (int ax = 0; ax < L.dim; ++ax) diam += double(box.e[ax]) * box.e[ax];
    double rc = std::min(std::isfinite(R) ? R / L.h : std::numeric_limits<double>::infinity(), std::sqrt(diam) + 1);
    std::vector<Offset> offs;
    detail::enumerate_half_stencil(spec, L.dim, L.h, rc, q.refinement, [&](const Offset& o) { offs.push_back(o); });
    auto corr = [&](const std::array<int, 3>& k) {
        Overlap o = overlap_of(box.e, k);
        std::uint64_t c = 0;
        if (o.empty) return 0.0;
        const int n0 = o.hi[0] - o.lo[0];
        for (int z = o.lo[2]; z < o.hi[2]; ++z)
            for (int y = o.lo[1]; y < o.hi[1]; ++y) {
                const std::uint8_t* p = &va[box.linear(o.lo[0], y, z)];
                const std::uint8_t* r = &vb[box.linear(o.lo[0] + k[0], y + k[1], z + k[2])];
                std::uint32_t acc = 0;
                for (int x = 0; x < n0; ++x) acc += p[x] & r[x];
                c += acc;
            }
        return static_cast<double>(c);
    };
    std::vector<double> c(offs.size());
    parallel_chunks(offs.size(), std::max<std::size_t>(1, q.chunk), [&](std::size_t, std::size_t s, std::size_t f) {
        for (std::size_t i = s; i < f; ++i) {
            std::array<int, 3> m{-offs[i].k[0], -offs[i].k[1], -offs[i].k[2]};
            c[i] = corr(offs[i].k) + corr(m);
        }
    });
    for (std::size_t i = 0; i < offs.size(); ++i) {
        ct.value += offs[i].w * c[i];
        ct.error += offs[i].err * c[i];
        ct.pairs += c[i];
    }
    ct.value *= 4.0;
    ct.error *= 4.0;
    return ct;
}

GridSet rasterized_ball(int dim, double h, double radius, double margin) {
    Point3 lo{0, 0, 0}, hi{0, 0, 0};
    for (int a = 0; a < dim; ++a) lo[a] = -radius, hi[a] = radius;
    Lattice L = Lattice::covering(dim, h, lo, hi, margin + h);
    return make_shape(ShapeDesc::ball({0, 0, 0}, radius), L);
}

IsoperimetricGap isoperimetric_gap(const GridSet& set, const KernelSpec& spec, const QuadratureConfig& q) {
    require(!set.complement, ErrorKind::Precondition, "isoperimetric_gap: set must have finite measure");
    require(radially_nonincreasing(spec), ErrorKind::Precondition,
            "isoperimetric_gap: kernel must be radially nonincreasing");
    IsoperimetricGap g;
    const int d = set.lat.dim;
    const double m = measure(set);
    require(m > 0, ErrorKind::Precondition, "isoperimetric_gap: set is empty");
    g.radius = std::pow(m / unit_ball_volume(d), 1.0 / d);
    auto pe = gagliardo_perimeter(set, spec, q);
    auto ball = rasterized_ball(d, set.lat.h, g.radius, 2 * set.lat.h);
    auto pb = gagliardo_perimeter(ball, spec, q);
    g.perimeter = pe.value;
    g.ball_perimeter = pb.value;
    g.gap = pe.value - pb.value;
    g.error = pe.error + pb.error;
    g.ball_like = std::abs(g.gap) <= 2.0 * g.error;
    return g;
}

double ball_perimeter_continuum(const KernelSpec& spec, double r) {
    require(r > 0, ErrorKind::Domain, "ball_perimeter_continuum: radius must be positive");
    const int d = spec.dim();
    const double V = unit_ball_volume(d) * std::pow(r, d);
    auto excess = [&](double t) {
        // |B| - |B cap (B + t e1)|
        if (t >= 2 * r) return V;
        switch (d) {
            case 1: return t;
            case 2: return V - (2 * r * r * std::acos(t / (2 * r)) - 0.5 * t * std::sqrt(4 * r * r - t * t));
            default: {
                const double pi = std::acos(-1.0);
                return V - pi / 12.0 * (4 * r + t) * (2 * r - t) * (2 * r - t);
            }
        }
    };
    const double R = spec.horizon();
    const double inner_end = std::min(2 * r, R);
    auto f = [&](double t) { return std::pow(t, d - 2) * spec.profile(t) * excess(t); };
    double val = sphere_area(d) * detail::integrate_singular(f, 0.0, inner_end, 1e-11);
    if (R > 2 * r) val += V * pair_weight_integral(spec, 2 * r, R);
    return 2.0 * val;
}

}  // namespace nlp
