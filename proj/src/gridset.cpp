#include "nlperim/gridset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nlperim/errors.hpp"
#include "nlperim/kernels.hpp"

namespace nlp {

namespace {

constexpr double kFar = 1e30;

void check_same(const Lattice& a, const Lattice& b, const char* what) {
    require(a.same_as(b), ErrorKind::Precondition, std::string(what) + ": lattice mismatch");
}

}  // namespace

double Lattice::cell_volume() const { return std::pow(h, dim); }

bool Lattice::same_as(const Lattice& o) const {
    if (dim != o.dim || n != o.n) return false;
    if (std::abs(h - o.h) > 1e-12 * h) return false;
    for (int a = 0; a < 3; ++a)
        if (std::abs(origin[a] - o.origin[a]) > 1e-9 * h) return false;
    return true;
}

Lattice Lattice::covering(int dim, double h, const Point3& lo, const Point3& hi, double pad) {
    require(dim >= 1 && dim <= 3, ErrorKind::Unsupported, "lattice dimension must be 1, 2 or 3");
    require(h > 0, ErrorKind::Domain, "lattice spacing must be positive");
    Lattice l;
    l.dim = dim;
    l.h = h;
    for (int a = 0; a < dim; ++a) {
        double i0 = std::floor((lo[a] - pad) / h + 1e-9);
        double i1 = std::ceil((hi[a] + pad) / h - 1e-9);
        if (i1 <= i0) i1 = i0 + 1;
        l.origin[a] = i0 * h;
        l.n[a] = static_cast<int>(i1 - i0);
    }
    return l;
}

std::size_t GridSet::count() const {
    std::size_t c = 0;
    for (auto v : occ) c += v != 0;
    return c;
}

std::size_t GridSet::member_count() const { return complement ? occ.size() - count() : count(); }

// -- shapes -------------------------------------------------------------------

ShapeDesc ShapeDesc::ball(const Point3& c, double r) {
    require(r > 0, ErrorKind::Domain, "ball radius must be positive");
    ShapeDesc s;
    s.kind = Kind::Ball;
    s.a = c;
    s.radius = r;
    return s;
}

ShapeDesc ShapeDesc::box(const Point3& lo, const Point3& hi) {
    ShapeDesc s;
    s.kind = Kind::Box;
    s.a = lo;
    s.b = hi;
    return s;
}

ShapeDesc ShapeDesc::make_union(std::vector<ShapeDesc> parts) {
    ShapeDesc s;
    s.kind = Kind::Union;
    s.parts = std::move(parts);
    return s;
}

ShapeDesc ShapeDesc::difference(ShapeDesc a, ShapeDesc b) {
    ShapeDesc s;
    s.kind = Kind::Difference;
    s.parts = {std::move(a), std::move(b)};
    return s;
}

ShapeDesc ShapeDesc::lattice_balls(double spacing, int max_index, std::function<double(const Index3&)> rule) {
    require(spacing > 0, ErrorKind::Domain, "lattice ball spacing must be positive");
    ShapeDesc s;
    s.kind = Kind::LatticeBalls;
    s.spacing = spacing;
    s.max_index = max_index;
    s.radius_rule = std::move(rule);
    return s;
}

namespace {

template <class F>
void for_lattice_balls(const ShapeDesc& s, int dim, F&& f) {
    const int M = s.max_index;
    Index3 a{0, 0, 0};
    const int lo1 = dim > 1 ? -M : 0, hi1 = dim > 1 ? M : 0;
    const int lo2 = dim > 2 ? -M : 0, hi2 = dim > 2 ? M : 0;
    for (a[2] = lo2; a[2] <= hi2; ++a[2])
        for (a[1] = lo1; a[1] <= hi1; ++a[1])
            for (a[0] = -M; a[0] <= M; ++a[0]) {
                double r = s.radius_rule(a);
                if (r <= 0) continue;
                Point3 c{0, 0, 0};
                for (int k = 0; k < dim; ++k) c[k] = s.spacing * a[k];
                f(c, r);
            }
}

void raster_ball(const Point3& c, double r, GridSet& out, bool value, RasterInfo& info) {
    const Lattice& L = out.lat;
    Index3 lo{0, 0, 0}, hi{0, 0, 0};
    for (int a = 0; a < L.dim; ++a) {
        double l = (c[a] - r - L.origin[a]) / L.h - 0.5, u = (c[a] + r - L.origin[a]) / L.h - 0.5;
        if (c[a] - r < L.origin[a] || c[a] + r > L.origin[a] + L.n[a] * L.h) info.truncated = true;
        lo[a] = std::max(0, static_cast<int>(std::floor(l)));
        hi[a] = std::min(L.n[a] - 1, static_cast<int>(std::ceil(u)));
        if (hi[a] < lo[a]) return;
    }
    const double r2 = r * r;
    for (int k = lo[2]; k <= hi[2]; ++k)
        for (int j = lo[1]; j <= hi[1]; ++j)
            for (int i = lo[0]; i <= hi[0]; ++i) {
                Point3 p = L.center(Index3{i, j, k});
                double d2 = 0;
                for (int a = 0; a < L.dim; ++a) d2 += (p[a] - c[a]) * (p[a] - c[a]);
                if (d2 < r2) out.occ[L.linear(i, j, k)] = value;
            }
}

void raster_box(const Point3& blo, const Point3& bhi, GridSet& out, bool value, RasterInfo& info) {
    const Lattice& L = out.lat;
    Index3 lo{0, 0, 0}, hi{0, 0, 0};
    for (int a = 0; a < L.dim; ++a) {
        if (blo[a] < L.origin[a] || bhi[a] > L.origin[a] + L.n[a] * L.h) info.truncated = true;
        // centers strictly inside (blo, bhi)
        double l = (blo[a] - L.origin[a]) / L.h - 0.5, u = (bhi[a] - L.origin[a]) / L.h - 0.5;
        int i0 = static_cast<int>(std::floor(l)) + 1, i1 = static_cast<int>(std::ceil(u)) - 1;
        lo[a] = std::max(0, i0);
        hi[a] = std::min(L.n[a] - 1, i1);
        if (hi[a] < lo[a]) return;
    }
    for (int k = lo[2]; k <= hi[2]; ++k)
        for (int j = lo[1]; j <= hi[1]; ++j)
            for (int i = lo[0]; i <= hi[0]; ++i) out.occ[L.linear(i, j, k)] = value;
}

void raster(const ShapeDesc& s, GridSet& out, bool value, RasterInfo& info) {
    switch (s.kind) {
        case ShapeDesc::Kind::Ball: raster_ball(s.a, s.radius, out, value, info); break;
        case ShapeDesc::Kind::Box: raster_box(s.a, s.b, out, value, info); break;
        case ShapeDesc::Kind::Union:
            for (const auto& p : s.parts) raster(p, out, value, info);
            break;
        case ShapeDesc::Kind::Difference: {
            require(s.parts.size() == 2, ErrorKind::Domain, "difference needs two parts");
            GridSet tmp(out.lat);
            raster(s.parts[0], tmp, true, info);
            RasterInfo ignored;
            raster(s.parts[1], tmp, false, ignored);
            for (std::size_t i = 0; i < tmp.occ.size(); ++i)
                if (tmp.occ[i]) out.occ[i] = value;
            break;
        }
        case ShapeDesc::Kind::LatticeBalls:
            for_lattice_balls(s, out.lat.dim, [&](const Point3& c, double r) { raster_ball(c, r, out, value, info); });
            break;
    }
}

}  // namespace

GridSet make_shape(const ShapeDesc& desc, const Lattice& lat, RasterInfo* info) {
    GridSet s(lat);
    RasterInfo local;
    raster(desc, s, true, local);
    local.empty = s.count() == 0;
    if (info) *info = local;
    return s;
}

std::pair<Point3, Point3> shape_bounds(const ShapeDesc& s, int dim) {
    const double inf = std::numeric_limits<double>::infinity();
    Point3 lo{0, 0, 0}, hi{0, 0, 0};
    switch (s.kind) {
        case ShapeDesc::Kind::Ball:
            for (int a = 0; a < dim; ++a) lo[a] = s.a[a] - s.radius, hi[a] = s.a[a] + s.radius;
            break;
        case ShapeDesc::Kind::Box:
            for (int a = 0; a < dim; ++a) lo[a] = s.a[a], hi[a] = s.b[a];
            break;
        case ShapeDesc::Kind::Union: {
            for (int a = 0; a < dim; ++a) lo[a] = inf, hi[a] = -inf;
            for (const auto& p : s.parts) {
                auto [l, u] = shape_bounds(p, dim);
                for (int a = 0; a < dim; ++a) lo[a] = std::min(lo[a], l[a]), hi[a] = std::max(hi[a], u[a]);
            }
            break;
        }
        case ShapeDesc::Kind::Difference: return shape_bounds(s.parts.at(0), dim);
        case ShapeDesc::Kind::LatticeBalls: {
            for (int a = 0; a < dim; ++a) lo[a] = inf, hi[a] = -inf;
            for_lattice_balls(s, dim, [&](const Point3& c, double r) {
                for (int a = 0; a < dim; ++a) lo[a] = std::min(lo[a], c[a] - r), hi[a] = std::max(hi[a], c[a] + r);
            });
            break;
        }
    }
    return {lo, hi};
}

bool shape_contains(const ShapeDesc& s, int dim, const Point3& p) {
    switch (s.kind) {
        case ShapeDesc::Kind::Ball: {
            double d2 = 0;
            for (int a = 0; a < dim; ++a) d2 += (p[a] - s.a[a]) * (p[a] - s.a[a]);
            return d2 < s.radius * s.radius;
        }
        case ShapeDesc::Kind::Box:
            for (int a = 0; a < dim; ++a)
                if (!(p[a] > s.a[a] && p[a] < s.b[a])) return false;
            return true;
        case ShapeDesc::Kind::Union:
            for (const auto& q : s.parts)
                if (shape_contains(q, dim, p)) return true;
            return false;
        case ShapeDesc::Kind::Difference:
            return shape_contains(s.parts.at(0), dim, p) && !shape_contains(s.parts.at(1), dim, p);
        case ShapeDesc::Kind::LatticeBalls: {
            bool hit = false;
            for_lattice_balls(s, dim, [&](const Point3& c, double r) {
                double d2 = 0;
                for (int a = 0; a < dim; ++a) d2 += (p[a] - c[a]) * (p[a] - c[a]);
                if (d2 < r * r) hit = true;
            });
            return hit;
        }
    }
    return false;
}

namespace {

bool disjoint_bounds(const std::vector<ShapeDesc>& parts, int dim) {
    for (std::size_t i = 0; i < parts.size(); ++i)
        for (std::size_t j = i + 1; j < parts.size(); ++j) {
            auto [l1, u1] = shape_bounds(parts[i], dim);
            auto [l2, u2] = shape_bounds(parts[j], dim);
            bool sep = false;
            for (int a = 0; a < dim; ++a)
                if (u1[a] < l2[a] || u2[a] < l1[a]) sep = true;
            if (!sep) return false;
        }
    return true;
}

}  // namespace

std::optional<double> analytic_measure(const ShapeDesc& s, int dim) {
    switch (s.kind) {
        case ShapeDesc::Kind::Ball: return unit_ball_volume(dim) * std::pow(s.radius, dim);
        case ShapeDesc::Kind::Box: {
            double v = 1;
            for (int a = 0; a < dim; ++a) v *= s.b[a] - s.a[a];
            return v;
        }
        case ShapeDesc::Kind::Union: {
            if (!disjoint_bounds(s.parts, dim)) return std::nullopt;
            double v = 0;
            for (const auto& p : s.parts) {
                auto m = analytic_measure(p, dim);
                if (!m) return std::nullopt;
                v += *m;
            }
            return v;
        }
        default: return std::nullopt;
    }
}

std::optional<double> analytic_perimeter(const ShapeDesc& s, int dim) {
    switch (s.kind) {
        case ShapeDesc::Kind::Ball: return dim * unit_ball_volume(dim) * std::pow(s.radius, dim - 1);
        case ShapeDesc::Kind::Box: {
            if (dim == 1) return 2.0;
            double w = s.b[0] - s.a[0], l = s.b[1] - s.a[1];
            if (dim == 2) return 2 * (w + l);
            double t = s.b[2] - s.a[2];
            return 2 * (w * l + l * t + t * w);
        }
        case ShapeDesc::Kind::Union: {
            if (!disjoint_bounds(s.parts, dim)) return std::nullopt;
            double v = 0;
            for (const auto& p : s.parts) {
                auto m = analytic_perimeter(p, dim);
                if (!m) return std::nullopt;
                v += *m;
            }
            return v;
        }
        default: return std::nullopt;
    }
}

// -- set algebra ----------------------------------------------------------------

GridSet complement(const GridSet& s) {
    GridSet c = s;
    c.complement = !s.complement;
    return c;
}

GridSet set_union(const GridSet& a, const GridSet& b) {
    check_same(a.lat, b.lat, "set_union");
    GridSet r(a.lat);
    r.complement = a.complement || b.complement;
    for (std::size_t i = 0; i < r.occ.size(); ++i) {
        bool m = a.contains(i) || b.contains(i);
        r.occ[i] = m != r.complement;
    }
    return r;
}

GridSet set_difference(const GridSet& a, const GridSet& b) {
    check_same(a.lat, b.lat, "set_difference");
    GridSet r(a.lat);
    r.complement = a.complement && !b.complement;
    for (std::size_t i = 0; i < r.occ.size(); ++i) {
        bool m = a.contains(i) && !b.contains(i);
        r.occ[i] = m != r.complement;
    }
    return r;
}

GridSet translate(const GridSet& s, const Index3& shift) {
    GridSet r(s.lat);
    r.complement = s.complement;
    for (std::size_t i = 0; i < s.occ.size(); ++i) {
        if (!s.occ[i]) continue;
        Index3 c = s.lat.unravel(i);
        for (int a = 0; a < 3; ++a) c[a] += shift[a];
        require(s.lat.inside(c), ErrorKind::Precondition, "translate: shifted set leaves the window");
        r.occ[s.lat.linear(c)] = 1;
    }
    return r;
}

GridSet embed(const GridSet& s, const Lattice& target) {
    require(s.lat.dim == target.dim && std::abs(s.lat.h - target.h) <= 1e-12 * target.h, ErrorKind::Precondition,
            "embed: spacing mismatch");
    Index3 off{0, 0, 0};
    for (int a = 0; a < target.dim; ++a) {
        double o = (s.lat.origin[a] - target.origin[a]) / target.h;
        off[a] = static_cast<int>(std::lround(o));
        require(std::abs(o - off[a]) < 1e-6, ErrorKind::Precondition, "embed: lattices are not aligned");
    }
    GridSet r(target);
    r.complement = s.complement;
    for (std::size_t i = 0; i < s.occ.size(); ++i) {
        if (!s.occ[i]) continue;
        Index3 c = s.lat.unravel(i);
        for (int a = 0; a < 3; ++a) c[a] += off[a];
        require(target.inside(c), ErrorKind::Precondition, "embed: set does not fit in the target lattice");
        r.occ[target.linear(c)] = 1;
    }
    return r;
}

GridSet crop_to_content(const GridSet& s, int pad) {
    Index3 lo{s.lat.n[0], s.lat.n[1], s.lat.n[2]}, hi{-1, -1, -1};
    for (std::size_t i = 0; i < s.occ.size(); ++i) {
        if (!s.occ[i]) continue;
        Index3 c = s.lat.unravel(i);
        for (int a = 0; a < 3; ++a) lo[a] = std::min(lo[a], c[a]), hi[a] = std::max(hi[a], c[a]);
    }
    Lattice t = s.lat;
    if (hi[0] < 0) {
        for (int a = 0; a < s.lat.dim; ++a) t.n[a] = 1 + 2 * pad;
        GridSet r(t);
        r.complement = s.complement;
        return r;
    }
    for (int a = 0; a < s.lat.dim; ++a) {
        t.origin[a] = s.lat.origin[a] + (lo[a] - pad) * s.lat.h;
        t.n[a] = hi[a] - lo[a] + 1 + 2 * pad;
    }
    return embed(s, t);
}

bool subset_of(const GridSet& a, const GridSet& b) {
    check_same(a.lat, b.lat, "subset_of");
    if (a.complement && !b.complement) return false;
    for (std::size_t i = 0; i < a.occ.size(); ++i)
        if (a.contains(i) && !b.contains(i)) return false;
    return true;
}

// -- geometry ---------------------------------------------------------------------

double measure(const GridSet& s) {
    if (s.complement) return std::numeric_limits<double>::infinity();
    return static_cast<double>(s.count()) * s.lat.cell_volume();
}

namespace {

// Exact 1D squared distance transform (lower envelope of parabolas).
void edt_1d(const double* f, double* out, int n, std::vector<int>& v, std::vector<double>& z) {
    v.resize(n);
    z.resize(n + 1);
    int k = 0;
    v[0] = 0;
    z[0] = -kFar;
    z[1] = kFar;
    for (int q = 1; q < n; ++q) {
        double s;
        for (;;) {
            int p = v[k];
            s = ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * (q - p));
            if (s <= z[k] && k > 0) {
                --k;
                continue;
            }
            break;
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = kFar;
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        double dq = q - v[k];
        out[q] = dq * dq + f[v[k]];
    }
}

}  // namespace

std::vector<double> squared_distance_transform(const Lattice& lat, const std::vector<std::uint8_t>& seeds,
                                               bool seeds_outside) {
    std::vector<double> d(lat.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = seeds[i] ? 0.0 : kFar;
    std::vector<double> line, res;
    std::vector<int> v;
    std::vector<double> z;
    for (int axis = 0; axis < lat.dim; ++axis) {
        const int n = lat.n[axis];
        if (n <= 1) continue;
        line.resize(n);
        res.resize(n);
        const std::size_t stride = axis == 0 ? 1 : (axis == 1 ? lat.n[0] : std::size_t(lat.n[0]) * lat.n[1]);
        for (std::size_t base = 0; base < d.size(); ++base) {
            Index3 c = lat.unravel(base);
            if (c[axis] != 0) continue;
            for (int q = 0; q < n; ++q) line[q] = d[base + q * stride];
            edt_1d(line.data(), res.data(), n, v, z);
            for (int q = 0; q < n; ++q) d[base + q * stride] = std::min(res[q], kFar);
        }
    }
    if (seeds_outside) {
        for (std::size_t i = 0; i < d.size(); ++i) {
            Index3 c = lat.unravel(i);
            for (int a = 0; a < lat.dim; ++a) {
                double e = std::min(c[a] + 1, lat.n[a] - c[a]);
                d[i] = std::min(d[i], e * e);
            }
        }
    }
    return d;
}

double essential_distance(const GridSet& a, const GridSet& b) {
    check_same(a.lat, b.lat, "essential_distance");
    require(a.member_count() > 0 || a.complement, ErrorKind::Domain, "essential_distance: first set is empty");
    require(b.member_count() > 0 || b.complement, ErrorKind::Domain, "essential_distance: second set is empty");
    if (a.complement && b.complement) return 0.0;
    const GridSet& seed = b.complement ? b : a;
    const GridSet& other = b.complement ? a : b;
    std::vector<std::uint8_t> m(seed.occ.size());
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = seed.contains(i);
    auto dt = squared_distance_transform(seed.lat, m, seed.complement);
    double best = kFar;
    for (std::size_t i = 0; i < dt.size(); ++i)
        if (other.contains(i)) best = std::min(best, dt[i]);
    return std::sqrt(best) * a.lat.h;
}

GridSet dilate(const GridSet& s, double r) {
    require(r >= 0, ErrorKind::Domain, "dilate: radius must be nonnegative");
    std::vector<std::uint8_t> m(s.occ.size());
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = s.contains(i);
    GridSet out(s.lat);
    out.complement = s.complement;
    const double lim = (r / s.lat.h) * (r / s.lat.h);
    std::vector<double> dt;
    if (r > 0) dt = squared_distance_transform(s.lat, m, s.complement);
    for (std::size_t i = 0; i < m.size(); ++i) {
        bool member = m[i] || (r > 0 && dt[i] < lim);
        out.occ[i] = member != out.complement;
    }
    return out;
}

GridSet erode(const GridSet& s, double r) { return complement(dilate(complement(s), r)); }

double minkowski_perimeter(const GridSet& s, double eps, const GridField* rho0, const GridField* rho1) {
    require(eps > 0, ErrorKind::Domain, "minkowski_perimeter: eps must be positive");
    for (const GridField* f : {rho0, rho1}) {
        if (!f) continue;
        check_same(f->lat, s.lat, "minkowski_perimeter density");
        require(f->components == 1, ErrorKind::Precondition, "minkowski_perimeter: densities must be scalar");
        for (double v : f->data) require(v >= 0, ErrorKind::Precondition, "minkowski_perimeter: densities must be nonnegative");
    }
    std::vector<std::uint8_t> in(s.occ.size()), out(s.occ.size());
    for (std::size_t i = 0; i < in.size(); ++i) in[i] = s.contains(i), out[i] = !in[i];
    auto d_in = squared_distance_transform(s.lat, in, s.complement);
    auto d_out = squared_distance_transform(s.lat, out, !s.complement);
    const double lim = (eps / s.lat.h) * (eps / s.lat.h);
    double outer = 0, inner = 0;
    for (std::size_t i = 0; i < in.size(); ++i) {
        if (!in[i] && d_in[i] < lim) outer += rho0 ? rho0->data[i] : 1.0;
        if (in[i] && d_out[i] < lim) inner += rho1 ? rho1->data[i] : 1.0;
    }
    return (outer + inner) * s.lat.cell_volume() / eps;
}

}  // namespace nlp
