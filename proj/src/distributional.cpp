#include "nlperim/distributional.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <unordered_map>

#include "nlperim/errors.hpp"
#include "nlperim/parallel.hpp"
#include "pairs.hpp"

namespace nlp {

namespace {

constexpr int kFacetSplit = 8;
constexpr double kInf = std::numeric_limits<double>::infinity();

double norm(const Point3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

double dist(const Point3& a, const Point3& b) {
    return norm(Point3{a[0] - b[0], a[1] - b[1], a[2] - b[2]});
}

double facet_size(const Facet& f) {
    if (f.nv < 2) return 0.0;
    double m = 0;
    for (int i = 0; i < f.nv; ++i)
        for (int j = i + 1; j < f.nv; ++j) m = std::max(m, dist(f.v[i], f.v[j]));
    return m;
}

// Splits a facet into sub-pieces (center, weight).
template <class F>
void split_facet(const Facet& f, int dim, int m, F&& emit) {
    if (dim == 1 || f.nv < 2 || m <= 1) {
        emit(f.center, f.weight);
        return;
    }
    if (dim == 2) {
        for (int i = 0; i < m; ++i) {
            const double t = (i + 0.5) / m;
            Point3 c{0, 0, 0};
            for (int a = 0; a < 3; ++a) c[a] = f.v[0][a] + t * (f.v[1][a] - f.v[0][a]);
            emit(c, f.weight / m);
        }
        return;
    }
    const Point3 &A = f.v[0], &B = f.v[1], &C = f.v[2];
    auto P = [&](double i, double j) {
        Point3 p{0, 0, 0};
        for (int a = 0; a < 3; ++a) p[a] = A[a] + (B[a] - A[a]) * i / m + (C[a] - A[a]) * j / m;
        return p;
    };
    const double w = f.weight / (double(m) * m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; i + j < m; ++j) {
            Point3 p0 = P(i, j), p1 = P(i + 1, j), p2 = P(i, j + 1);
            emit(Point3{(p0[0] + p1[0] + p2[0]) / 3, (p0[1] + p1[1] + p2[1]) / 3, (p0[2] + p1[2] + p2[2]) / 3}, w);
            if (i + j <= m - 2) {
                Point3 q = P(i + 1, j + 1);
                emit(Point3{(p1[0] + p2[0] + q[0]) / 3, (p1[1] + p2[1] + q[1]) / 3, (p1[2] + p2[2] + q[2]) / 3}, w);
            }
        }
}

// Buckets facets by position so that evaluation only visits facets within reach.
class FacetGrid {
public:
    FacetGrid(const BoundaryMeasure& bm, double reach) : bm_(bm), dim_(bm.dim) {
        sizes_.reserve(bm.facets.size());
        for (const auto& f : bm.facets) {
            sizes_.push_back(facet_size(f));
            max_size_ = std::max(max_size_, sizes_.back());
        }
        side_ = std::isfinite(reach) ? reach + max_size_ : kInf;
        if (!std::isfinite(side_) || side_ <= 0) return;
        for (std::size_t i = 0; i < bm.facets.size(); ++i) buckets_[key(bucket(bm.facets[i].center))].push_back(i);
    }

    template <class F>
    void visit(const Point3& x, F&& f) const {
        if (!std::isfinite(side_) || side_ <= 0) {
            for (std::size_t i = 0; i < bm_.facets.size(); ++i) f(i);
            return;
        }
        Index3 b = bucket(x);
        const int r1 = dim_ > 1 ? 1 : 0, r2 = dim_ > 2 ? 1 : 0;
        for (int dz = -r2; dz <= r2; ++dz)
            for (int dy = -r1; dy <= r1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    auto it = buckets_.find(key(Index3{b[0] + dx, b[1] + dy, b[2] + dz}));
                    if (it == buckets_.end()) continue;
                    for (std::size_t i : it->second) f(i);
                }
    }

    double size(std::size_t i) const { return sizes_[i]; }
    double max_size() const { return max_size_; }

private:
    Index3 bucket(const Point3& p) const {
        Index3 b{0, 0, 0};
        for (int a = 0; a < dim_; ++a) b[a] = static_cast<int>(std::floor(p[a] / side_));
        return b;
    }
    static long long key(const Index3& b) {
        return ((static_cast<long long>(b[2]) + (1 << 20)) << 42) ^ ((static_cast<long long>(b[1]) + (1 << 20)) << 21) ^
               (static_cast<long long>(b[0]) + (1 << 20));
    }

    const BoundaryMeasure& bm_;
    int dim_;
    std::vector<double> sizes_;
    double max_size_ = 0;
    double side_ = kInf;
    std::unordered_map<long long, std::vector<std::size_t>> buckets_;
};

// Sum over facets of weight(|x - y|, x - y) * nu * w, sub-sampling facets close to x.
template <class W>
Point3 facet_sum(const FacetGrid& grid, const BoundaryMeasure& bm, const Point3& x, double reach, W&& weight) {
    Point3 g{0, 0, 0};
    grid.visit(x, [&](std::size_t i) {
        const Facet& f = bm.facets[i];
        const double len = grid.size(i);
        const double d0 = dist(x, f.center);
        if (d0 >= reach + len) return;
        const int m = (len > 0 && d0 < 2 * len) ? kFacetSplit : 1;
        split_facet(f, bm.dim, m, [&](const Point3& c, double w) {
            Point3 z{x[0] - c[0], x[1] - c[1], x[2] - c[2]};
            const double r = norm(z);
            if (r < 1e-14 || r >= reach) return;
            const double s = weight(r, z) * w;
            for (int a = 0; a < 3; ++a) g[a] += s * f.normal[a];
        });
    });
    return g;
}

Point3 boundary_gradient_point(const FacetGrid& grid, const BoundaryMeasure& bm, const KernelSpec& spec, const Point3& x) {
    return facet_sum(grid, bm, x, spec.horizon(), [&](double r, const Point3&) { return spec.potential(r); });
}

double reach_of(const KernelSpec& spec, const QuadratureConfig& q, const char* what) {
    const double R = (q.truncation > 0) ? std::min(q.truncation, spec.horizon()) : spec.horizon();
    require(std::isfinite(R), ErrorKind::Unsupported,
            std::string(what) + ": infinite horizon needs a truncation radius");
    return R;
}

// Vector stencil of h^d rho(z) z/|z|^2 for |z| <= R, excluding the origin.
struct VecOffset {
    Index3 k;
    Point3 w;
};

std::vector<VecOffset> vector_stencil(const KernelSpec& spec, int dim, double h, double R, int refinement) {
    std::vector<VecOffset> out;
    const int rc = static_cast<int>(std::floor(R / h + 1e-9));
    const int r1 = dim > 1 ? rc : 0, r2 = dim > 2 ? rc : 0;
    for (int k2 = -r2; k2 <= r2; ++k2)
        for (int k1 = -r1; k1 <= r1; ++k1)
            for (int k0 = -rc; k0 <= rc; ++k0) {
                const double r2c = double(k0) * k0 + double(k1) * k1 + double(k2) * k2;
                if (r2c == 0 || r2c * h * h > R * R * (1 + 1e-12)) continue;
                Point3 z{k0 * h, k1 * h, k2 * h};
                auto w = detail::vector_weight(spec, dim, h, z, r2c < 4, refinement);
                if (w[0] == 0 && w[1] == 0 && w[2] == 0) continue;
                out.push_back({Index3{k0, k1, k2}, Point3{w[0], w[1], w[2]}});
            }
    return out;
}

bool member_at(const GridSet& s, const Index3& c) {
    if (!s.lat.inside(c)) return s.complement;
    return s.contains(s.lat.linear(c));
}

double cell_measure(const Lattice& L) { return L.cell_volume(); }

// Distance (cell units, squared) from each cell to the other phase.
std::vector<double> other_phase_distance(const GridSet& s) {
    const Lattice& L = s.lat;
    std::vector<std::uint8_t> in(L.size()), out(L.size());
    for (std::size_t i = 0; i < L.size(); ++i) {
        in[i] = s.contains(i);
        out[i] = !in[i];
    }
    auto d_out = squared_distance_transform(L, out, !s.complement);
    auto d_in = squared_distance_transform(L, in, s.complement);
    std::vector<double> d(L.size());
    for (std::size_t i = 0; i < L.size(); ++i) d[i] = in[i] ? d_out[i] : d_in[i];
    return d;
}

}  // namespace

// ---------------------------------------------------------------------------

std::vector<Point3> gradient_direct_at(const GridSet& set, const KernelSpec& spec, const std::vector<Point3>& points,
                                       const QuadratureConfig& q) {
    const double R = reach_of(spec, q, "gradient_direct_at");
    const Lattice& L = set.lat;
    const double h = L.h;
    const int dim = L.dim;
    std::vector<Point3> out(points.size(), Point3{0, 0, 0});
    parallel_chunks(points.size(), 1, [&](std::size_t, std::size_t b, std::size_t e) {
        for (std::size_t p = b; p < e; ++p) {
            const Point3& x = points[p];
            Index3 cx{0, 0, 0}, lo{0, 0, 0}, hi{0, 0, 0};
            for (int a = 0; a < dim; ++a) {
                const double t = (x[a] - L.origin[a]) / h;
                cx[a] = static_cast<int>(std::floor(t));
                lo[a] = static_cast<int>(std::floor(t - R / h - 1));
                hi[a] = static_cast<int>(std::ceil(t + R / h + 1));
            }
            const bool ux = member_at(set, cx);
            Point3 g{0, 0, 0};
            for (int k = lo[2]; k <= hi[2]; ++k)
                for (int j = lo[1]; j <= hi[1]; ++j)
                    for (int i = lo[0]; i <= hi[0]; ++i) {
                        Index3 c{i, j, k};
                        const bool uy = member_at(set, c);
                        if (uy == ux) continue;
                        Point3 yc = L.center(c);
                        Point3 z{0, 0, 0};
                        double r2 = 0;
                        for (int a = 0; a < dim; ++a) {
                            z[a] = yc[a] - x[a];
                            r2 += z[a] * z[a];
                        }
                        if (r2 > R * R * (1 + 1e-12) || r2 == 0) continue;
                        auto w = detail::vector_weight(spec, dim, h, {z[0], z[1], z[2]}, r2 < 4 * h * h, q.refinement);
                        const double s = uy ? 1.0 : -1.0;
                        for (int a = 0; a < dim; ++a) g[a] += s * w[a];
                    }
            out[p] = g;
        }
    });
    return out;
}

GridField nonlocal_gradient_direct(const GridField& u, const KernelSpec& spec, const QuadratureConfig& q) {
    require(u.components == 1, ErrorKind::Precondition, "nonlocal_gradient_direct: scalar field expected");
    const double R = reach_of(spec, q, "nonlocal_gradient_direct");
    const Lattice& L = u.lat;
    auto st = vector_stencil(spec, L.dim, L.h, R, q.refinement);
    GridField g(L, L.dim);
    parallel_chunks(L.size(), 256, [&](std::size_t, std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            const Index3 c = L.unravel(i);
            const double ui = u.data[i];
            Point3 acc{0, 0, 0};
            for (const auto& o : st) {
                Index3 y{c[0] + o.k[0], c[1] + o.k[1], c[2] + o.k[2]};
                const double uy = L.inside(y) ? u.data[L.linear(y)] : 0.0;
                const double du = uy - ui;
                if (du == 0) continue;
                for (int a = 0; a < L.dim; ++a) acc[a] += du * o.w[a];
            }
            for (int a = 0; a < L.dim; ++a) g.at(i, a) = acc[a];
        }
    });
    return g;
}

GridField nonlocal_gradient_direct(const GridSet& set, const KernelSpec& spec, const QuadratureConfig& q) {
    const double R = reach_of(spec, q, "nonlocal_gradient_direct");
    const Lattice& L = set.lat;
    auto st = vector_stencil(spec, L.dim, L.h, R, q.refinement);
    auto dother = other_phase_distance(set);
    const double lim = (R / L.h + 1) * (R / L.h + 1);
    GridField g(L, L.dim);
    parallel_chunks(L.size(), 256, [&](std::size_t, std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            if (dother[i] > lim) continue;
            const Index3 c = L.unravel(i);
            const bool ui = set.contains(i);
            Point3 acc{0, 0, 0};
            for (const auto& o : st) {
                const bool uy = member_at(set, Index3{c[0] + o.k[0], c[1] + o.k[1], c[2] + o.k[2]});
                if (uy == ui) continue;
                const double s = uy ? 1.0 : -1.0;
                for (int a = 0; a < L.dim; ++a) acc[a] += s * o.w[a];
            }
            for (int a = 0; a < L.dim; ++a) g.at(i, a) = acc[a];
        }
    });
    return g;
}

std::vector<Point3> gradient_boundary_at(const BoundaryMeasure& bm, const KernelSpec& spec,
                                         const std::vector<Point3>& points) {
    FacetGrid grid(bm, spec.horizon());
    std::vector<Point3> out(points.size());
    parallel_chunks(points.size(), 64, [&](std::size_t, std::size_t b, std::size_t e) {
        for (std::size_t p = b; p < e; ++p) out[p] = boundary_gradient_point(grid, bm, spec, points[p]);
    });
    return out;
}

GridField nonlocal_gradient_boundary(const GridSet& set, const KernelSpec& spec, const std::vector<std::uint8_t>* mask) {
    const Lattice& L = set.lat;
    require(!mask || mask->size() == L.size(), ErrorKind::Precondition, "nonlocal_gradient_boundary: mask size");
    BoundaryMeasure bm = extract_boundary(set);
    FacetGrid grid(bm, spec.horizon());
    GridField g(L, L.dim);
    parallel_chunks(L.size(), 256, [&](std::size_t, std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            if (mask && !(*mask)[i]) continue;
            Point3 v = boundary_gradient_point(grid, bm, spec, L.center(i));
            for (int a = 0; a < L.dim; ++a) g.at(i, a) = v[a];
        }
    });
    return g;
}

GridField nonlocal_divergence(const GridField& p, const KernelSpec& spec, const QuadratureConfig& q) {
    const Lattice& L = p.lat;
    require(p.components == L.dim, ErrorKind::Precondition, "nonlocal_divergence: vector field expected");
    const double R = reach_of(spec, q, "nonlocal_divergence");
    auto st = vector_stencil(spec, L.dim, L.h, R, q.refinement);
    GridField out(L, 1);
    parallel_chunks(L.size(), 256, [&](std::size_t, std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            const Index3 c = L.unravel(i);
            double acc = 0;
            for (const auto& o : st) {
                Index3 y{c[0] + o.k[0], c[1] + o.k[1], c[2] + o.k[2]};
                const bool in = L.inside(y);
                const std::size_t j = in ? L.linear(y) : 0;
                for (int a = 0; a < L.dim; ++a) acc += ((in ? p.at(j, a) : 0.0) - p.at(i, a)) * o.w[a];
            }
            out.data[i] = acc;
        }
    });
    return out;
}

double tv_rho(const GridField& u, const KernelSpec& spec, const QuadratureConfig& q) {
    const Lattice& L = u.lat;
    for (std::size_t i = 0; i < L.size(); ++i) {
        const Index3 c = L.unravel(i);
        bool border = false;
        for (int a = 0; a < L.dim; ++a) border = border || c[a] == 0 || c[a] == L.n[a] - 1;
        require(!border || u.data[i] == 0, ErrorKind::Precondition, "tv_rho: field must vanish on the window border");
    }
    GridField g = nonlocal_gradient_direct(u, spec, q);
    double s = 0;
    for (std::size_t i = 0; i < L.size(); ++i) {
        double m = 0;
        for (int a = 0; a < L.dim; ++a) m += g.at(i, a) * g.at(i, a);
        s += std::sqrt(m);
    }
    return s * cell_measure(L);
}

// ---------------------------------------------------------------------------

namespace {

Lattice padded_lattice(const GridSet& s, double pad) {
    const Lattice& L = s.lat;
    Index3 lo{L.n[0], L.n[1], L.n[2]}, hi{-1, -1, -1};
    for (std::size_t i = 0; i < L.size(); ++i)
        if (s.occ[i]) {
            Index3 c = L.unravel(i);
            for (int a = 0; a < 3; ++a) lo[a] = std::min(lo[a], c[a]), hi[a] = std::max(hi[a], c[a]);
        }
    if (hi[0] < 0) return L;
    Point3 plo{0, 0, 0}, phi{0, 0, 0};
    for (int a = 0; a < L.dim; ++a) {
        plo[a] = L.origin[a] + lo[a] * L.h;
        phi[a] = L.origin[a] + (hi[a] + 1) * L.h;
    }
    return Lattice::covering(L.dim, L.h, plo, phi, pad);
}

std::vector<Point3> sub_points(const Point3& c, int dim, double h) {
    std::vector<Point3> pts;
    const int n1 = dim > 1 ? 2 : 1, n2 = dim > 2 ? 2 : 1;
    for (int k = 0; k < n2; ++k)
        for (int j = 0; j < n1; ++j)
            for (int i = 0; i < 2; ++i) {
                Point3 p = c;
                const int ii[3] = {i, j, k};
                for (int a = 0; a < dim; ++a) p[a] += (ii[a] ? 0.25 : -0.25) * h;
                pts.push_back(p);
            }
    return pts;
}

double mag(const Point3& v) { return norm(v); }

}  // namespace

CaccioppoliResult caccioppoli_perimeter(const GridSet& set, const KernelSpec& spec, bool with_error) {
    require(spec.finite_horizon(), ErrorKind::Unsupported, "caccioppoli_perimeter: kernel must be integrable");
    CaccioppoliResult res;
    const GridSet& base = set;
    if (base.count() == 0) {
        res.lattice = set.lat;
        return res;
    }
    const GridSet finite = base.complement ? complement(base) : base;  // |D 1_E| = |D 1_{E^c}|
    BoundaryMeasure bm = extract_boundary(finite);
    FacetGrid grid(bm, spec.horizon());
    Lattice P = padded_lattice(finite, spec.horizon() + 2 * set.lat.h);
    res.lattice = P;
    const std::size_t nchunks = chunk_count(P.size(), 256);
    std::vector<double> part(nchunks, 0.0), part_sub(nchunks, 0.0);
    parallel_chunks(P.size(), 256, [&](std::size_t ci, std::size_t b, std::size_t e) {
        double s = 0, ss = 0;
        for (std::size_t i = b; i < e; ++i) {
            const Point3 x = P.center(i);
            const double m = mag(boundary_gradient_point(grid, bm, spec, x));
            s += m;
            if (with_error) {
                auto pts = sub_points(x, P.dim, P.h);
                double acc = 0;
                for (const auto& y : pts) acc += mag(boundary_gradient_point(grid, bm, spec, y));
                ss += acc / pts.size();
            }
        }
        part[ci] = s;
        part_sub[ci] = ss;
    });
    double s = 0, ss = 0;
    for (std::size_t c = 0; c < nchunks; ++c) s += part[c], ss += part_sub[c];
    res.value = s * P.cell_volume();
    if (with_error) res.error = std::abs(s - ss) * P.cell_volume();
    return res;
}

SubadditivityResult caccioppoli_subadditivity(const GridSet& e1, const GridSet& e2, const KernelSpec& spec) {
    require(spec.finite_horizon(), ErrorKind::Unsupported, "caccioppoli_subadditivity: kernel must be integrable");
    require(e1.lat.same_as(e2.lat), ErrorKind::Precondition, "caccioppoli_subadditivity: lattices differ");
    require(!e1.complement && !e2.complement, ErrorKind::Precondition,
            "caccioppoli_subadditivity: sets must have finite measure");
    for (std::size_t i = 0; i < e1.occ.size(); ++i)
        require(!(e1.occ[i] && e2.occ[i]), ErrorKind::Precondition, "caccioppoli_subadditivity: sets overlap");
    SubadditivityResult res;
    BoundaryMeasure b1 = extract_boundary(e1), b2 = extract_boundary(e2);
    FacetGrid g1(b1, spec.horizon()), g2(b2, spec.horizon());
    GridSet both = set_union(e1, e2);
    Lattice P = padded_lattice(both, spec.horizon() + 2 * both.lat.h);
    const std::size_t nchunks = chunk_count(P.size(), 256);
    struct Acc {
        double p1 = 0, p2 = 0, p12 = 0, def = 0, def_sub = 0;
        std::size_t overlap = 0;
    };
    std::vector<Acc> parts(nchunks);
    const double reach = spec.horizon() + P.h;
    parallel_chunks(P.size(), 256, [&](std::size_t ci, std::size_t b, std::size_t e) {
        Acc acc;
        for (std::size_t i = b; i < e; ++i) {
            const Point3 x = P.center(i);
            Point3 d1 = boundary_gradient_point(g1, b1, spec, x);
            Point3 d2 = boundary_gradient_point(g2, b2, spec, x);
            Point3 d12{d1[0] + d2[0], d1[1] + d2[1], d1[2] + d2[2]};
            const double m1 = mag(d1), m2 = mag(d2), m12 = mag(d12);
            acc.p1 += m1, acc.p2 += m2, acc.p12 += m12;
            const double def = m1 + m2 - m12;
            acc.def += def;
            if (m1 > 0 && m2 > 0) ++acc.overlap;
            // sub-point rule near both boundaries
            bool near1 = false, near2 = false;
            g1.visit(x, [&](std::size_t f) { near1 = near1 || dist(x, b1.facets[f].center) < reach + g1.size(f); });
            if (!near1) {
                acc.def_sub += def;
                continue;
            }
            g2.visit(x, [&](std::size_t f) { near2 = near2 || dist(x, b2.facets[f].center) < reach + g2.size(f); });
            if (!near2) {
                acc.def_sub += def;
                continue;
            }
            auto pts = sub_points(x, P.dim, P.h);
            double s = 0;
            for (const auto& y : pts) {
                Point3 a = boundary_gradient_point(g1, b1, spec, y), c = boundary_gradient_point(g2, b2, spec, y);
                s += mag(a) + mag(c) - mag(Point3{a[0] + c[0], a[1] + c[1], a[2] + c[2]});
            }
            acc.def_sub += s / pts.size();
        }
        parts[ci] = acc;
    });
    Acc t;
    for (const auto& a : parts) {
        t.p1 += a.p1, t.p2 += a.p2, t.p12 += a.p12, t.def += a.def, t.def_sub += a.def_sub;
        t.overlap += a.overlap;
    }
    const double hv = P.cell_volume();
    res.p1 = t.p1 * hv;
    res.p2 = t.p2 * hv;
    res.p12 = t.p12 * hv;
    res.defect = t.def * hv;
    res.error = std::abs(t.def - t.def_sub) * hv;
    res.overlap_cells = t.overlap;
    return res;
}

// ---------------------------------------------------------------------------

Probe normal_probe(const Point3& x0, const Point3& nu, const std::vector<double>& distances) {
    Probe p;
    p.x0 = x0;
    for (double t : distances) p.approach.push_back(Point3{x0[0] + t * nu[0], x0[1] + t * nu[1], x0[2] + t * nu[2]});
    return p;
}

std::vector<AlignmentRow> normal_alignment_profile(const GridSet& set, const KernelSpec& spec,
                                                   const std::vector<Probe>& probes, const QuadratureConfig& q) {
    const double h = set.lat.h;
    BoundaryMeasure bm = extract_boundary(set);
    require(!bm.facets.empty(), ErrorKind::Precondition, "normal_alignment_profile: set has no boundary");
    std::vector<AlignmentRow> rows;
    for (const auto& pr : probes) {
        AlignmentRow row;
        row.x0 = pr.x0;
        Point3 nsum{0, 0, 0};
        std::vector<Point3> near;
        for (const auto& f : bm.facets) {
            const double d = dist(f.center, pr.x0);
            if (d < 3 * h) near.push_back(f.normal);
            if (d < 2 * h)
                for (int a = 0; a < 3; ++a) nsum[a] += f.weight * f.normal[a];
        }
        require(!near.empty(), ErrorKind::Precondition, "normal_alignment_profile: probe point is not on the boundary");
        for (std::size_t i = 0; i < near.size(); ++i)
            for (std::size_t j = i + 1; j < near.size(); ++j) {
                double c = near[i][0] * near[j][0] + near[i][1] * near[j][1] + near[i][2] * near[j][2];
                if (c < std::cos(20.0 * M_PI / 180.0)) row.corner = true;
            }
        const double nn = norm(nsum);
        if (nn > 0)
            for (int a = 0; a < 3; ++a) row.normal[a] = nsum[a] / nn;
        auto g = gradient_direct_at(set, spec, pr.approach, q);
        for (std::size_t i = 0; i < pr.approach.size(); ++i) {
            row.distances.push_back(dist(pr.approach[i], pr.x0));
            const double gm = norm(g[i]);
            double ang = 180.0;
            if (gm > 0 && nn > 0) {
                double c = (g[i][0] * row.normal[0] + g[i][1] * row.normal[1] + g[i][2] * row.normal[2]) / gm;
                ang = std::acos(std::clamp(c, -1.0, 1.0)) * 180.0 / M_PI;
            }
            row.angles_deg.push_back(ang);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace {

// f(r) = r^{d-2} rbar(r)
double f_profile(const KernelSpec& spec, double r) { return std::pow(r, spec.dim() - 2) * spec.profile(r); }

double f_derivative(const KernelSpec& spec, double r) {
    const double H = spec.horizon();
    const double d = 1e-4 * std::min(r, std::isfinite(H) ? std::max(H - r, r * 1e-3) : r);
    return (8 * (f_profile(spec, r + d) - f_profile(spec, r - d)) - (f_profile(spec, r + 2 * d) - f_profile(spec, r - 2 * d))) /
           (12 * d);
}

}  // namespace

double divergence_identity(const GridSet& set, const KernelSpec& spec, const Point3& x) {
    require(spec.finite_horizon(), ErrorKind::Unsupported, "divergence_identity: finite horizon required");
    const Lattice& L = set.lat;
    const double R = spec.horizon();
    Index3 lo{0, 0, 0}, hi{0, 0, 0};
    for (int a = 0; a < L.dim; ++a) {
        const double t = (x[a] - L.origin[a]) / L.h;
        lo[a] = static_cast<int>(std::floor(t - R / L.h - 1));
        hi[a] = static_cast<int>(std::ceil(t + R / L.h + 1));
    }
    double s = 0;
    for (int k = lo[2]; k <= hi[2]; ++k)
        for (int j = lo[1]; j <= hi[1]; ++j)
            for (int i = lo[0]; i <= hi[0]; ++i) {
                Index3 c{i, j, k};
                if (member_at(set, c)) continue;
                const double r = dist(L.center(c), x);
                if (r <= 0 || r >= R) continue;
                s += f_derivative(spec, r) / std::pow(r, L.dim - 1);
            }
    return s * L.cell_volume();
}

DivergenceSign interior_divergence_sign(const GridSet& set, const KernelSpec& spec, int spot_checks, unsigned seed) {
    require(spec.finite_horizon(), ErrorKind::Unsupported, "interior_divergence_sign: finite horizon required");
    require(strictly_decreasing_f(spec), ErrorKind::Precondition,
            "interior_divergence_sign: r^{d-2} rbar(r) must be strictly decreasing");
    const Lattice& L = set.lat;
    const double h = L.h, eps = spec.horizon();
    std::vector<std::uint8_t> out(L.size());
    for (std::size_t i = 0; i < L.size(); ++i) out[i] = !set.contains(i);
    auto dt = squared_distance_transform(L, out, !set.complement);

    DivergenceSign res;
    res.divergence = GridField(L, 1);
    res.checked.assign(L.size(), 0);
    std::vector<std::uint8_t> need(L.size(), 0);
    for (std::size_t i = 0; i < L.size(); ++i) {
        if (!set.contains(i)) continue;
        const double d = std::sqrt(dt[i]) * h;
        if (d <= 2.5 * h || d >= eps) continue;
        res.checked[i] = 1;
        ++res.checked_count;
        const Index3 c = L.unravel(i);
        for (int a = 0; a < L.dim; ++a)
            for (int s : {-1, 1}) {
                Index3 y = c;
                y[a] += s;
                need[L.linear(y)] = 1;
            }
    }
    GridField g = nonlocal_gradient_boundary(set, spec, &need);
    std::vector<std::size_t> cells;
    for (std::size_t i = 0; i < L.size(); ++i) {
        if (!res.checked[i]) continue;
        const Index3 c = L.unravel(i);
        double dv = 0;
        for (int a = 0; a < L.dim; ++a) {
            Index3 p = c, m = c;
            p[a] += 1;
            m[a] -= 1;
            dv += (g.at(L.linear(p), a) - g.at(L.linear(m), a)) / (2 * h);
        }
        res.divergence.data[i] = dv;
        if (dv >= 0) ++res.violations;
        cells.push_back(i);
    }
    std::mt19937 rng(seed);
    std::shuffle(cells.begin(), cells.end(), rng);
    for (int s = 0; s < spot_checks && s < static_cast<int>(cells.size()); ++s) {
        DivergenceSpot spot;
        spot.x = L.center(cells[s]);
        spot.finite_difference = res.divergence.data[cells[s]];
        spot.identity = divergence_identity(set, spec, spot.x);
        spot.relative = std::abs(spot.finite_difference - spot.identity) / std::max(std::abs(spot.identity), 1e-300);
        res.spots.push_back(spot);
    }
    return res;
}

// ---------------------------------------------------------------------------

GridField fractional_reconstruct(const BoundaryMeasure& bm, double alpha, const Lattice& lat, double scale) {
    require(alpha > 0 && alpha < 1, ErrorKind::Domain, "fractional_reconstruct: alpha must lie in (0,1)");
    const int d = lat.dim;
    const double c = frac_constant(d, -alpha);
    FacetGrid grid(bm, kInf);
    GridField u(lat, 1);
    parallel_chunks(lat.size(), 64, [&](std::size_t, std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            const Point3 x = lat.center(i);
            Point3 acc{0, 0, 0};
            // facet_sum multiplies by nu, so fold the direction into the weight per component
            for (int a = 0; a < d; ++a) {
                Point3 part = facet_sum(grid, bm, x, kInf, [&](double r, const Point3& z) {
                    return z[a] / std::pow(r, d + 1 - alpha);
                });
                acc[a] = part[a];
            }
            u.data[i] = c * scale * (acc[0] + acc[1] + acc[2]);
        }
    });
    return u;
}

GridField fractional_reconstruct(const GridField& field, double alpha, const Lattice& lat) {
    require(alpha > 0 && alpha < 1, ErrorKind::Domain, "fractional_reconstruct: alpha must lie in (0,1)");
    const Lattice& F = field.lat;
    require(field.components == F.dim && F.dim == lat.dim, ErrorKind::Precondition,
            "fractional_reconstruct: vector field of the lattice dimension expected");
    const int d = lat.dim;
    const double c = frac_constant(d, -alpha) * F.cell_volume();
    GridField u(lat, 1);
    parallel_chunks(lat.size(), 16, [&](std::size_t, std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            const Point3 x = lat.center(i);
            double s = 0;
            for (std::size_t j = 0; j < F.size(); ++j) {
                const Point3 y = F.center(j);
                double r2 = 0, dot = 0;
                for (int a = 0; a < d; ++a) {
                    const double z = x[a] - y[a];
                    r2 += z * z;
                    dot += z * field.at(j, a);
                }
                if (r2 < 1e-24 || dot == 0) continue;
                s += dot / std::pow(r2, 0.5 * (d + 1 - alpha));
            }
            u.data[i] = c * s;
        }
    });
    return u;
}

double extreme_point_coefficient(double alpha) { return frac_constant(1, -alpha) / 2; }

Lattice extreme_point_lattice(double a, double b, double h) {
    require(a < b, ErrorKind::Domain, "extreme_point_lattice: a must be less than b");
    require(h > 0, ErrorKind::Domain, "extreme_point_lattice: h must be positive");
    Lattice L;
    L.dim = 1;
    L.h = h;
    L.origin = {a - (b - a), 0, 0};
    L.n = {static_cast<int>(std::llround(3 * (b - a) / h)), 1, 1};
    return L;
}

ExtremePoint1D extreme_point_1d(double a, double b, double alpha, int sign, const Lattice& lat, SampleMode mode,
                                double coefficient) {
    require(a < b, ErrorKind::Domain, "extreme_point_1d: a must be less than b");
    require(alpha > 0 && alpha < 1, ErrorKind::Domain, "extreme_point_1d: alpha must lie in (0,1)");
    require(sign == 1 || sign == -1, ErrorKind::Domain, "extreme_point_1d: sign must be +1 or -1");
    require(lat.dim == 1, ErrorKind::Precondition, "extreme_point_1d: one-dimensional lattice expected");
    const double C = sign * (coefficient > 0 ? coefficient : extreme_point_coefficient(alpha));
    ExtremePoint1D r;
    r.u = GridField(lat, 1);
    r.masked.assign(lat.size(), 0);
    const double h = lat.h;
    // antiderivative of (x-c)/|x-c|^{2-alpha}
    auto F = [&](double x, double c) { return std::pow(std::abs(x - c), alpha) / alpha; };
    auto g = [&](double x, double c) {
        const double z = x - c;
        return z / std::pow(std::abs(z), 2 - alpha);
    };
    for (std::size_t i = 0; i < lat.size(); ++i) {
        const double x0 = lat.origin[0] + i * h, x1 = x0 + h, xc = x0 + 0.5 * h;
        if (mode == SampleMode::CellAverage) {
            r.u.data[i] = C * ((F(x1, a) - F(x0, a)) - (F(x1, b) - F(x0, b))) / h;
        } else if ((a >= x0 && a <= x1) || (b >= x0 && b <= x1)) {
            r.masked[i] = 1;
        } else {
            r.u.data[i] = C * (g(xc, a) - g(xc, b));
        }
    }
    return r;
}

}  // namespace nlp
