#include "nlperim/decompose.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "nlperim/errors.hpp"

namespace nlp {

namespace {

constexpr std::size_t kMaxDistanceComponents = 256;

struct UnionFind {
    std::vector<int> parent, rank;
    explicit UnionFind(std::size_t n) : parent(n), rank(n, 0) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(int a, int b) {
        a = find(a), b = find(b);
        if (a == b) return;
        if (rank[a] < rank[b]) std::swap(a, b);
        parent[b] = a;
        if (rank[a] == rank[b]) ++rank[a];
    }
};

double window_clearance(const Lattice& L, const Index3& c) {
    double m = std::numeric_limits<double>::infinity();
    for (int a = 0; a < L.dim; ++a) m = std::min({m, (c[a] + 0.5) * L.h, (L.n[a] - c[a] - 0.5) * L.h});
    return m;
}

}  // namespace

GridSet Decomposition::component_set(const Lattice& lat, std::size_t i) const {
    GridSet s(lat);
    for (std::size_t c = 0; c < labels.size(); ++c)
        if (labels[c] == static_cast<int>(i)) s.occ[c] = 1;
    return s;
}

Decomposition epsilon_components(const GridSet& set, double eps, bool with_distances) {
    require(eps > 0, ErrorKind::Domain, "epsilon_components: eps must be positive");
    const Lattice& L = set.lat;
    Decomposition dec;
    dec.eps = eps;
    dec.labels.assign(L.size(), -1);

    std::vector<std::size_t> pts;
    for (std::size_t i = 0; i < L.size(); ++i)
        if (set.contains(i)) pts.push_back(i);
    const std::size_t np = pts.size();
    UnionFind uf(np);
    const double lim = (eps / L.h) * (eps / L.h);  // squared, in cell units

    if (eps > L.h) {
        // bucket grid of side eps
        const double side = eps / L.h;
        Index3 nb{1, 1, 1};
        for (int a = 0; a < L.dim; ++a) nb[a] = static_cast<int>(std::floor((L.n[a] - 1) / side)) + 1;
        const std::size_t nbuckets = std::size_t(nb[0]) * nb[1] * nb[2];
        auto bucket_of = [&](const Index3& c) {
            Index3 b{0, 0, 0};
            for (int a = 0; a < L.dim; ++a) b[a] = std::min(nb[a] - 1, static_cast<int>(std::floor(c[a] / side)));
            return b;
        };
        auto blin = [&](const Index3& b) { return (std::size_t(b[2]) * nb[1] + b[1]) * nb[0] + b[0]; };
        std::vector<std::size_t> start(nbuckets + 1, 0);
        std::vector<Index3> coords(np);
        std::vector<std::size_t> bidx(np);
        for (std::size_t p = 0; p < np; ++p) {
            coords[p] = L.unravel(pts[p]);
            bidx[p] = blin(bucket_of(coords[p]));
            ++start[bidx[p] + 1];
        }
        for (std::size_t b = 0; b < nbuckets; ++b) start[b + 1] += start[b];
        std::vector<int> members(np);
        std::vector<std::size_t> fill(start.begin(), start.end() - 1);
        for (std::size_t p = 0; p < np; ++p) members[fill[bidx[p]]++] = static_cast<int>(p);
        const int r1 = L.dim > 1 ? 1 : 0, r2 = L.dim > 2 ? 1 : 0;
        for (std::size_t p = 0; p < np; ++p) {
            Index3 b = bucket_of(coords[p]);
            for (int dz = -r2; dz <= r2; ++dz)
                for (int dy = -r1; dy <= r1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        Index3 q{b[0] + dx, b[1] + dy, b[2] + dz};
                        bool ok = true;
                        for (int a = 0; a < 3; ++a)
                            if (q[a] < 0 || q[a] >= nb[a]) ok = false;
                        if (!ok) continue;
                        const std::size_t bl = blin(q);
                        for (std::size_t m = start[bl]; m < start[bl + 1]; ++m) {
                            const int o = members[m];
                            if (static_cast<std::size_t>(o) <= p) continue;
                            double d2 = 0;
                            for (int a = 0; a < L.dim; ++a) {
                                double t = coords[p][a] - coords[o][a];
                                d2 += t * t;
                            }
                            if (d2 < lim * (1 - 1e-12)) uf.unite(static_cast<int>(p), o);
                        }
                    }
        }
    }

    // labels in order of smallest member index
    std::vector<int> root_label(np, -1);
    for (std::size_t p = 0; p < np; ++p) {
        int r = uf.find(static_cast<int>(p));
        if (root_label[r] < 0) {
            root_label[r] = static_cast<int>(dec.components.size());
            Component c;
            c.representative = pts[p];
            Index3 cc = L.unravel(pts[p]);
            c.lo = c.hi = cc;
            dec.components.push_back(c);
        }
        const int id = root_label[r];
        dec.labels[pts[p]] = id;
        Component& c = dec.components[id];
        ++c.cells;
        Index3 cc = L.unravel(pts[p]);
        for (int a = 0; a < 3; ++a) c.lo[a] = std::min(c.lo[a], cc[a]), c.hi[a] = std::max(c.hi[a], cc[a]);
        if (set.complement) {
            if (window_clearance(L, cc) < eps) c.touches_window = true;
        } else {
            for (int a = 0; a < L.dim; ++a)
                if (cc[a] == 0 || cc[a] == L.n[a] - 1) c.touches_window = true;
        }
    }
    for (auto& c : dec.components) c.measure = c.cells * L.cell_volume();

    const std::size_t nc = dec.components.size();
    if (with_distances && nc > 1 && nc <= kMaxDistanceComponents) {
        dec.distances.assign(nc * nc, 0.0);
        std::vector<std::uint8_t> seeds(L.size());
        for (std::size_t i = 0; i < nc; ++i) {
            for (std::size_t c = 0; c < L.size(); ++c) seeds[c] = dec.labels[c] == static_cast<int>(i);
            auto dt = squared_distance_transform(L, seeds);
            std::vector<double> best(nc, std::numeric_limits<double>::infinity());
            for (std::size_t c = 0; c < L.size(); ++c)
                if (dec.labels[c] >= 0) best[dec.labels[c]] = std::min(best[dec.labels[c]], dt[c]);
            for (std::size_t j = 0; j < nc; ++j) dec.distances[i * nc + j] = std::sqrt(best[j]) * L.h;
        }
        for (std::size_t i = 0; i < nc; ++i)
            for (std::size_t j = 0; j < nc; ++j)
                if (i != j && dec.distances[i * nc + j] < eps * (1 - 1e-9))
                    fail(ErrorKind::Internal, "epsilon_components: components closer than eps");
    }
    return dec;
}

DecomposableVerdict is_epsilon_decomposable(const GridSet& set, double eps) {
    DecomposableVerdict v;
    Decomposition dec = epsilon_components(set, eps, false);
    if (dec.size() < 2) return v;
    v.decomposable = true;
    GridSet first(set.lat), rest(set.lat);
    for (std::size_t c = 0; c < set.lat.size(); ++c) {
        if (dec.labels[c] == 0) first.occ[c] = 1;
        else if (dec.labels[c] > 0) rest.occ[c] = 1;
    }
    if (set.complement) {
        // the unbounded remainder keeps the complement representation
        rest.complement = true;
        for (std::size_t c = 0; c < set.lat.size(); ++c) rest.occ[c] = !(dec.labels[c] > 0);
    }
    v.witness_distance = essential_distance(first, rest);
    v.witness = std::make_pair(std::move(first), std::move(rest));
    return v;
}

AdditivityResult additivity_residual(const GridSet& set, double eps, const KernelSpec& spec, const QuadratureConfig& q) {
    require(spec.horizon() <= eps * (1 + 1e-12), ErrorKind::Precondition,
            "additivity_residual: kernel horizon exceeds eps");
    require(!set.complement, ErrorKind::Precondition, "additivity_residual: set must have finite measure");
    AdditivityResult r;
    r.perimeter = gagliardo_perimeter(set, spec, q).value;
    Decomposition dec = epsilon_components(set, eps, false);
    for (std::size_t i = 0; i < dec.size(); ++i) {
        double p = gagliardo_perimeter(dec.component_set(set.lat, i), spec, q).value;
        r.component_perimeters.push_back(p);
        r.component_sum += p;
    }
    r.residual = std::abs(r.perimeter - r.component_sum);
    r.relative = r.perimeter > 0 ? r.residual / r.perimeter : r.residual;
    return r;
}

const char* simplicity_name(Simplicity s) {
    switch (s) {
        case Simplicity::Simple: return "simple";
        case Simplicity::NotIndecomposable: return "not_indecomposable";
        case Simplicity::ComplementHasFiniteComponent: return "complement_has_finite_component";
        case Simplicity::Indeterminate: return "indeterminate";
    }
    return "unknown";
}

Simplicity is_epsilon_simple(const GridSet& set, double eps) {
    require(!set.complement, ErrorKind::Precondition, "is_epsilon_simple: set must have finite measure");
    const Lattice& L = set.lat;
    double margin = std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t i = 0; i < L.size(); ++i)
        if (set.occ[i]) {
            any = true;
            margin = std::min(margin, window_clearance(L, L.unravel(i)));
        }
    require(any, ErrorKind::Precondition, "is_epsilon_simple: set is empty");
    require(margin > L.h, ErrorKind::Precondition, "is_epsilon_simple: set touches the window boundary");
    if (margin < 2 * eps) return Simplicity::Indeterminate;
    if (epsilon_components(set, eps, false).size() > 1) return Simplicity::NotIndecomposable;
    Decomposition comp = epsilon_components(complement(set), eps, false);
    for (const auto& c : comp.components)
        if (!c.touches_window) return Simplicity::ComplementHasFiniteComponent;
    return Simplicity::Simple;
}

namespace {

GridField indicator_field(const GridSet& s, double value) {
    GridField f(s.lat, 1);
    for (std::size_t i = 0; i < s.occ.size(); ++i)
        if (s.contains(i)) f.data[i] = value;
    return f;
}

}  // namespace

ExtremalityVerdict extremality_witness(const GridSet& set, double eps, const KernelSpec& spec, const QuadratureConfig& q) {
    require(!set.complement, ErrorKind::Precondition, "extremality_witness: set must have finite measure");
    require(set.count() > 0, ErrorKind::Precondition, "extremality_witness: set is empty");
    ExtremalityVerdict v;
    const double P = gagliardo_perimeter(set, spec, q).value;
    if (!(P > 0)) fail(ErrorKind::Internal, "extremality_witness: perimeter of a nontrivial set vanished");
    v.u = indicator_field(set, 1.0 / P);
    if (std::isinf(eps)) {
        v.reason = "fractional";
        return v;
    }
    require(spec.horizon() <= eps * (1 + 1e-12), ErrorKind::Precondition,
            "extremality_witness: kernel horizon exceeds eps");
    const Lattice& L = set.lat;
    Decomposition dec = epsilon_components(set, eps, false);
    if (dec.size() >= 2) {
        GridSet e1 = dec.component_set(L, 0), e2(L);
        for (std::size_t c = 0; c < L.size(); ++c) e2.occ[c] = dec.labels[c] > 0;
        const double p1 = gagliardo_perimeter(e1, spec, q).value;
        const double p2 = gagliardo_perimeter(e2, spec, q).value;
        v.extreme = false;
        v.reason = "decomposable";
        v.lambda = p1 / P;
        v.u1 = indicator_field(e1, 1.0 / p1);
        v.u2 = indicator_field(e2, 1.0 / p2);
    } else {
        Simplicity s = is_epsilon_simple(set, eps);
        require(s != Simplicity::Indeterminate, ErrorKind::Precondition,
                "extremality_witness: window margin below 2 eps");
        if (s == Simplicity::Simple) {
            v.reason = "simple";
            return v;
        }
        Decomposition comp = epsilon_components(complement(set), eps, false);
        std::size_t hole = comp.size();
        for (std::size_t i = 0; i < comp.size(); ++i)
            if (!comp.components[i].touches_window) {
                hole = i;
                break;
            }
        GridSet f1 = comp.component_set(L, hole);
        GridSet not_f2(L);  // E union F1, the complement of F2
        for (std::size_t c = 0; c < L.size(); ++c) not_f2.occ[c] = set.occ[c] || f1.occ[c];
        const double p1 = gagliardo_perimeter(f1, spec, q).value;
        const double p2 = gagliardo_perimeter(not_f2, spec, q).value;
        v.extreme = false;
        v.reason = "complement_component";
        v.lambda = p1 / P;
        v.u1 = indicator_field(f1, -1.0 / p1);
        v.u2 = indicator_field(not_f2, 1.0 / p2);
    }
    v.seminorm_u1 = gagliardo_seminorm(v.u1, spec, q).value;
    v.seminorm_u2 = gagliardo_seminorm(v.u2, spec, q).value;
    double worst = 0, scale = 0;
    for (std::size_t c = 0; c < L.size(); ++c) {
        double mix = v.lambda * v.u1.data[c] + (1 - v.lambda) * v.u2.data[c];
        worst = std::max(worst, std::abs(mix - v.u.data[c]));
        scale = std::max(scale, std::abs(v.u.data[c]));
    }
    v.identity_residual = worst;
    if (worst > 1e-9 * scale)
        fail(ErrorKind::Internal, "extremality_witness: convex combination identity failed");
    return v;
}

}  // namespace nlp
