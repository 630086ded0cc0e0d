#include <algorithm>
#include <cmath>

#include "nlperim/errors.hpp"
#include "nlperim/gridset.hpp"

namespace nlp {

double BoundaryMeasure::total() const {
    double t = 0;
    for (const auto& f : facets) t += f.weight;
    return t;
}

namespace {

constexpr double kIso = 0.5;

// Membership of the represented set on a lattice padded by `pad` cells,
// smoothed by a separable [1,2,1]/4 filter.
struct Smoothed {
    Lattice lat;  // padded lattice
    std::vector<double> f;
};

Smoothed smooth_membership(const GridSet& s, int pad) {
    Smoothed out;
    out.lat = s.lat;
    for (int a = 0; a < s.lat.dim; ++a) {
        out.lat.n[a] = s.lat.n[a] + 2 * pad;
        out.lat.origin[a] = s.lat.origin[a] - pad * s.lat.h;
    }
    const Lattice& L = out.lat;
    out.f.assign(L.size(), s.complement ? 1.0 : 0.0);
    for (std::size_t i = 0; i < s.occ.size(); ++i) {
        Index3 c = s.lat.unravel(i);
        for (int a = 0; a < s.lat.dim; ++a) c[a] += pad;
        out.f[L.linear(c)] = s.contains(i) ? 1.0 : 0.0;
    }
    std::vector<double> tmp(L.size());
    for (int axis = 0; axis < L.dim; ++axis) {
        const std::size_t stride = axis == 0 ? 1 : (axis == 1 ? L.n[0] : std::size_t(L.n[0]) * L.n[1]);
        for (std::size_t i = 0; i < L.size(); ++i) {
            Index3 c = L.unravel(i);
            double lo = c[axis] > 0 ? out.f[i - stride] : out.f[i];
            double hi = c[axis] + 1 < L.n[axis] ? out.f[i + stride] : out.f[i];
            tmp[i] = 0.25 * lo + 0.5 * out.f[i] + 0.25 * hi;
        }
        out.f.swap(tmp);
    }
    return out;
}

Point3 lerp_point(const Point3& p, const Point3& q, double fp, double fq) {
    double t = (kIso - fp) / (fq - fp);
    return {p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1]), p[2] + t * (q[2] - p[2])};
}

void boundary_1d(const GridSet& s, BoundaryMeasure& bm) {
    const Lattice& L = s.lat;
    auto member = [&](int i) { return (i < 0 || i >= L.n[0]) ? s.complement : s.contains(std::size_t(i)); };
    for (int i = -1; i < L.n[0]; ++i) {
        bool a = member(i), b = member(i + 1);
        if (a == b) continue;
        Facet f;
        f.center = {L.origin[0] + (i + 1) * L.h, 0, 0};
        f.normal = {b ? 1.0 : -1.0, 0, 0};
        f.weight = 1.0;
        f.v[0] = f.center;
        f.nv = 1;
        bm.facets.push_back(f);
    }
}

void boundary_2d(const GridSet& s, BoundaryMeasure& bm) {
    Smoothed sm = smooth_membership(s, 2);
    const Lattice& L = sm.lat;
    auto F = [&](int i, int j) { return sm.f[L.linear(i, j, 0)]; };
    for (int j = 0; j + 1 < L.n[1]; ++j) {
        for (int i = 0; i + 1 < L.n[0]; ++i) {
            const double f00 = F(i, j), f10 = F(i + 1, j), f01 = F(i, j + 1), f11 = F(i + 1, j + 1);
            const bool b00 = f00 > kIso, b10 = f10 > kIso, b01 = f01 > kIso, b11 = f11 > kIso;
            const int nin = b00 + b10 + b01 + b11;
            if (nin == 0 || nin == 4) continue;
            const Point3 p00 = L.center(Index3{i, j, 0}), p10 = L.center(Index3{i + 1, j, 0});
            const Point3 p01 = L.center(Index3{i, j + 1, 0}), p11 = L.center(Index3{i + 1, j + 1, 0});
            // edges: 0 bottom, 1 right, 2 top, 3 left
            Point3 e[4];
            bool has[4] = {b00 != b10, b10 != b11, b01 != b11, b00 != b01};
            if (has[0]) e[0] = lerp_point(p00, p10, f00, f10);
            if (has[1]) e[1] = lerp_point(p10, p11, f10, f11);
            if (has[2]) e[2] = lerp_point(p01, p11, f01, f11);
            if (has[3]) e[3] = lerp_point(p00, p01, f00, f01);
            std::vector<std::pair<int, int>> segs;
            const int nh = has[0] + has[1] + has[2] + has[3];
            if (nh == 2) {
                int a = -1, b = -1;
                for (int k = 0; k < 4; ++k)
                    if (has[k]) (a < 0 ? a : b) = k;
                segs.push_back({a, b});
            } else {
                // saddle: cut off the corners whose class differs from the cell center
                const bool center_in = 0.25 * (f00 + f10 + f01 + f11) > kIso;
                if (b00 != center_in) segs.push_back({0, 3});
                if (b10 != center_in) segs.push_back({0, 1});
                if (b11 != center_in) segs.push_back({1, 2});
                if (b01 != center_in) segs.push_back({2, 3});
            }
            for (auto [a, b] : segs) {
                const Point3& p = e[a];
                const Point3& q = e[b];
                double dx = q[0] - p[0], dy = q[1] - p[1];
                double len = std::hypot(dx, dy);
                if (len <= 0) continue;
                Facet f;
                f.center = {0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1]), 0};
                // bilinear gradient at the segment midpoint, in local coordinates
                double u = (f.center[0] - p00[0]) / L.h, w = (f.center[1] - p00[1]) / L.h;
                double gx = (f10 - f00) * (1 - w) + (f11 - f01) * w;
                double gy = (f01 - f00) * (1 - u) + (f11 - f10) * u;
                double nx = -dy / len, ny = dx / len;
                if (nx * gx + ny * gy < 0) nx = -nx, ny = -ny;
                f.normal = {nx, ny, 0};
                f.weight = len;
                f.v[0] = p;
                f.v[1] = q;
                f.nv = 2;
                bm.facets.push_back(f);
            }
        }
    }
}

void emit_triangle(const Point3& a, const Point3& b, const Point3& c, const Point3& inside, BoundaryMeasure& bm) {
    Point3 u{b[0] - a[0], b[1] - a[1], b[2] - a[2]}, v{c[0] - a[0], c[1] - a[1], c[2] - a[2]};
    Point3 n{u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]};
    double len = std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
    if (len <= 0) return;
    Facet f;
    f.center = {(a[0] + b[0] + c[0]) / 3, (a[1] + b[1] + c[1]) / 3, (a[2] + b[2] + c[2]) / 3};
    for (int k = 0; k < 3; ++k) n[k] /= len;
    double s = 0;
    for (int k = 0; k < 3; ++k) s += n[k] * (inside[k] - f.center[k]);
    if (s < 0)
        for (int k = 0; k < 3; ++k) n[k] = -n[k];
    f.normal = n;
    f.weight = 0.5 * len;
    f.v = {a, b, c};
    f.nv = 3;
    bm.facets.push_back(f);
}

void boundary_3d(const GridSet& s, BoundaryMeasure& bm) {
    Smoothed sm = smooth_membership(s, 2);
    const Lattice& L = sm.lat;
    static const int tets[6][4] = {{0, 1, 3, 7}, {0, 3, 2, 7}, {0, 2, 6, 7}, {0, 6, 4, 7}, {0, 4, 5, 7}, {0, 5, 1, 7}};
    for (int k = 0; k + 1 < L.n[2]; ++k)
        for (int j = 0; j + 1 < L.n[1]; ++j)
            for (int i = 0; i + 1 < L.n[0]; ++i) {
                double fv[8];
                Point3 pv[8];
                int nin = 0;
                for (int c = 0; c < 8; ++c) {
                    Index3 id{i + (c & 1), j + ((c >> 1) & 1), k + ((c >> 2) & 1)};
                    fv[c] = sm.f[L.linear(id)];
                    pv[c] = L.center(id);
                    nin += fv[c] > kIso;
                }
                if (nin == 0 || nin == 8) continue;
                for (const auto& t : tets) {
                    int in[4], out[4], ni = 0, no = 0;
                    for (int q = 0; q < 4; ++q) (fv[t[q]] > kIso ? in[ni++] : out[no++]) = t[q];
                    auto X = [&](int a, int b) { return lerp_point(pv[a], pv[b], fv[a], fv[b]); };
                    if (ni == 1) {
                        emit_triangle(X(in[0], out[0]), X(in[0], out[1]), X(in[0], out[2]), pv[in[0]], bm);
                    } else if (ni == 3) {
                        emit_triangle(X(out[0], in[0]), X(out[0], in[1]), X(out[0], in[2]), pv[in[0]], bm);
                    } else if (ni == 2) {
                        Point3 q0 = X(in[0], out[0]), q1 = X(in[0], out[1]), q2 = X(in[1], out[1]), q3 = X(in[1], out[0]);
                        emit_triangle(q0, q1, q2, pv[in[0]], bm);
                        emit_triangle(q0, q2, q3, pv[in[0]], bm);
                    }
                }
            }
}

}  // namespace

BoundaryMeasure extract_boundary(const GridSet& s) {
    BoundaryMeasure bm;
    bm.dim = s.lat.dim;
    switch (s.lat.dim) {
        case 1: boundary_1d(s, bm); break;
        case 2: boundary_2d(s, bm); break;
        case 3: boundary_3d(s, bm); break;
        default: fail(ErrorKind::Unsupported, "extract_boundary: unsupported dimension");
    }
    return bm;
}

double classical_perimeter(const GridSet& s) { return extract_boundary(s).total(); }

}  // namespace nlp
