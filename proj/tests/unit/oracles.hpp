#pragma once

// Independent reference computations used by the unit tests. None of these
// call into the library's numerical code.

#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <random>
#include <vector>

#include "nlperim/gridset.hpp"

namespace oracle {

inline constexpr double kPi = 3.14159265358979323846;

// Gauss-Legendre nodes and weights on [0, 1].
inline void gauss01(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0);
    w.assign(n, 0);
    for (int i = 0; i < n; ++i) {
        double z = std::cos(kPi * (i + 0.75) / (n + 0.5)), dp = 0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1, p1 = z;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (z * p1 - p0) / (z * z - 1);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        x[i] = 0.5 * (1 - z);
        w[i] = 1.0 / ((1 - z * z) * dp * dp);
    }
}

// Composite Gauss-Legendre integral of f over [a, b].
inline double integrate(const std::function<double(double)>& f, double a, double b, int panels = 200, int n = 8) {
    std::vector<double> x, w;
    gauss01(n, x, w);
    double s = 0;
    const double L = (b - a) / panels;
    for (int p = 0; p < panels; ++p)
        for (int i = 0; i < n; ++i) s += w[i] * f(a + (p + x[i]) * L);
    return s * L;
}

// Random mask of overlapping disks on an n x n lattice with spacing h.
inline nlp::GridSet random_disks(int n, double h, int disks, std::uint64_t seed) {
    nlp::Lattice L;
    L.dim = 2;
    L.h = h;
    L.n = {n, n, 1};
    nlp::GridSet s(L);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int d = 0; d < disks; ++d) {
        const double cx = U(rng) * n, cy = U(rng) * n, r = 1 + U(rng) * n / 6.0;
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i)
                if (std::hypot(i + 0.5 - cx, j + 0.5 - cy) < r) s.occ[L.linear(i, j, 0)] = 1;
    }
    return s;
}

// Components of the graph joining member cell centers closer than eps, by BFS
// over all member pairs; labels in order of the smallest member index.
inline std::vector<int> bfs_labels(const nlp::GridSet& s, double eps, int* count = nullptr) {
    const auto& L = s.lat;
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < L.size(); ++i)
        if (s.contains(i)) members.push_back(i);
    std::vector<int> lab(L.size(), -1);
    int next = 0;
    for (std::size_t m : members) {
        if (lab[m] >= 0) continue;
        std::deque<std::size_t> q{m};
        lab[m] = next;
        while (!q.empty()) {
            const auto x = L.center(q.front());
            q.pop_front();
            for (std::size_t o : members) {
                if (lab[o] >= 0) continue;
                const auto y = L.center(o);
                double d2 = 0;
                for (int a = 0; a < L.dim; ++a) d2 += (x[a] - y[a]) * (x[a] - y[a]);
                if (std::sqrt(d2) < eps) {
                    lab[o] = next;
                    q.push_back(o);
                }
            }
        }
        ++next;
    }
    if (count) *count = next;
    return lab;
}

// Pair sum 2 sum_{x in E, y notin E} w(x - y) for a finite 2D set whose window
// extends at least the kernel reach past the set; w is given per integer offset.
inline double pair_sum_2d(const nlp::GridSet& s, int reach, const std::function<double(int, int)>& w) {
    const auto& L = s.lat;
    double total = 0;
    for (int j = 0; j < L.n[1]; ++j)
        for (int i = 0; i < L.n[0]; ++i) {
            if (!s.occ[L.linear(i, j, 0)]) continue;
            for (int dj = -reach; dj <= reach; ++dj)
                for (int di = -reach; di <= reach; ++di) {
                    const int a = i + di, b = j + dj;
                    const bool in = a >= 0 && b >= 0 && a < L.n[0] && b < L.n[1] && s.occ[L.linear(a, b, 0)];
                    if (!in) total += w(di, dj);
                }
        }
    return 2 * total;
}

}  // namespace oracle
