#pragma once

#include <array>
#include <functional>
#include <vector>

#include "nlperim/kernels.hpp"

namespace nlp::detail {

struct Offset {
    std::array<int, 3> k{0, 0, 0};
    double w = 0;    // h^{2d} * cell-pair average of rho(z)/|z|
    double err = 0;  // quadrature error estimate for w
};

/// True for the representative half of offset pairs {k, -k}.
inline bool positive_half(const std::array<int, 3>& k) {
    if (k[2] != 0) return k[2] > 0;
    if (k[1] != 0) return k[1] > 0;
    return k[0] > 0;
}

/// Cell-pair weight for offset k, averaged over s^d x s^d sub-samples.
double near_pair_weight(const KernelSpec& spec, int dim, double h, const std::array<int, 3>& k, int s);

/// Accurate cell-pair weight h^{2d} E[rho(z)/|z|], z = h(k + U - V), U, V uniform in the unit cell.
double cell_pair_weight(const KernelSpec& spec, int dim, double h, const std::array<int, 3>& k, double* err = nullptr);

/// Visits every half-space offset with |k| <= radius_cells (and |k| h <= R),
/// in a fixed order, with its weight and error estimate.
void enumerate_half_stencil(const KernelSpec& spec, int dim, double h, double radius_cells, int refinement,
                            const std::function<void(const Offset&)>& visit);

/// Full (both halves) stencil stored explicitly.
std::vector<Offset> full_stencil(const KernelSpec& spec, int dim, double h, double radius, int refinement);

/// Vector weight h^d * rho(z) z / |z|^2 averaged over s^d sub-samples of the
/// target cell (for the nonlocal gradient).
std::array<double, 3> vector_weight(const KernelSpec& spec, int dim, double h, const std::array<double, 3>& z,
                                    bool refine, int s);

}  // namespace nlp::detail
