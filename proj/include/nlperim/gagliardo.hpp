#pragma once

#include <cstddef>
#include <vector>

#include "nlperim/gridset.hpp"
#include "nlperim/kernels.hpp"

namespace nlp {

struct QuadratureConfig {
    double truncation = 0.0;  // pair-truncation radius; <= 0 means the kernel horizon
    int refinement = 4;       // sub-samples per axis for cell pairs closer than 2h
    std::size_t chunk = 64;   // offsets per parallel work item
};

struct PerimeterResult {
    double value = 0;
    double error = 0;    // quadrature error estimate (near-field refinement + far-field midpoint bound)
    double tail = 0;     // analytic bound for pairs beyond an explicit truncation radius
    double pairs = 0;    // number of cell pairs represented
    double seconds = 0;
};

/// 2 * sum_{x in E} sum_{y notin E, |x-y| <= R} rho(x-y)/|x-y| h^{2d}.
PerimeterResult gagliardo_perimeter(const GridSet& set, const KernelSpec& spec, const QuadratureConfig& q = {});

/// sum_{x,y} |u(x)-u(y)| rho(x-y)/|x-y| h^{2d}.
PerimeterResult gagliardo_seminorm(const GridField& u, const KernelSpec& spec, const QuadratureConfig& q = {});

struct CoareaResult {
    double seminorm = 0;
    double level_sum = 0;
    double residual = 0;
    std::vector<double> thresholds;
};

/// Compares the seminorm with the layer-cake sum over the distinct values of u.
CoareaResult coarea_residual(const GridField& u, const KernelSpec& spec, const QuadratureConfig& q = {});

struct CrossTerm {
    double value = 0;  // 4 sum_{E1 x E2} rho/|x-y| h^{2d}
    double error = 0;
    double pairs = 0;
};

CrossTerm cross_term(const GridSet& a, const GridSet& b, const KernelSpec& spec, const QuadratureConfig& q = {});

struct IsoperimetricGap {
    double perimeter = 0;
    double ball_perimeter = 0;
    double gap = 0;
    double error = 0;
    double radius = 0;
    bool ball_like = false;
};

IsoperimetricGap isoperimetric_gap(const GridSet& set, const KernelSpec& spec, const QuadratureConfig& q = {});

/// Continuum P(B_r) from the covariogram of the ball.
double ball_perimeter_continuum(const KernelSpec& spec, double radius);

/// Lattice of spacing h around a ball of the given radius, with room for the kernel horizon.
GridSet rasterized_ball(int dim, double h, double radius, double margin);

}  // namespace nlp
