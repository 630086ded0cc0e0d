#pragma once

#include <cstdint>
#include <vector>

#include "nlperim/gagliardo.hpp"
#include "nlperim/gridset.hpp"
#include "nlperim/kernels.hpp"

namespace nlp {

// -- nonlocal gradient ------------------------------------------------------

/// D_rho 1_E at arbitrary points by midpoint quadrature over the lattice
/// (sub-cell refinement within 2h). Requires a finite horizon or truncation.
std::vector<Point3> gradient_direct_at(const GridSet& set, const KernelSpec& spec, const std::vector<Point3>& points,
                                       const QuadratureConfig& q = {});

/// D_rho u at every cell center; u vanishes outside its window.
GridField nonlocal_gradient_direct(const GridField& u, const KernelSpec& spec, const QuadratureConfig& q = {});

/// D_rho 1_E at every cell center. Cells farther than the horizon from the
/// other phase are exactly zero and skipped.
GridField nonlocal_gradient_direct(const GridSet& set, const KernelSpec& spec, const QuadratureConfig& q = {});

/// sum_f Q(|x - y_f|) nu_f w_f with facet sub-sampling near x.
std::vector<Point3> gradient_boundary_at(const BoundaryMeasure& bm, const KernelSpec& spec,
                                         const std::vector<Point3>& points);

/// Boundary route on every cell (or on cells with mask != 0).
GridField nonlocal_gradient_boundary(const GridSet& set, const KernelSpec& spec,
                                     const std::vector<std::uint8_t>* mask = nullptr);

/// div_rho p at every cell center; p vanishes outside its window.
GridField nonlocal_divergence(const GridField& p, const KernelSpec& spec, const QuadratureConfig& q = {});

// -- total variation and Caccioppoli perimeter -------------------------------

/// L1 norm of the direct gradient; u must vanish on the window border.
double tv_rho(const GridField& u, const KernelSpec& spec, const QuadratureConfig& q = {});

struct CaccioppoliResult {
    double value = 0;
    double error = 0;  // |centre rule - 2^d sub-point rule|, when requested
    Lattice lattice;   // evaluation lattice (the set's, padded by the horizon)
};

CaccioppoliResult caccioppoli_perimeter(const GridSet& set, const KernelSpec& spec, bool with_error = false);

struct SubadditivityResult {
    double p1 = 0, p2 = 0, p12 = 0;
    double defect = 0;  // sum (|D1| + |D2| - |D1 + D2|) h^d
    double error = 0;
    std::size_t overlap_cells = 0;
};

/// P(E1) + P(E2) - P(E1 u E2) for disjoint sets on the same lattice.
SubadditivityResult caccioppoli_subadditivity(const GridSet& e1, const GridSet& e2, const KernelSpec& spec);

// -- diagnostics ------------------------------------------------------------

struct Probe {
    Point3 x0{0, 0, 0};
    std::vector<Point3> approach;
};

struct AlignmentRow {
    Point3 x0{0, 0, 0};
    Point3 normal{0, 0, 0};
    bool corner = false;
    std::vector<double> distances;
    std::vector<double> angles_deg;
};

/// Probes along the inner normal at the given distances.
Probe normal_probe(const Point3& x0, const Point3& inner_normal, const std::vector<double>& distances);

std::vector<AlignmentRow> normal_alignment_profile(const GridSet& set, const KernelSpec& spec,
                                                   const std::vector<Probe>& probes, const QuadratureConfig& q = {});

struct DivergenceSpot {
    Point3 x{0, 0, 0};
    double finite_difference = 0;
    double identity = 0;
    double relative = 0;
};

struct DivergenceSign {
    GridField divergence;  // zero outside the checked cells
    std::vector<std::uint8_t> checked;
    std::size_t checked_count = 0;
    std::size_t violations = 0;
    std::vector<DivergenceSpot> spots;
};

/// int_{E^c} f'(|y - x|) / |y - x|^{d-1} dy, f(r) = r^{d-2} rbar(r), by midpoint quadrature.
double divergence_identity(const GridSet& set, const KernelSpec& spec, const Point3& x);

DivergenceSign interior_divergence_sign(const GridSet& set, const KernelSpec& spec, int spot_checks = 10,
                                        unsigned seed = 1);

// -- fractional reconstruction and 1D extreme points ------------------------

/// c_{d,-alpha} int (x - y)/|x - y|^{d+1-alpha} . d mu(y) with mu = scale * nu H^{d-1} on the boundary.
GridField fractional_reconstruct(const BoundaryMeasure& bm, double alpha, const Lattice& lat, double scale = 1.0);

/// Same with mu = F dx for a vector field F.
GridField fractional_reconstruct(const GridField& field, double alpha, const Lattice& lat);

/// Coefficient of the 1D extreme point: c_{1,-alpha} / 2.
double extreme_point_coefficient(double alpha);

enum class SampleMode { Sample, CellAverage };

struct ExtremePoint1D {
    GridField u;
    std::vector<std::uint8_t> masked;  // cells containing a or b (sample mode)
};

/// sign * C ((x-a)/|x-a|^{2-alpha} - (x-b)/|x-b|^{2-alpha}) on the lattice.
ExtremePoint1D extreme_point_1d(double a, double b, double alpha, int sign, const Lattice& lat,
                                SampleMode mode = SampleMode::CellAverage, double coefficient = 0.0);

/// Default lattice [a - (b-a), b + (b-a)] with spacing h.
Lattice extreme_point_lattice(double a, double b, double h);

}  // namespace nlp
