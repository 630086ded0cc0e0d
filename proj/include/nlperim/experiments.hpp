#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "nlperim/decompose.hpp"
#include "nlperim/gagliardo.hpp"
#include "nlperim/gridset.hpp"
#include "nlperim/kernels.hpp"

namespace nlp {

struct SweepRow {
    double parameter = 0;
    double value = 0;
    double reference = 0;
    double rel_error = 0;
    double h = 0;
    double error = 0;          // quadrature error estimate of value
    double check = 0;          // row-specific secondary quantity (see each sweep)
    bool reliable = true;
    std::string reference_kind;  // "closed_form", "oracle", ...
};

struct SweepReport {
    std::string name;
    std::string kernel;
    std::string shape;
    unsigned seed = 0;
    std::vector<SweepRow> rows;
    std::vector<std::string> notes;
    bool monotone = false;  // relative error decreasing over the last three rows
    double seconds = 0;
};

/// Relative errors of the last `last` rows strictly decreasing in row order.
bool error_decreasing(const std::vector<SweepRow>& rows, std::size_t last = 3);

enum class LocalizationRoute { Gagliardo, Distributional };

/// Rows (eps, P_eps(E), reference, rel. error) with h = eps / cells_per_eps.
/// The base kernel must have horizon 1; it is rescaled to each eps and
/// normalized to unit mass (Gagliardo) or mass d (distributional).
SweepReport sweep_localization(const ShapeDesc& shape, int dim, const KernelSpec& base,
                               const std::vector<double>& eps_list, LocalizationRoute route,
                               double cells_per_eps = 16.0);

/// Truncated fractional kernels of growing horizon against the infinite-horizon
/// value on the same lattice (or the closed form for an interval); `check`
/// holds the closed form at finite eps when one exists.
SweepReport sweep_infinite_horizon(const ShapeDesc& shape, int dim, double alpha, const std::vector<double>& eps_list,
                                   double h);

/// Rows (mass, P_eps(B_m) / m^{(d-alpha)/d}, 2 c(d, alpha)); `check` holds the radius.
SweepReport isoperimetric_profile(int dim, double alpha, double eps, const std::vector<double>& masses,
                                  int cells_per_diameter = 128);

struct RelaxationRow {
    int n = 0;
    double measure = 0;
    double perimeter = 0;        // P(F_n)
    double increment = 0;        // P(E u F_n) - P(E)
    std::size_t components = 0;  // of E u F_n
    double scaling = 0;          // |F_n| / (n^{-d} sum |B_{r_a}|)
};

struct RelaxationReport {
    double eps = 0;
    double base_perimeter = 0;
    std::size_t base_components = 0;
    std::vector<double> radii;  // r_a by lattice index (row-major over the window)
    std::vector<RelaxationRow> rows;
    int last_resolved = 0;
    bool single_component = false;
    bool decreasing = false;
};

/// Largest r with P(B_r) <= bound (continuum ball perimeter, bisection).
double radius_for_perimeter(const KernelSpec& spec, double bound);

/// F_n = union over a in Z^d of B_{r_a / n}(eps a / 2), restricted to the
/// set's window, with P(B_{r_a}) <= budget / (1 + |a|^{d+1}). The lattice must
/// place the points eps/2 Z^d on cell centers. Radii are capped at eps/8 so the
/// balls stay disjoint. Rows stop at the first n whose
/// smallest ball radius would drop below 1.5 cells.
RelaxationReport relaxation_demo(const GridSet& set, const KernelSpec& spec, double eps, const std::vector<int>& n_list,
                                 double budget = 1.0, const QuadratureConfig& q = {});

/// Budget for which the farthest lattice ball inside the window has radius min_radius.
double relaxation_budget(const KernelSpec& spec, const Lattice& lat, double eps, double min_radius);

/// Lattice over [lo, hi] on which 0 and the points eps/2 Z^d are cell centers.
Lattice relaxation_lattice(int dim, double eps, int cells_per_half_eps, const Point3& lo, const Point3& hi);

// -- annealing --------------------------------------------------------------

enum class AnnealInit { Random, Ball, Square };

struct AnnealConfig {
    unsigned seed = 1;
    int max_epochs = 40;
    int patience = 5;               // epochs without improvement of the epoch mean energy
    double moves_per_cell = 200.0;  // moves per epoch = moves_per_cell * |E| (cells)
    double cooling = 0.95;
    double t0 = 0.0;                // <= 0: t0_scale * median |dE| of 1000 random moves
    double t0_scale = 1.0;
    int quench_epochs = 5;          // zero-temperature epochs after cooling
    std::size_t audit_every = 1000;
    AnnealInit init = AnnealInit::Square;
    std::function<void(int epoch, const GridSet&)> on_epoch;
};

struct AnnealEpoch {
    int epoch = 0;
    double temperature = 0;
    double energy = 0;       // at the end of the epoch
    double mean_energy = 0;  // over the epoch
    double acceptance = 0;
    std::size_t mass_cells = 0;
};

struct AnnealState {
    GridSet set;
    double energy = 0;
    double temperature = 0;
    std::uint64_t iteration = 0;
    unsigned seed = 0;
    std::uint64_t accepted = 0, proposed = 0, audits = 0;
    double max_audit_drift = 0;
};

struct ConstrainedResult {
    AnnealState state;
    std::vector<AnnealEpoch> history;
    double perimeter = 0;
    double perimeter_error = 0;
    double ball_perimeter = 0;  // continuum P(B_m)
    double sym_diff = 0;        // |E sym B| for the best-fit ball
    double sym_diff_rel = 0;
    Point3 centroid{0, 0, 0};
    double radius = 0;
};

/// Mass-constrained minimization of P_eps inside omega by paired flips.
ConstrainedResult minimize_constrained(const GridSet& omega, double mass, const KernelSpec& spec,
                                       const AnnealConfig& cfg = {});

struct PotentialResult {
    AnnealState state;
    std::vector<AnnealEpoch> history;
    Decomposition components;
    std::vector<double> component_masses;
    std::vector<double> removal;  // P(E_i) + int_{E_i} g per component
    double smallest_mass = 0;
};

/// Unconstrained minimization of P_eps(E) + int_E g by single flips.
PotentialResult minimize_potential(const GridField& g, const KernelSpec& spec, const AnnealConfig& cfg = {});

/// Energy of a set under the annealer's stencil (pair sum within the horizon).
double anneal_energy(const GridSet& set, const KernelSpec& spec);

}  // namespace nlp
