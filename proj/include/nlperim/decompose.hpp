#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "nlperim/gagliardo.hpp"
#include "nlperim/gridset.hpp"
#include "nlperim/kernels.hpp"

namespace nlp {

struct Component {
    std::size_t representative = 0;  // smallest linear cell index
    std::size_t cells = 0;
    double measure = 0;
    Index3 lo{0, 0, 0}, hi{0, 0, 0};  // inclusive cell bounding box
    bool touches_window = false;      // for complement-flagged sets: within eps of the window exterior
};

struct Decomposition {
    double eps = 0;
    std::vector<int> labels;  // per lattice cell, -1 outside the set
    std::vector<Component> components;
    std::vector<double> distances;  // row-major pairwise minimum center distances

    std::size_t size() const { return components.size(); }
    double distance(std::size_t i, std::size_t j) const { return distances[i * components.size() + j]; }
    GridSet component_set(const Lattice& lat, std::size_t i) const;
};

/// Components of the graph joining member cell centers at distance < eps.
Decomposition epsilon_components(const GridSet& set, double eps, bool with_distances = true);

struct DecomposableVerdict {
    bool decomposable = false;
    std::optional<std::pair<GridSet, GridSet>> witness;
    double witness_distance = 0;
};

DecomposableVerdict is_epsilon_decomposable(const GridSet& set, double eps);

struct AdditivityResult {
    double perimeter = 0;
    double component_sum = 0;
    double residual = 0;
    double relative = 0;
    std::vector<double> component_perimeters;
};

AdditivityResult additivity_residual(const GridSet& set, double eps, const KernelSpec& spec,
                                     const QuadratureConfig& q = {});

enum class Simplicity { Simple, NotIndecomposable, ComplementHasFiniteComponent, Indeterminate };
const char* simplicity_name(Simplicity s);

/// The set's lattice is the window; the margin between the set and the window
/// boundary must be at least 2 eps for a definite answer.
Simplicity is_epsilon_simple(const GridSet& set, double eps);

struct ExtremalityVerdict {
    bool extreme = true;
    std::string reason;  // "simple", "decomposable", "complement_component", "fractional"
    GridField u, u1, u2;
    double lambda = 0;
    double seminorm_u1 = 0, seminorm_u2 = 0;
    double identity_residual = 0;
};

/// eps = +infinity selects the fractional criterion.
ExtremalityVerdict extremality_witness(const GridSet& set, double eps, const KernelSpec& spec,
                                       const QuadratureConfig& q = {});

}  // namespace nlp
