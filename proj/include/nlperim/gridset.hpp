#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace nlp {

using Index3 = std::array<int, 3>;
using Point3 = std::array<double, 3>;

/// Uniform lattice; cell (i,j,k) covers origin + [i,i+1)h x ... and is
/// represented by its center. Unused axes have extent 1.
struct Lattice {
    int dim = 2;
    double h = 1.0;
    Point3 origin{0, 0, 0};
    Index3 n{1, 1, 1};

    std::size_t size() const { return static_cast<std::size_t>(n[0]) * n[1] * n[2]; }
    std::size_t linear(int i, int j, int k) const {
        return (static_cast<std::size_t>(k) * n[1] + j) * n[0] + i;
    }
    std::size_t linear(const Index3& c) const { return linear(c[0], c[1], c[2]); }
    Index3 unravel(std::size_t idx) const {
        Index3 c{};
        c[0] = static_cast<int>(idx % n[0]);
        idx /= n[0];
        c[1] = static_cast<int>(idx % n[1]);
        c[2] = static_cast<int>(idx / n[1]);
        return c;
    }
    Point3 center(const Index3& c) const {
        Point3 p{0, 0, 0};
        for (int a = 0; a < dim; ++a) p[a] = origin[a] + (c[a] + 0.5) * h;
        return p;
    }
    Point3 center(std::size_t idx) const { return center(unravel(idx)); }
    bool inside(const Index3& c) const {
        for (int a = 0; a < 3; ++a)
            if (c[a] < 0 || c[a] >= n[a]) return false;
        return true;
    }
    double cell_volume() const;
    bool same_as(const Lattice& o) const;

    /// Lattice aligned to the global grid hZ^d covering [lo, hi] plus pad on every side.
    static Lattice covering(int dim, double h, const Point3& lo, const Point3& hi, double pad = 0.0);
};

/// Occupancy mask on a lattice. With complement set, the represented set is
/// everything outside the occupied cells (including everything outside the window).
struct GridSet {
    Lattice lat;
    std::vector<std::uint8_t> occ;
    bool complement = false;

    GridSet() = default;
    explicit GridSet(const Lattice& l) : lat(l), occ(l.size(), 0) {}

    bool contains(std::size_t idx) const { return (occ[idx] != 0) != complement; }
    std::size_t count() const;  // occupied mask cells
    std::size_t member_count() const;  // cells of the represented set inside the window
};

/// Scalar (components = 1) or vector (components = dim) samples at cell centers.
struct GridField {
    Lattice lat;
    int components = 1;
    std::vector<double> data;

    GridField() = default;
    GridField(const Lattice& l, int comps) : lat(l), components(comps), data(l.size() * comps, 0.0) {}
    double& at(std::size_t idx, int c = 0) { return data[idx * components + c]; }
    double at(std::size_t idx, int c = 0) const { return data[idx * components + c]; }
};

// -- shapes -----------------------------------------------------------------

struct ShapeDesc {
    enum class Kind { Ball, Box, Union, Difference, LatticeBalls };
    Kind kind = Kind::Ball;
    Point3 a{0, 0, 0};  // ball center or box low corner
    Point3 b{0, 0, 0};  // box high corner
    double radius = 0;
    std::vector<ShapeDesc> parts;  // union members, or {minuend, subtrahend}
    double spacing = 0;            // lattice balls: centers spacing * a
    int max_index = 0;             // lattice balls: |a_i| <= max_index
    std::function<double(const Index3&)> radius_rule;

    static ShapeDesc ball(const Point3& c, double r);
    static ShapeDesc box(const Point3& lo, const Point3& hi);
    static ShapeDesc make_union(std::vector<ShapeDesc> parts);
    static ShapeDesc difference(ShapeDesc a, ShapeDesc b);
    static ShapeDesc lattice_balls(double spacing, int max_index, std::function<double(const Index3&)> rule);
};

struct RasterInfo {
    bool truncated = false;
    bool empty = false;
};

/// Center-inclusion rasterization.
GridSet make_shape(const ShapeDesc& desc, const Lattice& lat, RasterInfo* info = nullptr);
std::pair<Point3, Point3> shape_bounds(const ShapeDesc& desc, int dim);
bool shape_contains(const ShapeDesc& desc, int dim, const Point3& p);
std::optional<double> analytic_measure(const ShapeDesc& desc, int dim);
std::optional<double> analytic_perimeter(const ShapeDesc& desc, int dim);

// -- set algebra ------------------------------------------------------------

GridSet complement(const GridSet& s);
GridSet set_union(const GridSet& a, const GridSet& b);
GridSet set_difference(const GridSet& a, const GridSet& b);
GridSet translate(const GridSet& s, const Index3& shift);
/// Copies a finite set into another lattice with the same spacing and aligned origin.
GridSet embed(const GridSet& s, const Lattice& target);
GridSet crop_to_content(const GridSet& s, int pad_cells);
bool subset_of(const GridSet& a, const GridSet& b);

// -- geometry ---------------------------------------------------------------

double measure(const GridSet& s);

/// Squared distances (in cell units) from every cell center to the nearest
/// seed cell; seeds_outside adds everything outside the window as seeds.
std::vector<double> squared_distance_transform(const Lattice& lat, const std::vector<std::uint8_t>& seeds,
                                               bool seeds_outside = false);

double essential_distance(const GridSet& a, const GridSet& b);
GridSet dilate(const GridSet& s, double r);
GridSet erode(const GridSet& s, double r);
double minkowski_perimeter(const GridSet& s, double eps, const GridField* rho0 = nullptr,
                           const GridField* rho1 = nullptr);

struct Facet {
    Point3 center{0, 0, 0};
    Point3 normal{0, 0, 0};  // inner unit normal
    double weight = 0;       // length, area, or 1 for points
    std::array<Point3, 3> v{};
    int nv = 0;
};

struct BoundaryMeasure {
    int dim = 2;
    std::vector<Facet> facets;
    double total() const;
};

/// Marching squares / tetrahedra on the [1,2,1]-smoothed occupancy at level 1/2;
/// interface midpoints in one dimension.
BoundaryMeasure extract_boundary(const GridSet& s);
double classical_perimeter(const GridSet& s);

}  // namespace nlp
