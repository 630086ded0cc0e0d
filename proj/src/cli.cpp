#include "nlperim/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "nlperim/acceptance.hpp"
#include "nlperim/decompose.hpp"
#include "nlperim/distributional.hpp"
#include "nlperim/errors.hpp"
#include "nlperim/experiments.hpp"
#include "nlperim/gagliardo.hpp"
#include "nlperim/io.hpp"
#include "nlperim/parallel.hpp"

namespace nlp::cli {

namespace fs = std::filesystem;
using io::json;

const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names = {
        "perimeter",     "seminorm",     "coarea",         "decompose",     "simple",     "extremality",
        "gradient-field", "divergence-sign", "alignment",   "reconstruct",   "extreme-1d", "minkowski",
        "sweep-localize", "sweep-horizon", "isoperimetric", "relaxation",    "minimize",   "selftest"};
    return names;
}

namespace {

// Options that name outputs or only affect scheduling; they do not enter the config hash.
const std::set<std::string> kUnhashed = {"--out",     "--report",       "--heatmap",     "--quiver", "--summary",
                                         "--history", "--snapshot-dir", "--u1",          "--u2",     "--workers",
                                         "--help"};
// Options naming input files; their contents are hashed as well.
const std::set<std::string> kInputs = {"--mask", "--kernel", "--field", "--omega", "--potential"};

struct Params {
    std::string mask, kernel, field, omega, potential, constraint;
    std::string out, report, heatmap, quiver, summary, history, snapshot_dir, u1, u2;
    std::string eps = "";
    std::string origin;
    std::string shape, route, mode, init = "square";
    double h = 0, truncation = 0, alpha = 0.5, a = -1, b = 1, scale = 0, cells_per_eps = 16;
    double min_radius_cells = 6, moves = 200, cooling = 0.95, t0 = 0, t0_scale = 1;
    int refinement = 4, levels = 16, spots = 10, n = 4096, sign = 1, stride = 8, cells_per_diameter = 128;
    int cells_per_half_eps = 32, dim = 2, snapshot_every = 0, epochs = 40, patience = 5, quench = 5;
    unsigned seed = 1;
    std::size_t audit_every = 1000;
    std::vector<double> eps_list, masses, distances;
    std::vector<int> n_list, only;
    std::vector<std::string> probes;
    bool quick = false;
};

struct Ctx {
    Params p;
    std::string command;
    std::string hash;
    std::ostream* out = nullptr;
    std::ostream* err = nullptr;
};

// -- small helpers ----------------------------------------------------------

double parse_number(const std::string& s, const char* what) {
    if (s == "inf" || s == "infinity" || s == "Infinity") return INFINITY;
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos == s.size()) return v;
    } catch (const std::exception&) {
    }
    fail(ErrorKind::Precondition, std::string("cannot parse ") + what + " '" + s + "'");
}

std::optional<Point3> parse_point(const std::string& s) {
    if (s.empty()) return std::nullopt;
    Point3 p{0, 0, 0};
    std::stringstream ss(s);
    std::string part;
    int a = 0;
    while (std::getline(ss, part, ',')) {
        require(a < 3, ErrorKind::Precondition, "too many coordinates in '" + s + "'");
        p[a++] = parse_number(part, "coordinate");
    }
    return p;
}

io::MaskGeometry geometry(const Params& p) {
    io::MaskGeometry g;
    if (p.h > 0) g.h = p.h;
    g.origin = parse_point(p.origin);
    return g;
}

void check_input(const std::string& path, const char* what) {
    require(!path.empty(), ErrorKind::Precondition, std::string("missing ") + what);
    std::ifstream f(path, std::ios::binary);
    if (!f) fail(ErrorKind::Io, std::string("cannot read ") + what + " '" + path + "'");
}

void check_output(const std::string& path) {
    if (path.empty()) return;
    const fs::path dir = fs::path(path).parent_path();
    if (dir.empty()) return;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (!fs::is_directory(dir)) fail(ErrorKind::Io, "cannot create output directory '" + dir.string() + "'");
}

bool is_json_literal(const std::string& s) {
    const auto it = std::find_if(s.begin(), s.end(), [](unsigned char c) { return !std::isspace(c); });
    return it != s.end() && *it == '{';
}

KernelSpec load_kernel(const Params& p, int dim) {
    require(!p.kernel.empty(), ErrorKind::Precondition, "a --kernel is required");
    if (is_json_literal(p.kernel)) {
        const json j = json::parse(p.kernel, nullptr, false);
        require(!j.is_discarded(), ErrorKind::Precondition, "--kernel is not valid JSON");
        return io::kernel_from_json(j, dim);
    }
    return io::read_kernel(p.kernel, dim);
}

json lattice_json(const Lattice& L) {
    return {{"dim", L.dim}, {"h", L.h}, {"n", {L.n[0], L.n[1], L.n[2]}},
            {"origin", {L.origin[0], L.origin[1], L.origin[2]}}};
}

json point_json(const Point3& x, int dim) {
    json j = json::array();
    for (int a = 0; a < dim; ++a) j.push_back(x[a]);
    return j;
}

void emit(Ctx& c, json j, const std::string& path) {
    j["command"] = c.command;
    j["config_hash"] = c.hash;
    const std::string text = j.dump(2) + "\n";
    if (path.empty()) {
        *c.out << text;
    } else {
        io::write_atomic(path, text);
    }
}

void write_text(Ctx& c, const std::string& path, const std::string& text) {
    if (path.empty()) {
        *c.out << text;
    } else {
        io::write_atomic(path, text);
    }
}

std::vector<std::string> coord_columns(int dim) {
    static const char* names[] = {"x", "y", "z"};
    return std::vector<std::string>(names, names + dim);
}

std::string sweep_csv(const Ctx& c, const SweepReport& r) {
    io::Csv csv(c.hash, {"parameter", "value", "reference", "rel_error", "h", "error", "check", "reliable",
                         "reference_kind"});
    for (const auto& w : r.rows)
        csv.row(std::vector<std::string>{io::format_double(w.parameter), io::format_double(w.value),
                                         io::format_double(w.reference), io::format_double(w.rel_error),
                                         io::format_double(w.h), io::format_double(w.error),
                                         io::format_double(w.check), w.reliable ? "1" : "0", w.reference_kind});
    return csv.str();
}

json sweep_json(const SweepReport& r) {
    json rows = json::array();
    for (const auto& w : r.rows)
        rows.push_back({{"parameter", w.parameter},
                        {"value", w.value},
                        {"reference", w.reference},
                        {"rel_error", w.rel_error},
                        {"h", w.h},
                        {"error", w.error},
                        {"check", w.check},
                        {"reliable", w.reliable},
                        {"reference_kind", w.reference_kind}});
    return {{"name", r.name}, {"kernel", r.kernel}, {"shape", r.shape},  {"seed", r.seed},
            {"rows", rows},   {"notes", r.notes},   {"monotone", r.monotone}, {"seconds", r.seconds}};
}

std::vector<double> sorted_desc(std::vector<double> v) {
    std::sort(v.begin(), v.end(), std::greater<>());
    return v;
}

// -- subcommands ------------------------------------------------------------

int cmd_perimeter(Ctx& c) {
    const auto& p = c.p;
    GridSet E = io::read_mask(p.mask, geometry(p));
    KernelSpec k = load_kernel(p, E.lat.dim);
    QuadratureConfig q;
    q.truncation = p.truncation;
    q.refinement = p.refinement;
    auto r = gagliardo_perimeter(E, k, q);
    emit(c,
         {{"value", r.value},
          {"error_estimate", r.error},
          {"tail", r.tail},
          {"pairs", r.pairs},
          {"seconds", r.seconds},
          {"measure", measure(E)},
          {"complement", E.complement},
          {"kernel", io::kernel_to_json(k)},
          {"lattice", lattice_json(E.lat)}},
         p.out);
    return Ok;
}

GridField load_field(const Params& p) {
    check_input(p.field, "--field");
    return io::read_field(p.field, geometry(p), p.dim);
}

int cmd_seminorm(Ctx& c) {
    const auto& p = c.p;
    GridField u = load_field(p);
    KernelSpec k = load_kernel(p, u.lat.dim);
    QuadratureConfig q;
    q.truncation = p.truncation;
    q.refinement = p.refinement;
    auto r = gagliardo_seminorm(u, k, q);
    emit(c,
         {{"value", r.value},
          {"error_estimate", r.error},
          {"tail", r.tail},
          {"pairs", r.pairs},
          {"seconds", r.seconds},
          {"kernel", io::kernel_to_json(k)},
          {"lattice", lattice_json(u.lat)}},
         p.out);
    return Ok;
}

int cmd_coarea(Ctx& c) {
    const auto& p = c.p;
    GridField u = load_field(p);
    KernelSpec k = load_kernel(p, u.lat.dim);
    require(p.levels >= 2, ErrorKind::Precondition, "--levels must be at least 2");
    std::vector<double> vals = u.data;
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    bool quantized = false;
    if (vals.size() > static_cast<std::size_t>(p.levels)) {
        // uniform bins, each value replaced by its bin midpoint
        const double lo = vals.front(), hi = vals.back(), w = (hi - lo) / p.levels;
        for (double& v : u.data) {
            const int b = std::min(p.levels - 1, static_cast<int>((v - lo) / w));
            v = lo + (b + 0.5) * w;
        }
        quantized = true;
    }
    auto r = coarea_residual(u, k);
    emit(c,
         {{"seminorm", r.seminorm},
          {"level_sum", r.level_sum},
          {"residual", r.residual},
          {"levels", r.thresholds.size()},
          {"quantized", quantized},
          {"kernel", io::kernel_to_json(k)}},
         p.out);
    return Ok;
}

double eps_value(const Params& p, bool allow_inf = false) {
    require(!p.eps.empty(), ErrorKind::Precondition, "--eps is required");
    const double e = parse_number(p.eps, "--eps");
    require(e > 0 && (allow_inf || std::isfinite(e)), ErrorKind::Precondition, "--eps must be positive and finite");
    return e;
}

int cmd_decompose(Ctx& c) {
    const auto& p = c.p;
    GridSet E = io::read_mask(p.mask, geometry(p));
    const double eps = eps_value(p);
    auto dec = epsilon_components(E, eps);
    json comps = json::array();
    for (std::size_t i = 0; i < dec.size(); ++i) {
        const auto& cp = dec.components[i];
        comps.push_back({{"label", i},
                         {"cells", cp.cells},
                         {"measure", cp.measure},
                         {"representative", point_json(E.lat.center(cp.representative), E.lat.dim)},
                         {"touches_window", cp.touches_window}});
    }
    json dist = json::array();
    if (!dec.distances.empty())
        for (std::size_t i = 0; i < dec.size(); ++i) {
            json row = json::array();
            for (std::size_t j = 0; j < dec.size(); ++j) row.push_back(dec.distance(i, j));
            dist.push_back(row);
        }
    json rep = {{"eps", eps}, {"h", E.lat.h}, {"components", comps}, {"distances", dist}};
    if (!E.complement) {
        KernelSpec k = p.kernel.empty() ? KernelSpec::truncated_fractional(E.lat.dim, 0.5, eps)
                                        : load_kernel(p, E.lat.dim);
        if (k.finite_horizon() && k.horizon() <= eps) {
            auto add = additivity_residual(E, eps, k);
            rep["additivity"] = {{"perimeter", add.perimeter},
                                 {"component_sum", add.component_sum},
                                 {"residual", add.residual},
                                 {"relative", add.relative},
                                 {"kernel", io::kernel_to_json(k)}};
        }
    }
    if (!p.out.empty()) {
        if (E.lat.dim == 2) {
            io::write_atomic(p.out, io::labels_pgm(E.lat, dec.labels, dec.size(), c.hash));
        } else {
            io::Csv csv(c.hash, {"cell", "label"});
            for (std::size_t i = 0; i < dec.labels.size(); ++i)
                if (dec.labels[i] >= 0) csv.row({static_cast<double>(i), static_cast<double>(dec.labels[i])});
            io::write_atomic(p.out, csv.str());
        }
    }
    emit(c, rep, p.report);
    return Ok;
}

int cmd_simple(Ctx& c) {
    const auto& p = c.p;
    GridSet E = io::read_mask(p.mask, geometry(p));
    const double eps = eps_value(p);
    const Simplicity s = is_epsilon_simple(E, eps);
    auto dec = is_epsilon_decomposable(E, eps);
    emit(c,
         {{"eps", eps},
          {"verdict", simplicity_name(s)},
          {"simple", s == Simplicity::Simple},
          {"decomposable", dec.decomposable},
          {"witness_distance", dec.decomposable ? json(dec.witness_distance) : json(nullptr)}},
         p.out);
    return Ok;
}

std::string field_csv(const Ctx& c, const GridField& f, const std::vector<std::string>& value_names) {
    const int d = f.lat.dim;
    auto cols = coord_columns(d);
    cols.insert(cols.end(), value_names.begin(), value_names.end());
    io::Csv csv(c.hash, cols);
    for (std::size_t i = 0; i < f.lat.size(); ++i) {
        const Point3 x = f.lat.center(i);
        std::vector<double> row(x.begin(), x.begin() + d);
        for (int k = 0; k < f.components; ++k) row.push_back(f.at(i, k));
        csv.row(row);
    }
    return csv.str();
}

int cmd_extremality(Ctx& c) {
    const auto& p = c.p;
    GridSet E = io::read_mask(p.mask, geometry(p));
    const double eps = eps_value(p, true);
    KernelSpec k = load_kernel(p, E.lat.dim);
    auto v = extremality_witness(E, eps, k);
    if (!p.u1.empty() && !v.u1.data.empty()) io::write_atomic(p.u1, field_csv(c, v.u1, {"u1"}));
    if (!p.u2.empty() && !v.u2.data.empty()) io::write_atomic(p.u2, field_csv(c, v.u2, {"u2"}));
    emit(c,
         {{"eps", std::isfinite(eps) ? json(eps) : json("inf")},
          {"extreme", v.extreme},
          {"reason", v.reason},
          {"lambda", v.lambda},
          {"seminorm_u1", v.seminorm_u1},
          {"seminorm_u2", v.seminorm_u2},
          {"identity_residual", v.identity_residual}},
         p.out);
    return Ok;
}

int cmd_gradient_field(Ctx& c) {
    const auto& p = c.p;
    GridSet E = io::read_mask(p.mask, geometry(p));
    KernelSpec k = load_kernel(p, E.lat.dim);
    const std::string route = p.route.empty() ? "boundary" : p.route;
    require(route == "boundary" || route == "direct", ErrorKind::Precondition, "--route is direct or boundary");
    GridField g = route == "direct" ? nonlocal_gradient_direct(E, k) : nonlocal_gradient_boundary(E, k);
    const int d = E.lat.dim;
    static const char* gn[] = {"gx", "gy", "gz"};
    std::vector<std::string> names(gn, gn + d);
    names.push_back("norm");
    auto with_norm = [&](const GridField& f) {
        GridField h(f.lat, d + 1);
        for (std::size_t i = 0; i < f.lat.size(); ++i) {
            double s = 0;
            for (int a = 0; a < d; ++a) {
                h.at(i, a) = f.at(i, a);
                s += f.at(i, a) * f.at(i, a);
            }
            h.at(i, d) = std::sqrt(s);
        }
        return h;
    };
    GridField gn_field = with_norm(g);
    if (!p.out.empty()) io::write_atomic(p.out, field_csv(c, gn_field, names));
    if (!p.heatmap.empty()) {
        require(d == 2, ErrorKind::Precondition, "--heatmap needs a 2D mask");
        io::write_atomic(p.heatmap, io::magnitude_pgm(g, c.hash));
    }
    if (!p.quiver.empty()) {
        require(p.stride >= 1, ErrorKind::Precondition, "--stride must be positive");
        auto cols = coord_columns(d);
        cols.insert(cols.end(), names.begin(), names.end());
        io::Csv csv(c.hash, cols);
        for (std::size_t i = 0; i < E.lat.size(); ++i) {
            const Index3 ix = E.lat.unravel(i);
            bool keep = gn_field.at(i, d) > 0;
            for (int a = 0; a < d; ++a) keep = keep && ix[a] % p.stride == 0;
            if (!keep) continue;
            const Point3 x = E.lat.center(i);
            std::vector<double> row(x.begin(), x.begin() + d);
            for (int a = 0; a <= d; ++a) row.push_back(gn_field.at(i, a));
            csv.row(row);
        }
        io::write_atomic(p.quiver, csv.str());
    }
    double l1 = 0, mx = 0;
    for (std::size_t i = 0; i < E.lat.size(); ++i) {
        l1 += gn_field.at(i, d) * E.lat.cell_volume();
        mx = std::max(mx, gn_field.at(i, d));
    }
    emit(c, {{"route", route}, {"l1_norm", l1}, {"max_norm", mx}, {"lattice", lattice_json(E.lat)}},
         p.report);
    return Ok;
}

int cmd_divergence_sign(Ctx& c) {
    const auto& p = c.p;
    GridSet E = io::read_mask(p.mask, geometry(p));
    KernelSpec k = load_kernel(p, E.lat.dim);
    auto ds = interior_divergence_sign(E, k, p.spots, p.seed);
    if (!p.out.empty()) {
        const int d = E.lat.dim;
        auto cols = coord_columns(d);
        cols.push_back("divergence");
        io::Csv csv(c.hash, cols);
        for (std::size_t i = 0; i < E.lat.size(); ++i) {
            if (!ds.checked[i]) continue;
            const Point3 x = E.lat.center(i);
            std::vector<double> row(x.begin(), x.begin() + d);
            row.push_back(ds.divergence.at(i));
            csv.row(row);
        }
        io::write_atomic(p.out, csv.str());
    }
    json spots = json::array();
    double worst = 0;
    for (const auto& s : ds.spots) {
        spots.push_back({{"x", point_json(s.x, E.lat.dim)},
                         {"finite_difference", s.finite_difference},
                         {"identity", s.identity},
                         {"relative", s.relative}});
        worst = std::max(worst, s.relative);
    }
    emit(c,
         {{"checked", ds.checked_count},
          {"violations", ds.violations},
          {"spots", spots},
          {"worst_spot_relative", worst},
          {"pass", ds.violations == 0 && worst <= 0.05}},
         p.report);
    return Ok;
}

int cmd_alignment(Ctx& c) {
    const auto& p = c.p;
    GridSet E = io::read_mask(p.mask, geometry(p));
    KernelSpec k = load_kernel(p, E.lat.dim);
    require(!p.probes.empty(), ErrorKind::Precondition, "at least one --probe x,y,nx,ny is required");
    const int d = E.lat.dim;
    std::vector<double> dist = p.distances;
    if (dist.empty()) dist = {E.lat.h, 2 * E.lat.h, 4 * E.lat.h, 8 * E.lat.h};
    std::vector<Probe> probes;
    for (const auto& s : p.probes) {
        std::vector<double> v;
        std::stringstream ss(s);
        std::string part;
        while (std::getline(ss, part, ',')) v.push_back(parse_number(part, "--probe"));
        require(static_cast<int>(v.size()) == 2 * d, ErrorKind::Precondition,
                "--probe needs " + std::to_string(2 * d) + " numbers: point then inner normal");
        Point3 x{0, 0, 0}, n{0, 0, 0};
        for (int a = 0; a < d; ++a) x[a] = v[a], n[a] = v[d + a];
        probes.push_back(normal_probe(x, n, dist));
    }
    auto rows = normal_alignment_profile(E, k, probes);
    std::vector<std::string> cols;
    for (const char* s : {"x0", "y0", "z0"}) cols.push_back(s);
    cols.resize(d);
    for (const char* s : {"nx", "ny", "nz"}) cols.push_back(s);
    cols.resize(2 * d);
    for (const char* s : {"corner", "distance", "angle_deg"}) cols.push_back(s);
    io::Csv csv(c.hash, cols);
    double worst = 0;
    for (const auto& r : rows)
        for (std::size_t i = 0; i < r.distances.size(); ++i) {
            std::vector<double> row(r.x0.begin(), r.x0.begin() + d);
            row.insert(row.end(), r.normal.begin(), r.normal.begin() + d);
            row.push_back(r.corner ? 1.0 : 0.0);
            row.push_back(r.distances[i]);
            row.push_back(r.angles_deg[i]);
            csv.row(row);
            if (!r.corner) worst = std::max(worst, r.angles_deg[i]);
        }
    write_text(c, p.out, csv.str());
    if (!p.report.empty()) emit(c, {{"probes", rows.size()}, {"max_angle_deg_off_corner", worst}}, p.report);
    return Ok;
}

int cmd_reconstruct(Ctx& c) {
    const auto& p = c.p;
    GridSet E = io::read_mask(p.mask, geometry(p));
    require(p.alpha > 0 && p.alpha < 1, ErrorKind::Domain, "--alpha must lie in (0, 1)");
    auto bm = extract_boundary(E);
    const double per = bm.total();
    const double scale = p.scale != 0 ? p.scale : (per > 0 ? 1.0 / per : 1.0);
    GridField u = fractional_reconstruct(bm, p.alpha, E.lat, scale);
    if (!p.out.empty()) io::write_atomic(p.out, field_csv(c, u, {"u"}));
    double lo = INFINITY, hi = -INFINITY;
    for (double v : u.data) {
        if (!std::isfinite(v)) continue;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    emit(c, {{"alpha", p.alpha}, {"scale", scale}, {"boundary_measure", per}, {"min", lo}, {"max", hi}},
         p.report);
    return Ok;
}

int cmd_extreme_1d(Ctx& c) {
    const auto& p = c.p;
    require(p.a < p.b, ErrorKind::Precondition, "--a must be smaller than --b");
    require(p.alpha > 0 && p.alpha < 1, ErrorKind::Domain, "--alpha must lie in (0, 1)");
    require(p.n > 0, ErrorKind::Precondition, "--n must be positive");
    require(p.sign == 1 || p.sign == -1, ErrorKind::Precondition, "--sign is 1 or -1");
    const std::string mode = p.mode.empty() ? "average" : p.mode;
    require(mode == "average" || mode == "sample", ErrorKind::Precondition, "--mode is average or sample");
    Lattice L = extreme_point_lattice(p.a, p.b, 1.0 / p.n);
    auto e = extreme_point_1d(p.a, p.b, p.alpha, p.sign, L, mode == "sample" ? SampleMode::Sample : SampleMode::CellAverage);
    io::Csv csv(c.hash, {"x", "u", "masked"});
    for (std::size_t i = 0; i < L.size(); ++i)
        csv.row({L.center(i)[0], e.u.data[i], e.masked.empty() ? 0.0 : static_cast<double>(e.masked[i])});
    write_text(c, p.out, csv.str());
    if (!p.report.empty())
        emit(c,
             {{"a", p.a},
              {"b", p.b},
              {"alpha", p.alpha},
              {"coefficient", extreme_point_coefficient(p.alpha)},
              {"cells", L.size()},
              {"h", L.h}},
             p.report);
    return Ok;
}

int cmd_minkowski(Ctx& c) {
    const auto& p = c.p;
    GridSet E = io::read_mask(p.mask, geometry(p));
    const double eps = eps_value(p);
    const double v = minkowski_perimeter(E, eps);
    emit(c, {{"eps", eps}, {"value", v}, {"classical_perimeter", classical_perimeter(E)}, {"measure", measure(E)}},
         p.out);
    return Ok;
}

KernelSpec sweep_base(const Params& p) {
    if (p.kernel.empty()) return KernelSpec::bump(2, 1.0, 0.1, 0.0);
    return load_kernel(p, 2);
}

int emit_sweep(Ctx& c, const SweepReport& r, bool pass) {
    write_text(c, c.p.out, sweep_csv(c, r));
    json j = sweep_json(r);
    j["pass"] = pass;
    if (!c.p.summary.empty() || !c.p.out.empty()) emit(c, j, c.p.summary);
    return Ok;
}

ShapeDesc named_shape(const std::string& name, int dim) {
    if (name == "square") return ShapeDesc::box({0, 0, 0}, {1, 1, 0});
    if (name == "ball") return ShapeDesc::ball({0, 0, 0}, 1.0);
    if (name == "interval") return ShapeDesc::box({0, 0, 0}, {1, 0, 0});
    if (name == "cube") return ShapeDesc::box({0, 0, 0}, {1, 1, dim == 3 ? 1.0 : 0.0});
    fail(ErrorKind::Precondition, "unknown --shape '" + name + "'");
}

int cmd_sweep_localize(Ctx& c) {
    const auto& p = c.p;
    const std::string route = p.route.empty() ? "gagliardo" : p.route;
    require(route == "gagliardo" || route == "distributional", ErrorKind::Precondition,
            "--route is gagliardo or distributional");
    std::vector<double> eps = p.eps_list.empty() ? std::vector<double>{0.4, 0.2, 0.1, 0.05} : p.eps_list;
    auto r = sweep_localization(named_shape(p.shape.empty() ? "square" : p.shape, 2), 2, sweep_base(p), eps,
                                route == "gagliardo" ? LocalizationRoute::Gagliardo : LocalizationRoute::Distributional,
                                p.cells_per_eps);
    return emit_sweep(c, r, r.monotone && r.rows.back().rel_error <= 0.05);
}

int cmd_sweep_horizon(Ctx& c) {
    const auto& p = c.p;
    const std::string shape = p.shape.empty() ? "interval" : p.shape;
    const int dim = shape == "interval" ? 1 : 2;
    std::vector<double> eps = p.eps_list.empty() ? std::vector<double>{32, 64, 128, 256, 512, 1024, 2048} : p.eps_list;
    const double h = p.h > 0 ? p.h : (dim == 1 ? 1.0 / 2048 : 1.0 / 32);
    auto r = sweep_infinite_horizon(named_shape(shape, dim), dim, p.alpha, eps, h);
    return emit_sweep(c, r, r.monotone);
}

int cmd_isoperimetric(Ctx& c) {
    const auto& p = c.p;
    std::vector<double> masses = p.masses.empty() ? std::vector<double>{1e-2, 2.5e-3, 6.25e-4, 1.5625e-4} : p.masses;
    const double eps = p.eps.empty() ? 1.0 : eps_value(p);
    auto r = isoperimetric_profile(p.dim, p.alpha, eps, sorted_desc(masses), p.cells_per_diameter);
    return emit_sweep(c, r, r.monotone && r.rows.back().rel_error <= 0.10);
}

int cmd_relaxation(Ctx& c) {
    const auto& p = c.p;
    const double eps = p.eps.empty() ? 0.25 : eps_value(p);
    KernelSpec k = p.kernel.empty() ? KernelSpec::truncated_fractional(2, p.alpha, eps) : load_kernel(p, 2);
    GridSet E;
    if (!p.mask.empty()) {
        GridSet m = io::read_mask(p.mask, geometry(p));
        auto b = std::make_pair(m.lat.origin, m.lat.origin);
        for (int a = 0; a < m.lat.dim; ++a) b.second[a] += m.lat.n[a] * m.lat.h;
        Lattice L = relaxation_lattice(m.lat.dim, eps, p.cells_per_half_eps, b.first, b.second);
        require(std::abs(L.h - m.lat.h) <= 1e-12 * L.h, ErrorKind::Precondition,
                "mask spacing must equal eps / (2 * cells-per-half-eps)");
        E = embed(m, L);
    } else {
        Lattice L = relaxation_lattice(2, eps, p.cells_per_half_eps, {-3 * eps, -1.5 * eps, 0},
                                       {3 * eps, 1.5 * eps, 0});
        E = make_shape(ShapeDesc::make_union({ShapeDesc::ball({-1.6 * eps, 0, 0}, 0.8 * eps),
                                              ShapeDesc::ball({1.6 * eps, 0, 0}, 0.8 * eps)}),
                       L);
    }
    std::vector<int> ns = p.n_list.empty() ? std::vector<int>{1, 2, 3, 4, 6, 8} : p.n_list;
    const double budget = relaxation_budget(k, E.lat, eps, p.min_radius_cells * E.lat.h);
    auto r = relaxation_demo(E, k, eps, ns, budget);
    io::Csv csv(c.hash, {"n", "measure", "perimeter", "increment", "components", "scaling"});
    json rows = json::array();
    for (const auto& w : r.rows) {
        csv.row({static_cast<double>(w.n), w.measure, w.perimeter, w.increment, static_cast<double>(w.components),
                 w.scaling});
        rows.push_back({{"n", w.n},
                        {"measure", w.measure},
                        {"perimeter", w.perimeter},
                        {"increment", w.increment},
                        {"components", w.components},
                        {"scaling", w.scaling}});
    }
    write_text(c, p.out, csv.str());
    if (!p.summary.empty() || !p.out.empty())
        emit(c,
             {{"eps", eps},
              {"budget", budget},
              {"base_perimeter", r.base_perimeter},
              {"base_components", r.base_components},
              {"rows", rows},
              {"last_resolved", r.last_resolved},
              {"single_component", r.single_component},
              {"decreasing", r.decreasing},
              {"pass", r.single_component && r.decreasing}},
             p.summary);
    return Ok;
}

AnnealConfig anneal_config(Ctx& c) {
    const auto& p = c.p;
    AnnealConfig cfg;
    cfg.seed = p.seed;
    cfg.max_epochs = p.epochs;
    cfg.patience = p.patience;
    cfg.moves_per_cell = p.moves;
    cfg.cooling = p.cooling;
    cfg.t0 = p.t0;
    cfg.t0_scale = p.t0_scale;
    cfg.quench_epochs = p.quench;
    cfg.audit_every = p.audit_every;
    if (p.init == "square") cfg.init = AnnealInit::Square;
    else if (p.init == "ball") cfg.init = AnnealInit::Ball;
    else if (p.init == "random") cfg.init = AnnealInit::Random;
    else fail(ErrorKind::Precondition, "--init is square, ball or random");
    if (p.snapshot_every > 0) {
        const std::string dir = p.snapshot_dir.empty() ? "snapshots" : p.snapshot_dir;
        const std::string hash = c.hash;
        const int every = p.snapshot_every;
        cfg.on_epoch = [dir, hash, every](int ep, const GridSet& s) {
            if (ep % every != 0) return;
            char name[32];
            std::snprintf(name, sizeof name, "epoch_%04d", ep);
            io::write_mask(fs::path(dir) / (std::string(name) + (s.lat.dim == 2 ? ".pgm" : s.lat.dim == 1 ? ".txt" : ".raw")),
                           s, hash);
        };
    }
    return cfg;
}

std::string history_csv(const Ctx& c, const std::vector<AnnealEpoch>& hist) {
    io::Csv csv(c.hash, {"epoch", "temperature", "energy", "mean_energy", "acceptance", "mass_cells"});
    for (const auto& e : hist)
        csv.row({static_cast<double>(e.epoch), e.temperature, e.energy, e.mean_energy, e.acceptance,
                 static_cast<double>(e.mass_cells)});
    return csv.str();
}

int cmd_minimize(Ctx& c) {
    const auto& p = c.p;
    require(p.constraint.empty() != p.potential.empty(), ErrorKind::Precondition,
            "give exactly one of --constraint mass=M (with --omega) or --potential");
    AnnealConfig cfg = anneal_config(c);
    json summary;
    if (!p.constraint.empty()) {
        require(p.constraint.rfind("mass=", 0) == 0, ErrorKind::Precondition, "--constraint must read mass=<value>");
        const double mass = parse_number(p.constraint.substr(5), "mass");
        check_input(p.omega, "--omega");
        GridSet omega = io::read_mask(p.omega, geometry(p));
        KernelSpec k = load_kernel(p, omega.lat.dim);
        auto r = minimize_constrained(omega, mass, k, cfg);
        if (!p.out.empty()) io::write_mask(p.out, r.state.set, c.hash);
        if (!p.history.empty()) io::write_atomic(p.history, history_csv(c, r.history));
        const double tol = 2 * r.perimeter_error;
        summary = {{"mode", "mass"},
                   {"mass", mass},
                   {"energy", r.state.energy},
                   {"perimeter", r.perimeter},
                   {"perimeter_error", r.perimeter_error},
                   {"ball_perimeter", r.ball_perimeter},
                   {"sym_diff", r.sym_diff},
                   {"sym_diff_rel", r.sym_diff_rel},
                   {"centroid", point_json(r.centroid, omega.lat.dim)},
                   {"radius", r.radius},
                   {"epochs", r.history.size()},
                   {"proposed", r.state.proposed},
                   {"accepted", r.state.accepted},
                   {"audits", r.state.audits},
                   {"max_audit_drift", r.state.max_audit_drift},
                   {"seed", r.state.seed},
                   {"isoperimetric_ok", r.perimeter >= r.ball_perimeter - tol},
                   {"ball_like", r.sym_diff_rel <= 0.05},
                   {"pass", r.perimeter >= r.ball_perimeter - tol && r.sym_diff_rel <= 0.05}};
    } else {
        check_input(p.potential, "--potential");
        GridField g = io::read_field(p.potential, geometry(p), 2);
        KernelSpec k = load_kernel(p, 2);
        auto r = minimize_potential(g, k, cfg);
        if (!p.out.empty()) io::write_mask(p.out, r.state.set, c.hash);
        if (!p.history.empty()) io::write_atomic(p.history, history_csv(c, r.history));
        bool removal_ok = true;
        for (double v : r.removal) removal_ok = removal_ok && v <= 0;
        summary = {{"mode", "potential"},
                   {"energy", r.state.energy},
                   {"components", r.components.size()},
                   {"component_masses", r.component_masses},
                   {"removal", r.removal},
                   {"smallest_mass", r.smallest_mass},
                   {"epochs", r.history.size()},
                   {"audits", r.state.audits},
                   {"max_audit_drift", r.state.max_audit_drift},
                   {"seed", r.state.seed},
                   {"pass", removal_ok}};
    }
    emit(c, summary, p.summary);
    return Ok;
}

int cmd_selftest(Ctx& c) {
    const auto& p = c.p;
    AcceptanceOptions opt;
    opt.quick = p.quick;
    opt.only = p.only;
    std::ostream& o = *c.out;
    opt.on_check = [&o](const AcceptanceCheck& ck) { o << format_check(ck) << "\n" << std::flush; };
    auto checks = run_acceptance(opt);
    int pass = 0;
    for (const auto& ck : checks) pass += ck.pass;
    o << pass << "/" << checks.size() << " checks passed\n";
    if (!p.out.empty()) io::write_atomic(p.out, "# config_hash=" + c.hash + "\n" + format_acceptance(checks));
    return acceptance_ok(checks) ? Ok : Failed;
}

// -- wiring -----------------------------------------------------------------

using Handler = int (*)(Ctx&);

void add_mask(CLI::App* s, Params& p, bool required = true) {
    auto* o = s->add_option("--mask", p.mask, "mask file (.pgm 2D, .raw + .json sidecar 3D, .txt run-length 1D)");
    if (required) o->required();
    s->add_option("--spacing", p.h, "lattice spacing when the file does not carry one (default 1/64)");
    s->add_option("--origin", p.origin, "lattice origin x,y[,z] when the file does not carry one (default centred)");
}

void add_kernel(CLI::App* s, Params& p, bool required = true) {
    auto* o = s->add_option("--kernel", p.kernel, "kernel JSON file or inline JSON object");
    if (required) o->required();
}

int exit_for(ErrorKind k) {
    switch (k) {
        case ErrorKind::Precondition:
        case ErrorKind::Domain:
        case ErrorKind::Unsupported: return Precondition;
        case ErrorKind::Io: return Unreadable;
        case ErrorKind::Numeric:
        case ErrorKind::Internal: return NumericFailure;
    }
    return NumericFailure;
}

void error_json(std::ostream& out, const std::string& command, const std::string& kind, const std::string& msg,
                int code) {
    json j = {{"error", {{"kind", kind}, {"message", msg}, {"exit_code", code}}}, {"command", command}};
    out << j.dump(2) << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    // locate the subcommand token, skipping the global --workers option
    std::string command;
    for (std::size_t i = 0; i < args.size(); ++i) {
        const std::string& a = args[i];
        if (a == "--workers") {
            ++i;
            continue;
        }
        if (a.rfind("--workers=", 0) == 0) continue;
        if (a == "-h" || a == "--help") break;
        if (!a.empty() && a[0] == '-') break;
        command = a;
        break;
    }
    const auto& names = subcommands();
    if (!command.empty() && std::find(names.begin(), names.end(), command) == names.end()) {
        error_json(out, command, "unknown_subcommand", "unknown subcommand '" + command + "'", UnknownCommand);
        err << "nlperim: unknown subcommand '" << command << "'\n";
        return UnknownCommand;
    }

    auto ctx = std::make_unique<Ctx>();
    Ctx& c = *ctx;
    Params& p = c.p;
    c.out = &out;
    c.err = &err;
    c.command = command;

    CLI::App app{"Nonlocal perimeters, decompositions and convergence experiments on lattice sets", "nlperim"};
    app.option_defaults()->always_capture_default();
    app.require_subcommand(1);
    int workers = 0;
    app.add_option("--workers", workers, "worker threads (0 = available parallelism)");

    std::map<std::string, Handler> handlers;
    auto sub = [&](const char* name, const char* desc, Handler h) {
        handlers[name] = h;
        return app.add_subcommand(name, desc);
    };

    {
        auto* s = sub("perimeter", "Gagliardo perimeter of a mask", cmd_perimeter);
        add_mask(s, p);
        add_kernel(s, p);
        s->add_option("--truncation", p.truncation, "pair truncation radius (0 = kernel horizon)");
        s->add_option("--refinement", p.refinement, "sub-samples per axis for near cell pairs");
        s->add_option("--out", p.out, "result JSON (default stdout)");
    }
    {
        auto* s = sub("seminorm", "Gagliardo seminorm of a scalar field", cmd_seminorm);
        s->add_option("--field", p.field, "field CSV (value matrix, row 0 at the top)")->required();
        s->add_option("--dim", p.dim, "field dimension (1 or 2)");
        s->add_option("--spacing", p.h, "lattice spacing when the file does not carry one");
        s->add_option("--origin", p.origin, "lattice origin when the file does not carry one");
        add_kernel(s, p);
        s->add_option("--truncation", p.truncation, "pair truncation radius");
        s->add_option("--refinement", p.refinement, "sub-samples per axis for near cell pairs");
        s->add_option("--out", p.out, "result JSON (default stdout)");
    }
    {
        auto* s = sub("coarea", "seminorm against the layer-cake sum of level-set perimeters", cmd_coarea);
        s->add_option("--field", p.field, "field CSV")->required();
        s->add_option("--dim", p.dim, "field dimension (1 or 2)");
        s->add_option("--spacing", p.h, "lattice spacing when the file does not carry one");
        s->add_option("--origin", p.origin, "lattice origin when the file does not carry one");
        add_kernel(s, p);
        s->add_option("--levels", p.levels, "quantize to this many levels when the field has more distinct values");
        s->add_option("--out", p.out, "result JSON (default stdout)");
    }
    {
        auto* s = sub("decompose", "eps-connected components", cmd_decompose);
        add_mask(s, p);
        s->add_option("--eps", p.eps, "connectivity radius")->required();
        add_kernel(s, p, false);
        s->add_option("--out", p.out, "labels image (gray levels per component)");
        s->add_option("--report", p.report, "report JSON (default stdout)");
    }
    {
        auto* s = sub("simple", "eps-simplicity verdict", cmd_simple);
        add_mask(s, p);
        s->add_option("--eps", p.eps, "connectivity radius")->required();
        s->add_option("--out", p.out, "result JSON (default stdout)");
    }
    {
        auto* s = sub("extremality", "extreme-point criterion with an explicit witness", cmd_extremality);
        add_mask(s, p);
        s->add_option("--eps", p.eps, "connectivity radius, or inf for the fractional criterion")->required();
        add_kernel(s, p);
        s->add_option("--u1", p.u1, "first witness function CSV");
        s->add_option("--u2", p.u2, "second witness function CSV");
        s->add_option("--out", p.out, "result JSON (default stdout)");
    }
    {
        auto* s = sub("gradient-field", "nonlocal gradient of an indicator", cmd_gradient_field);
        add_mask(s, p);
        add_kernel(s, p);
        s->add_option("--route", p.route, "boundary (default) or direct");
        s->add_option("--out", p.out, "field CSV: coordinates, components, norm");
        s->add_option("--heatmap", p.heatmap, "magnitude PGM");
        s->add_option("--quiver", p.quiver, "subsampled arrows CSV");
        s->add_option("--stride", p.stride, "quiver subsampling in cells");
        s->add_option("--report", p.report, "summary JSON (default stdout)");
    }
    {
        auto* s = sub("divergence-sign", "sign of the divergence of the nonlocal gradient inside a set",
                      cmd_divergence_sign);
        add_mask(s, p);
        add_kernel(s, p);
        s->add_option("--spots", p.spots, "spot checks against the integral identity");
        s->add_option("--seed", p.seed, "spot-check sampling seed");
        s->add_option("--out", p.out, "divergence CSV on the checked cells");
        s->add_option("--report", p.report, "summary JSON (default stdout)");
    }
    {
        auto* s = sub("alignment", "angle between the nonlocal gradient and the inner normal", cmd_alignment);
        add_mask(s, p);
        add_kernel(s, p);
        s->add_option("--probe", p.probes, "x,y,nx,ny: boundary point and inner normal (repeatable)");
        s->add_option("--distances", p.distances, "distances along the normal")->delimiter(',');
        s->add_option("--out", p.out, "profile CSV (default stdout)");
        s->add_option("--report", p.report, "summary JSON");
    }
    {
        auto* s = sub("reconstruct", "fractional reconstruction from the boundary measure", cmd_reconstruct);
        add_mask(s, p);
        s->add_option("--alpha", p.alpha, "fractional order in (0, 1)");
        s->add_option("--scale", p.scale, "measure scale (0 = 1 / boundary measure)");
        s->add_option("--out", p.out, "field CSV");
        s->add_option("--report", p.report, "summary JSON (default stdout)");
    }
    {
        auto* s = sub("extreme-1d", "one-dimensional extreme point profile", cmd_extreme_1d);
        s->add_option("--a", p.a, "left endpoint");
        s->add_option("--b", p.b, "right endpoint");
        s->add_option("--alpha", p.alpha, "fractional order in (0, 1)");
        s->add_option("--n", p.n, "cells per unit length");
        s->add_option("--sign", p.sign, "1 or -1");
        s->add_option("--mode", p.mode, "average (cell averages, default) or sample");
        s->add_option("--out", p.out, "profile CSV (default stdout)");
        s->add_option("--report", p.report, "summary JSON");
    }
    {
        auto* s = sub("minkowski", "Minkowski-content perimeter", cmd_minkowski);
        add_mask(s, p);
        s->add_option("--eps", p.eps, "dilation radius")->required();
        s->add_option("--out", p.out, "result JSON (default stdout)");
    }
    {
        auto* s = sub("sweep-localize", "small-horizon localization sweep", cmd_sweep_localize);
        s->add_option("--shape", p.shape, "square (default) or ball");
        s->add_option("--route", p.route, "gagliardo (default) or distributional");
        s->add_option("--eps", p.eps_list, "horizons")->delimiter(',');
        s->add_option("--cells-per-eps", p.cells_per_eps, "cells per horizon");
        add_kernel(s, p, false);
        s->add_option("--out", p.out, "rows CSV (default stdout)");
        s->add_option("--summary", p.summary, "summary JSON");
    }
    {
        auto* s = sub("sweep-horizon", "growing-horizon sweep toward the fractional perimeter", cmd_sweep_horizon);
        s->add_option("--shape", p.shape, "interval (default) or ball");
        s->add_option("--alpha", p.alpha, "fractional order");
        s->add_option("--eps", p.eps_list, "horizons")->delimiter(',');
        s->add_option("--spacing", p.h, "lattice spacing");
        s->add_option("--out", p.out, "rows CSV (default stdout)");
        s->add_option("--summary", p.summary, "summary JSON");
    }
    {
        auto* s = sub("isoperimetric", "small-mass isoperimetric profile", cmd_isoperimetric);
        s->add_option("--dim", p.dim, "dimension");
        s->add_option("--alpha", p.alpha, "fractional order");
        s->add_option("--eps", p.eps, "horizon (default 1)");
        s->add_option("--masses", p.masses, "ball masses")->delimiter(',');
        s->add_option("--cells-per-diameter", p.cells_per_diameter, "resolution of each ball");
        s->add_option("--out", p.out, "rows CSV (default stdout)");
        s->add_option("--summary", p.summary, "summary JSON");
    }
    {
        auto* s = sub("relaxation", "connecting lattice of small balls", cmd_relaxation);
        add_mask(s, p, false);
        add_kernel(s, p, false);
        s->add_option("--eps", p.eps, "horizon (default 0.25)");
        s->add_option("--alpha", p.alpha, "fractional order of the default kernel");
        s->add_option("--cells-per-half-eps", p.cells_per_half_eps, "lattice resolution");
        s->add_option("--n", p.n_list, "shrink factors")->delimiter(',');
        s->add_option("--min-radius-cells", p.min_radius_cells, "radius of the farthest ball at n = 1, in cells");
        s->add_option("--out", p.out, "rows CSV (default stdout)");
        s->add_option("--summary", p.summary, "summary JSON");
    }
    {
        auto* s = sub("minimize", "simulated annealing of the perimeter", cmd_minimize);
        s->add_option("--constraint", p.constraint, "mass=<value>: mass-constrained problem inside --omega");
        s->add_option("--omega", p.omega, "admissible region mask");
        s->add_option("--potential", p.potential, "potential CSV: unconstrained problem P(E) + int_E g");
        s->add_option("--spacing", p.h, "lattice spacing when the file does not carry one");
        s->add_option("--origin", p.origin, "lattice origin when the file does not carry one");
        add_kernel(s, p);
        s->add_option("--seed", p.seed, "random seed");
        s->add_option("--epochs", p.epochs, "maximum cooling epochs");
        s->add_option("--patience", p.patience, "epochs without improvement before quenching");
        s->add_option("--moves-per-cell", p.moves, "moves per epoch per set cell");
        s->add_option("--cooling", p.cooling, "temperature ratio per epoch");
        s->add_option("--t0", p.t0, "initial temperature (0 = from sampled moves)");
        s->add_option("--t0-scale", p.t0_scale, "factor on the sampled initial temperature");
        s->add_option("--quench-epochs", p.quench, "zero-temperature epochs");
        s->add_option("--audit-every", p.audit_every, "moves between full energy recomputations");
        s->add_option("--init", p.init, "square, ball or random initial set");
        s->add_option("--snapshot-every", p.snapshot_every, "write the set every N epochs (0 = never)");
        s->add_option("--snapshot-dir", p.snapshot_dir, "snapshot directory");
        s->add_option("--out", p.out, "final set");
        s->add_option("--history", p.history, "energy history CSV");
        s->add_option("--summary", p.summary, "summary JSON (default stdout)");
    }
    {
        auto* s = sub("selftest", "run the acceptance checks", cmd_selftest);
        s->add_flag("--quick", p.quick, "reduced problem sizes");
        s->add_option("--only", p.only, "criteria to run")->delimiter(',');
        s->add_option("--out", p.out, "table file");
    }

    std::vector<std::string> argv_s = {"nlperim"};
    argv_s.insert(argv_s.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& s : argv_s) argv.push_back(s.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return Ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return Ok;
    } catch (const CLI::ParseError& e) {
        if (command.empty()) {
            error_json(out, command, "usage", e.what(), Precondition);
            err << app.help();
            return Precondition;
        }
        error_json(out, command, "usage", e.what(), Precondition);
        err << "nlperim " << command << ": " << e.what() << "\n";
        return Precondition;
    }
    if (command.empty()) {
        out << app.help();
        return Precondition;
    }
    CLI::App* s = app.get_subcommand(command);

    try {
        set_worker_count(workers < 0 ? 0u : static_cast<unsigned>(workers));
        // validate every path before computing
        for (const auto* o : s->get_options()) {
            const std::string name = o->get_name();
            if (!o->count()) continue;
            if (kInputs.count(name)) {
                const std::string v = o->results().empty() ? "" : o->results().front();
                if (!(name == "--kernel" && is_json_literal(v))) check_input(v, name.c_str());
            } else if (kUnhashed.count(name) && name != "--workers" && name != "--snapshot-dir") {
                check_output(o->results().empty() ? "" : o->results().front());
            }
        }
        json cfg = {{"command", command}};
        for (const auto* o : s->get_options()) {
            const std::string name = o->get_name();
            if (name.empty() || kUnhashed.count(name)) continue;
            if (o->count()) {
                cfg["options"][name] = o->results();
                if (kInputs.count(name)) {
                    const std::string v = o->results().front();
                    cfg["inputs"][name] = io::hex64(io::fnv1a(is_json_literal(v) ? v : io::read_file(v)));
                }
            } else {
                cfg["options"][name] = o->get_default_str();
            }
        }
        c.hash = io::config_hash(cfg);
        return handlers.at(command)(c);
    } catch (const Error& e) {
        const int code = exit_for(e.kind());
        error_json(out, command, kind_name(e.kind()), e.what(), code);
        err << "nlperim " << command << ": " << e.what() << "\n";
        return code;
    } catch (const json::exception& e) {
        error_json(out, command, "precondition", e.what(), Precondition);
        err << "nlperim " << command << ": " << e.what() << "\n";
        return Precondition;
    } catch (const std::bad_alloc&) {
        error_json(out, command, "numeric", "out of memory", NumericFailure);
        err << "nlperim " << command << ": out of memory\n";
        return NumericFailure;
    } catch (const std::exception& e) {
        error_json(out, command, "internal", e.what(), NumericFailure);
        err << "nlperim " << command << ": " << e.what() << "\n";
        return NumericFailure;
    }
}

}  // namespace nlp::cli
