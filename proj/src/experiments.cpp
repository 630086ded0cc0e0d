#include "nlperim/experiments.hpp"
#include "nlperim/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "nlperim/distributional.hpp"
#include "nlperim/errors.hpp"
#include "pairs.hpp"

namespace nlp {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void finish(SweepReport& rep, Clock::time_point t0) {
    rep.monotone = error_decreasing(rep.rows);
    rep.seconds = seconds_since(t0);
}

}  // namespace

bool error_decreasing(const std::vector<SweepRow>& rows, std::size_t last) {
    if (rows.size() < 2) return false;
    const std::size_t start = rows.size() > last ? rows.size() - last : 0;
    for (std::size_t i = start + 1; i < rows.size(); ++i)
        if (!(rows[i].rel_error < rows[i - 1].rel_error)) return false;
    return true;
}

SweepReport sweep_localization(const ShapeDesc& shape, int dim, const KernelSpec& base,
                               const std::vector<double>& eps_list, LocalizationRoute route, double cells_per_eps) {
    require(std::abs(base.horizon() - 1.0) < 1e-12, ErrorKind::Precondition,
            "sweep_localization: base kernel must have horizon 1");
    require(base.dim() == dim, ErrorKind::Precondition, "sweep_localization: kernel dimension mismatch");
    auto per = analytic_perimeter(shape, dim);
    require(per.has_value(), ErrorKind::Precondition, "sweep_localization: shape needs an analytic perimeter");
    const auto t0 = Clock::now();
    SweepReport rep;
    const bool gag = route == LocalizationRoute::Gagliardo;
    rep.name = gag ? "localization_gagliardo" : "localization_distributional";
    rep.kernel = base.describe();
    const double reference = gag ? localization_constant(dim) * *per : *per;
    std::vector<double> eps_sorted = eps_list;
    std::sort(eps_sorted.begin(), eps_sorted.end(), std::greater<>());
    auto [lo, hi] = shape_bounds(shape, dim);
    for (double eps : eps_sorted) {
        require(eps > 0, ErrorKind::Domain, "sweep_localization: eps must be positive");
        const double h = eps / cells_per_eps;
        KernelSpec k = normalize_kernel(rescale_kernel(base, eps), gag ? Normalization::UnitMass : Normalization::MassD);
        Lattice L = Lattice::covering(dim, h, lo, hi, eps + 2 * h);
        GridSet set = make_shape(shape, L);
        SweepRow row;
        row.parameter = eps;
        row.h = h;
        row.reference = reference;
        row.reference_kind = "closed_form";
        row.reliable = h <= eps / 16.0 * (1 + 1e-12);
        if (gag) {
            auto r = gagliardo_perimeter(set, k);
            row.value = r.value;
            row.error = r.error;
        } else {
            auto r = caccioppoli_perimeter(set, k, false);
            row.value = r.value;
        }
        row.rel_error = std::abs(row.value - reference) / reference;
        rep.rows.push_back(row);
    }
    if (!rep.rows.empty()) rep.kernel = base.describe();
    finish(rep, t0);
    return rep;
}

SweepReport sweep_infinite_horizon(const ShapeDesc& shape, int dim, double alpha, const std::vector<double>& eps_list,
                                   double h) {
    auto [lo, hi] = shape_bounds(shape, dim);
    for (int a = 0; a < dim; ++a)
        require(std::isfinite(lo[a]) && std::isfinite(hi[a]), ErrorKind::Precondition,
                "sweep_infinite_horizon: shape must be bounded");
    const auto t0 = Clock::now();
    SweepReport rep;
    rep.name = "infinite_horizon";
    rep.kernel = "truncated_fractional(alpha=" + std::to_string(alpha) + ")";
    Lattice L = Lattice::covering(dim, h, lo, hi, 2 * h);
    GridSet set = make_shape(shape, L);
    const bool interval = dim == 1 && shape.kind == ShapeDesc::Kind::Box;
    const double len = interval ? shape.b[0] - shape.a[0] : 0.0;
    double reference;
    std::string kind;
    if (interval) {
        reference = 4 * std::pow(len, 1 - alpha) / (alpha * (1 - alpha));
        kind = "closed_form";
    } else {
        reference = gagliardo_perimeter(set, KernelSpec::truncated_fractional(dim, alpha, INFINITY)).value;
        kind = "oracle";
    }
    std::vector<double> eps_sorted = eps_list;
    std::sort(eps_sorted.begin(), eps_sorted.end());
    for (double eps : eps_sorted) {
        auto r = gagliardo_perimeter(set, KernelSpec::truncated_fractional(dim, alpha, eps));
        SweepRow row;
        row.parameter = eps;
        row.value = r.value;
        row.error = r.error;
        row.reference = reference;
        row.reference_kind = kind;
        row.h = h;
        row.rel_error = std::abs(r.value - reference) / reference;
        if (interval && eps >= len)
            row.check = 4 / alpha * (std::pow(len, 1 - alpha) / (1 - alpha) - len * std::pow(eps, -alpha));
        rep.rows.push_back(row);
    }
    finish(rep, t0);
    return rep;
}

SweepReport isoperimetric_profile(int dim, double alpha, double eps, const std::vector<double>& masses,
                                  int cells_per_diameter) {
    require(cells_per_diameter >= 2, ErrorKind::Domain, "isoperimetric_profile: too few cells per diameter");
    const auto t0 = Clock::now();
    SweepReport rep;
    rep.name = "isoperimetric_profile";
    KernelSpec k = KernelSpec::truncated_fractional(dim, alpha, eps);
    rep.kernel = k.describe();
    const double reference = 2 * profile_constant(dim, alpha);
    for (double m : masses) {
        require(m > 0, ErrorKind::Domain, "isoperimetric_profile: masses must be positive");
        const double r = std::pow(m / unit_ball_volume(dim), 1.0 / dim);
        const double h = 2 * r / cells_per_diameter;
        GridSet ball = rasterized_ball(dim, h, r, 2 * h);
        auto p = gagliardo_perimeter(ball, k);
        SweepRow row;
        row.parameter = m;
        row.value = p.value / std::pow(m, (dim - alpha) / dim);
        row.error = p.error / std::pow(m, (dim - alpha) / dim);
        row.reference = reference;
        row.reference_kind = "oracle";
        row.rel_error = std::abs(row.value - reference) / reference;
        row.h = h;
        row.check = r;
        row.reliable = cells_per_diameter >= 64;
        rep.rows.push_back(row);
    }
    finish(rep, t0);
    return rep;
}

// ---------------------------------------------------------------------------

double radius_for_perimeter(const KernelSpec& spec, double bound) {
    require(bound > 0, ErrorKind::Domain, "radius_for_perimeter: bound must be positive");
    double hi = 1e-6;
    while (ball_perimeter_continuum(spec, hi) <= bound) {
        hi *= 2;
        require(hi < 1e6, ErrorKind::Numeric, "radius_for_perimeter: perimeter bound never reached");
    }
    double lo = 0;
    for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (ball_perimeter_continuum(spec, mid) <= bound ? lo : hi) = mid;
    }
    return lo;
}

double relaxation_budget(const KernelSpec& spec, const Lattice& lat, double eps, double min_radius) {
    double amax2 = 0;
    for (int a = 0; a < lat.dim; ++a) {
        const double m = std::max(std::abs(lat.origin[a]), std::abs(lat.origin[a] + lat.n[a] * lat.h)) / (eps / 2);
        amax2 += std::floor(m) * std::floor(m);
    }
    return ball_perimeter_continuum(spec, min_radius) * (1 + std::pow(std::sqrt(amax2), lat.dim + 1));
}

Lattice relaxation_lattice(int dim, double eps, int cells_per_half_eps, const Point3& lo, const Point3& hi) {
    require(cells_per_half_eps >= 1, ErrorKind::Domain, "relaxation_lattice: resolution must be positive");
    Lattice L;
    L.dim = dim;
    L.h = eps / 2 / cells_per_half_eps;
    for (int a = 0; a < dim; ++a) {
        const double i0 = std::floor(lo[a] / L.h);
        L.origin[a] = (i0 - 0.5) * L.h;
        L.n[a] = static_cast<int>(std::ceil((hi[a] - L.origin[a]) / L.h));
    }
    return L;
}

RelaxationReport relaxation_demo(const GridSet& set, const KernelSpec& spec, double eps, const std::vector<int>& n_list,
                                 double budget, const QuadratureConfig& q) {
    require(eps > 0, ErrorKind::Domain, "relaxation_demo: eps must be positive");
    require(budget > 0, ErrorKind::Domain, "relaxation_demo: budget must be positive");
    require(!set.complement, ErrorKind::Precondition, "relaxation_demo: set must have finite measure");
    const Lattice& L = set.lat;
    const int d = L.dim;
    const double half = eps / 2;
    for (int a = 0; a < d; ++a) {
        const double t = (L.origin[a] + 0.5 * L.h) / L.h;
        require(std::abs(t - std::round(t)) < 1e-6 && std::abs(half / L.h - std::round(half / L.h)) < 1e-6,
                ErrorKind::Precondition, "relaxation_demo: eps/2 lattice points must be cell centers");
    }
    RelaxationReport rep;
    rep.eps = eps;
    rep.base_perimeter = gagliardo_perimeter(set, spec, q).value;
    rep.base_components = epsilon_components(set, eps, false).size();

    int M = 0;
    for (int a = 0; a < d; ++a)
        M = std::max({M, static_cast<int>(std::ceil(std::abs(L.origin[a]) / half)),
                      static_cast<int>(std::ceil(std::abs(L.origin[a] + L.n[a] * L.h) / half))});
    std::map<long, double> radius_by_norm;
    auto r_of = [&](const Index3& a) {
        long n2 = 0;
        for (int i = 0; i < d; ++i) n2 += long(a[i]) * a[i];
        auto it = radius_by_norm.find(n2);
        if (it != radius_by_norm.end()) return it->second;
        const double bound = budget / (1 + std::pow(std::sqrt(double(n2)), d + 1));
        return radius_by_norm[n2] = std::min(radius_for_perimeter(spec, bound), eps / 8);
    };
    // radii of balls centred inside the window
    double rmin = INFINITY, sum_vol = 0;
    const int M1 = d > 1 ? M : 0, M2 = d > 2 ? M : 0;
    for (int a2 = -M2; a2 <= M2; ++a2)
        for (int a1 = -M1; a1 <= M1; ++a1)
            for (int a0 = -M; a0 <= M; ++a0) {
                Index3 a{a0, a1, a2};
                const double r = r_of(a);
                rep.radii.push_back(r);
                bool inside = true;
                for (int i = 0; i < d; ++i) {
                    const double c = a[i] * half;
                    inside = inside && c > L.origin[i] && c < L.origin[i] + L.n[i] * L.h;
                }
                if (inside) {
                    rmin = std::min(rmin, r);
                    sum_vol += unit_ball_volume(d) * std::pow(r, d);
                }
            }

    std::vector<int> ns = n_list;
    std::sort(ns.begin(), ns.end());
    for (int n : ns) {
        require(n >= 1, ErrorKind::Domain, "relaxation_demo: n must be positive");
        if (rmin / n < 1.5 * L.h) break;
        auto shape = ShapeDesc::lattice_balls(half, M, [&](const Index3& a) { return r_of(a) / n; });
        GridSet F = make_shape(shape, L);
        GridSet EF = set_union(set, F);
        RelaxationRow row;
        row.n = n;
        row.measure = measure(F);
        row.perimeter = gagliardo_perimeter(F, spec, q).value;
        row.increment = gagliardo_perimeter(EF, spec, q).value - rep.base_perimeter;
        row.components = epsilon_components(EF, eps, false).size();
        row.scaling = row.measure / (sum_vol * std::pow(double(n), -d));
        rep.rows.push_back(row);
        rep.last_resolved = n;
    }
    rep.single_component = !rep.rows.empty();
    rep.decreasing = rep.rows.size() >= 2;
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
        rep.single_component = rep.single_component && rep.rows[i].components == 1;
        if (i > 0)
            rep.decreasing = rep.decreasing && rep.rows[i].measure < rep.rows[i - 1].measure &&
                             rep.rows[i].perimeter < rep.rows[i - 1].perimeter;
    }
    return rep;
}

// ---------------------------------------------------------------------------

namespace {

// Pair-sum energy with incremental flips on a lattice padded by the stencil radius.
class Annealer {
public:
    Annealer(const Lattice& L, const KernelSpec& spec) : inner_(L) {
        require(spec.finite_horizon(), ErrorKind::Unsupported, "annealing needs a finite-horizon kernel");
        auto st = detail::full_stencil(spec, L.dim, L.h, spec.horizon(), 1);
        int rc = 1;
        for (const auto& o : st)
            for (int a = 0; a < 3; ++a) rc = std::max(rc, std::abs(o.k[a]));
        pad_ = rc + 1;
        P_ = L;
        for (int a = 0; a < L.dim; ++a) {
            P_.n[a] = L.n[a] + 2 * pad_;
            P_.origin[a] = L.origin[a] - pad_ * L.h;
        }
        occ_.assign(P_.size(), 0);
        allowed_.assign(P_.size(), 0);
        for (const auto& o : st) {
            off_.push_back(static_cast<long>(P_.linear(o.k[0] + pad_, o.k[1] + (L.dim > 1 ? pad_ : 0),
                                                       o.k[2] + (L.dim > 2 ? pad_ : 0))) -
                           static_cast<long>(P_.linear(pad_, L.dim > 1 ? pad_ : 0, L.dim > 2 ? pad_ : 0)));
            w_.push_back(o.w);
            wtot_ += o.w;
        }
        for (int a = 0; a < L.dim; ++a) {
            Index3 e{0, 0, 0};
            e[a] = 1;
            nbr_.push_back(static_cast<long>(P_.linear(e)));
            nbr_.push_back(-static_cast<long>(P_.linear(e)));
        }
        pos_in_.assign(P_.size(), -1);
        pos_out_.assign(P_.size(), -1);
    }

    std::size_t to_padded(std::size_t i) const {
        Index3 c = inner_.unravel(i);
        for (int a = 0; a < inner_.dim; ++a) c[a] += pad_;
        return P_.linear(c);
    }
    std::size_t to_inner(std::size_t p) const {
        Index3 c = P_.unravel(p);
        for (int a = 0; a < inner_.dim; ++a) c[a] -= pad_;
        return inner_.linear(c);
    }

    std::size_t padded_size() const { return P_.size(); }
    void allow(std::size_t inner_idx) { allowed_[to_padded(inner_idx)] = 1; }
    void set_potential(std::vector<double> g) { pot_ = std::move(g); }

    void init(const GridSet& s) {
        for (std::size_t i = 0; i < inner_.size(); ++i) occ_[to_padded(i)] = s.occ[i];
        count_ = s.count();
        front_in_.clear();
        front_out_.clear();
        std::fill(pos_in_.begin(), pos_in_.end(), -1);
        std::fill(pos_out_.begin(), pos_out_.end(), -1);
        for (std::size_t p = 0; p < P_.size(); ++p) refresh(p);
    }

    double neighbour_sum(std::size_t p) const {
        double s = 0;
        for (std::size_t j = 0; j < off_.size(); ++j) s += w_[j] * occ_[p + off_[j]];
        return s;
    }
    double potential(std::size_t p) const { return pot_.empty() ? 0.0 : pot_[p]; }

    double delta_add(std::size_t p) const { return 2 * wtot_ - 4 * neighbour_sum(p) + potential(p); }
    double delta_remove(std::size_t p) const { return -2 * wtot_ + 4 * neighbour_sum(p) - potential(p); }

    void flip(std::size_t p) {
        occ_[p] ^= 1;
        count_ += occ_[p] ? 1 : -1;
        refresh(p);
        for (long o : nbr_) refresh(p + o);
    }
    void flip_silent(std::size_t p) { occ_[p] ^= 1; }

    double energy() const {
        const std::size_t chunk = 4096;
        std::vector<double> part(chunk_count(P_.size(), chunk), 0.0);
        parallel_chunks(P_.size(), chunk, [&](std::size_t c, std::size_t b, std::size_t e) {
            double s = 0;
            for (std::size_t p = b; p < e; ++p)
                if (occ_[p]) s += 2 * (wtot_ - neighbour_sum(p)) + potential(p);
            part[c] = s;
        });
        double e = 0;
        for (double v : part) e += v;
        return e;
    }

    GridSet current() const {
        GridSet s(inner_);
        for (std::size_t i = 0; i < inner_.size(); ++i) s.occ[i] = occ_[to_padded(i)];
        return s;
    }

    std::size_t count() const { return count_; }
    std::size_t popcount() const { return static_cast<std::size_t>(std::count(occ_.begin(), occ_.end(), 1)); }
    const std::vector<std::size_t>& front_in() const { return front_in_; }
    const std::vector<std::size_t>& front_out() const { return front_out_; }

private:
    bool on_border(std::size_t p) const {
        const Index3 c = P_.unravel(p);
        for (int a = 0; a < inner_.dim; ++a)
            if (c[a] < 1 || c[a] >= P_.n[a] - 1) return true;
        return false;
    }
    void refresh(std::size_t p) {
        if (on_border(p)) return;
        bool in = false, out = false;
        if (occ_[p]) {
            for (long o : nbr_) in = in || !occ_[p + o];
        } else if (allowed_[p]) {
            for (long o : nbr_) out = out || occ_[p + o];
        }
        update(front_in_, pos_in_, p, in);
        update(front_out_, pos_out_, p, out);
    }
    static void update(std::vector<std::size_t>& list, std::vector<long>& pos, std::size_t p, bool want) {
        if (want && pos[p] < 0) {
            pos[p] = static_cast<long>(list.size());
            list.push_back(p);
        } else if (!want && pos[p] >= 0) {
            const std::size_t last = list.back();
            list[pos[p]] = last;
            pos[last] = pos[p];
            list.pop_back();
            pos[p] = -1;
        }
    }

    Lattice inner_, P_;
    int pad_ = 1;
    std::vector<std::uint8_t> occ_, allowed_;
    std::vector<long> off_, nbr_;
    std::vector<double> w_;
    double wtot_ = 0;
    std::vector<double> pot_;
    std::size_t count_ = 0;
    std::vector<std::size_t> front_in_, front_out_;
    std::vector<long> pos_in_, pos_out_;
};

struct Move {
    std::size_t a = 0, b = 0;  // paired: a removed, b added; single: a flipped
    double delta = 0;
};

template <class Propose, class Apply, class Undo>
void run_schedule(Annealer& an, AnnealState& st, std::vector<AnnealEpoch>& hist, const AnnealConfig& cfg,
                  std::mt19937_64& rng, std::size_t expected_mass, bool mass_fixed, Propose&& propose, Apply&& apply,
                  Undo&& undo) {
    require(cfg.max_epochs > 0 && cfg.moves_per_cell > 0, ErrorKind::Precondition,
            "annealing configuration has zero iterations");
    std::uniform_real_distribution<double> U(0.0, 1.0);
    // initial temperature from the median |dE| of random proposals
    double T = cfg.t0;
    if (T <= 0) {
        std::vector<double> ds;
        for (int i = 0; i < 1000; ++i) {
            Move m;
            if (!propose(m)) break;
            ds.push_back(std::abs(m.delta));
            undo(m);
        }
        if (!ds.empty()) {
            std::nth_element(ds.begin(), ds.begin() + ds.size() / 2, ds.end());
            T = cfg.t0_scale * ds[ds.size() / 2];
        }
        if (!(T > 0)) T = 1e-12;
    }
    double best_mean = INFINITY;
    int stale = 0;
    std::size_t since_audit = 0;
    const int total = cfg.max_epochs + std::max(0, cfg.quench_epochs);
    bool cooling_done = false;
    for (int ep = 0; ep < total; ++ep) {
        const bool quench = cooling_done || ep >= cfg.max_epochs;
        if (quench && !cooling_done) cooling_done = true;
        const double temp = quench ? 0.0 : T;
        const std::size_t moves = static_cast<std::size_t>(
            cfg.moves_per_cell * static_cast<double>(std::max<std::size_t>(an.count(), 64)));
        double sum_e = 0;
        std::size_t acc = 0, prop = 0;
        for (std::size_t mv = 0; mv < moves; ++mv) {
            Move m;
            if (!propose(m)) break;
            ++prop;
            const bool ok = m.delta < 0 || (temp > 0 && U(rng) < std::exp(-m.delta / temp));
            if (ok) {
                apply(m);
                st.energy += m.delta;
                ++acc;
            } else {
                undo(m);
            }
            sum_e += st.energy;
            if (++since_audit >= cfg.audit_every) {
                since_audit = 0;
                const double full = an.energy();
                const double drift = std::abs(full - st.energy) / std::max(1.0, std::abs(full));
                st.max_audit_drift = std::max(st.max_audit_drift, drift);
                ++st.audits;
                if (drift > 1e-9) fail(ErrorKind::Numeric, "annealing: incremental energy drifted from recomputation");
            }
        }
        st.iteration += prop;
        st.accepted += acc;
        st.proposed += prop;
        if (mass_fixed && an.popcount() != expected_mass) fail(ErrorKind::Internal, "annealing: mass constraint broken");
        AnnealEpoch e;
        e.epoch = ep;
        e.temperature = temp;
        e.energy = st.energy;
        e.mean_energy = prop ? sum_e / prop : st.energy;
        e.acceptance = prop ? double(acc) / prop : 0.0;
        e.mass_cells = an.count();
        hist.push_back(e);
        st.temperature = temp;
        if (cfg.on_epoch) cfg.on_epoch(ep, an.current());
        if (prop == 0) break;
        if (!quench) {
            if (hist.size() == 1 || e.mean_energy < best_mean - 1e-12 * std::abs(best_mean)) {
                best_mean = e.mean_energy;
                stale = 0;
            } else if (++stale >= cfg.patience) {
                cooling_done = true;
            }
            T *= cfg.cooling;
        }
        if (quench && ep >= cfg.max_epochs + cfg.quench_epochs - 1) break;
        if (quench && acc == 0) break;
    }
}

std::vector<std::size_t> ordered_cells(const GridSet& omega, const Point3& c, AnnealInit init, std::mt19937_64& rng) {
    const Lattice& L = omega.lat;
    std::vector<std::size_t> cells;
    for (std::size_t i = 0; i < L.size(); ++i)
        if (omega.contains(i)) cells.push_back(i);
    if (init == AnnealInit::Random) {
        std::shuffle(cells.begin(), cells.end(), rng);
        return cells;
    }
    auto key = [&](std::size_t i) {
        Point3 p = L.center(i);
        double k = 0;
        for (int a = 0; a < L.dim; ++a) {
            const double z = std::abs(p[a] - c[a]);
            k = init == AnnealInit::Ball ? k + z * z : std::max(k, z);
        }
        return k;
    };
    std::stable_sort(cells.begin(), cells.end(), [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
    return cells;
}

}  // namespace

double anneal_energy(const GridSet& set, const KernelSpec& spec) {
    Annealer an(set.lat, spec);
    an.init(set);
    return an.energy();
}

ConstrainedResult minimize_constrained(const GridSet& omega, double mass, const KernelSpec& spec, const AnnealConfig& cfg) {
    require(!omega.complement, ErrorKind::Precondition, "minimize_constrained: omega must be bounded");
    const Lattice& L = omega.lat;
    const double cv = L.cell_volume();
    const double om = measure(omega);
    require(mass > 0 && mass < om, ErrorKind::Precondition, "minimize_constrained: need 0 < m < |omega|");
    const std::size_t target = static_cast<std::size_t>(std::llround(mass / cv));
    require(target > 0, ErrorKind::Precondition, "minimize_constrained: mass below one cell");

    std::mt19937_64 rng(cfg.seed);
    Point3 mid{0, 0, 0};
    {
        double n = 0;
        for (std::size_t i = 0; i < L.size(); ++i)
            if (omega.contains(i)) {
                Point3 p = L.center(i);
                for (int a = 0; a < 3; ++a) mid[a] += p[a];
                n += 1;
            }
        for (auto& v : mid) v /= n;
    }
    auto order = ordered_cells(omega, mid, cfg.init, rng);
    GridSet start(L);
    for (std::size_t i = 0; i < target; ++i) start.occ[order[i]] = 1;

    Annealer an(L, spec);
    for (std::size_t i = 0; i < L.size(); ++i)
        if (omega.contains(i)) an.allow(i);
    an.init(start);

    ConstrainedResult res;
    res.state.seed = cfg.seed;
    res.state.energy = an.energy();
    auto pick = [&](const std::vector<std::size_t>& v) {
        std::uniform_int_distribution<std::size_t> D(0, v.size() - 1);
        return v[D(rng)];
    };
    auto propose = [&](Move& m) {
        if (an.front_in().empty() || an.front_out().empty()) return false;
        m.a = pick(an.front_in());
        m.b = pick(an.front_out());
        m.delta = an.delta_remove(m.a);
        an.flip_silent(m.a);
        m.delta += an.delta_add(m.b);
        an.flip_silent(m.a);
        return true;
    };
    auto apply = [&](const Move& m) {
        an.flip(m.a);
        an.flip(m.b);
    };
    auto undo = [&](const Move&) {};
    run_schedule(an, res.state, res.history, cfg, rng, target, true, propose, apply, undo);

    res.state.set = an.current();
    const GridSet& E = res.state.set;
    auto p = gagliardo_perimeter(E, spec);
    res.perimeter = p.value;
    res.perimeter_error = p.error;
    const double m_eff = target * cv;
    res.radius = std::pow(m_eff / unit_ball_volume(L.dim), 1.0 / L.dim);
    res.ball_perimeter = ball_perimeter_continuum(spec, res.radius);
    Point3 c{0, 0, 0};
    for (std::size_t i = 0; i < L.size(); ++i)
        if (E.occ[i]) {
            Point3 x = L.center(i);
            for (int a = 0; a < 3; ++a) c[a] += x[a];
        }
    for (auto& v : c) v /= static_cast<double>(target);
    res.centroid = c;
    std::size_t diff = 0;
    for (std::size_t i = 0; i < L.size(); ++i) {
        Point3 x = L.center(i);
        double r2 = 0;
        for (int a = 0; a < L.dim; ++a) r2 += (x[a] - c[a]) * (x[a] - c[a]);
        const bool in_ball = r2 < res.radius * res.radius;
        diff += in_ball != (E.occ[i] != 0);
    }
    res.sym_diff = diff * cv;
    res.sym_diff_rel = res.sym_diff / m_eff;
    return res;
}

PotentialResult minimize_potential(const GridField& g, const KernelSpec& spec, const AnnealConfig& cfg) {
    require(g.components == 1, ErrorKind::Precondition, "minimize_potential: scalar potential expected");
    const Lattice& L = g.lat;
    const double cv = L.cell_volume();
    std::mt19937_64 rng(cfg.seed);
    Annealer an(L, spec);
    GridSet start(L);
    for (std::size_t i = 0; i < L.size(); ++i) {
        an.allow(i);
        if (g.data[i] < 0) start.occ[i] = 1;
    }
    std::vector<double> padded(an.padded_size(), 0.0);
    for (std::size_t i = 0; i < L.size(); ++i) padded[an.to_padded(i)] = g.data[i] * cv;
    an.set_potential(std::move(padded));
    an.init(start);
    PotentialResult res;
    res.state.seed = cfg.seed;
    res.state.energy = an.energy();
    auto propose = [&](Move& m) {
        const std::size_t ni = an.front_in().size(), no = an.front_out().size();
        if (ni + no == 0) return false;
        std::uniform_int_distribution<std::size_t> D(0, ni + no - 1);
        const std::size_t k = D(rng);
        m.a = k < ni ? an.front_in()[k] : an.front_out()[k - ni];
        m.delta = k < ni ? an.delta_remove(m.a) : an.delta_add(m.a);
        return true;
    };
    auto apply = [&](const Move& m) { an.flip(m.a); };
    auto undo = [&](const Move&) {};
    run_schedule(an, res.state, res.history, cfg, rng, 0, false, propose, apply, undo);
    res.state.set = an.current();
    const GridSet& E = res.state.set;
    res.components = epsilon_components(E, spec.horizon(), false);
    res.smallest_mass = res.components.size() ? INFINITY : 0.0;
    for (std::size_t i = 0; i < res.components.size(); ++i) {
        GridSet Ei = res.components.component_set(L, i);
        double gi = 0;
        for (std::size_t c = 0; c < L.size(); ++c)
            if (Ei.occ[c]) gi += g.data[c] * cv;
        const double mi = res.components.components[i].measure;
        res.component_masses.push_back(mi);
        res.removal.push_back(gagliardo_perimeter(Ei, spec).value + gi);
        res.smallest_mass = std::min(res.smallest_mass, mi);
    }
    return res;
}

}  // namespace nlp
