#include "nlperim/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>
#include <unistd.h>

#include "nlperim/errors.hpp"

namespace nlp::io {

namespace fs = std::filesystem;

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string config_hash(const json& config) { return hex64(fnv1a(config.dump())); }

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) fail(ErrorKind::Io, "error while reading " + path.string());
    return ss.str();
}

void write_atomic(const fs::path& path, const std::string& content) {
    const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
    std::error_code ec;
    if (!dir.empty()) fs::create_directories(dir, ec);
    const fs::path tmp = dir / ("." + path.filename().string() + ".tmp" + std::to_string(::getpid()));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail(ErrorKind::Io, "cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            fs::remove(tmp, ec);
            fail(ErrorKind::Io, "error while writing " + tmp.string());
        }
    }
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        fail(ErrorKind::Io, "cannot rename onto " + path.string());
    }
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

namespace {

double parse_double(const std::string& s, const std::string& what) {
    double v = 0;
    const char* b = s.data();
    const char* e = b + s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(*b))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(e[-1]))) --e;
    auto r = std::from_chars(b, e, v);
    if (r.ec != std::errc() || r.ptr != e) fail(ErrorKind::Io, "malformed number in " + what + ": '" + s + "'");
    return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream ss(s);
    while (std::getline(ss, cur, sep)) out.push_back(cur);
    return out;
}

// "key=value" pairs carried in comment lines
struct Meta {
    std::optional<double> h;
    std::optional<Point3> origin;
    bool complement = false;
};

void parse_meta(const std::string& comment, Meta& m) {
    std::istringstream ss(comment);
    std::string tok;
    while (ss >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        const std::string k = tok.substr(0, eq), v = tok.substr(eq + 1);
        if (k == "h") {
            m.h = parse_double(v, "header");
        } else if (k == "origin") {
            Point3 o{0, 0, 0};
            auto parts = split(v, ',');
            for (std::size_t a = 0; a < parts.size() && a < 3; ++a) o[a] = parse_double(parts[a], "header");
            m.origin = o;
        } else if (k == "complement") {
            m.complement = v == "1" || v == "true";
        }
    }
}

Lattice make_lattice(int dim, const Index3& n, const Meta& meta, const MaskGeometry& fb) {
    Lattice L;
    L.dim = dim;
    L.n = n;
    L.h = meta.h ? *meta.h : (fb.h ? *fb.h : 1.0 / 64.0);
    require(L.h > 0 && std::isfinite(L.h), ErrorKind::Precondition, "lattice spacing must be positive");
    if (meta.origin) {
        L.origin = *meta.origin;
    } else if (fb.origin) {
        L.origin = *fb.origin;
    } else {
        for (int a = 0; a < dim; ++a) L.origin[a] = -0.5 * n[a] * L.h;
    }
    for (int a = dim; a < 3; ++a) L.origin[a] = 0;
    return L;
}

std::string geometry_comment(const Lattice& L) {
    std::string s = "# h=" + format_double(L.h) + " origin=";
    for (int a = 0; a < L.dim; ++a) s += (a ? "," : "") + format_double(L.origin[a]);
    return s + "\n";
}

std::string pgm_header(const Lattice& L, const std::string& hash, bool complement) {
    std::string s = "P5\n# config_hash=" + hash + "\n" + geometry_comment(L);
    if (complement) s += "# complement=1\n";
    s += std::to_string(L.n[0]) + " " + std::to_string(L.n[1]) + "\n255\n";
    return s;
}

}  // namespace

// -- masks --------------------------------------------------------------------

std::string gray_pgm(const Lattice& L, const std::vector<std::uint8_t>& px, const std::string& hash) {
    require(L.dim == 2, ErrorKind::Precondition, "PGM output needs a 2D lattice");
    std::string s = pgm_header(L, hash, false);
    const std::size_t off = s.size();
    s.resize(off + L.size());
    for (int j = 0; j < L.n[1]; ++j)
        for (int i = 0; i < L.n[0]; ++i)
            s[off + static_cast<std::size_t>(L.n[1] - 1 - j) * L.n[0] + i] = static_cast<char>(px[L.linear(i, j, 0)]);
    return s;
}

std::string mask_to_pgm(const GridSet& set, const std::string& hash) {
    require(set.lat.dim == 2, ErrorKind::Precondition, "PGM masks are two-dimensional");
    std::vector<std::uint8_t> px(set.lat.size());
    for (std::size_t i = 0; i < px.size(); ++i) px[i] = set.occ[i] ? 255 : 0;
    std::string s = gray_pgm(set.lat, px, hash);
    if (set.complement) s.insert(s.find('\n') + 1, "# complement=1\n");
    return s;
}

GridSet mask_from_pgm(const std::string& bytes, const MaskGeometry& fb) {
    std::size_t pos = 0;
    Meta meta;
    auto skip = [&] {
        while (pos < bytes.size()) {
            if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
                ++pos;
            } else if (bytes[pos] == '#') {
                const std::size_t e = bytes.find('\n', pos);
                parse_meta(bytes.substr(pos + 1, (e == std::string::npos ? bytes.size() : e) - pos - 1), meta);
                pos = e == std::string::npos ? bytes.size() : e + 1;
            } else {
                break;
            }
        }
    };
    auto token = [&] {
        skip();
        const std::size_t b = pos;
        while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
        return bytes.substr(b, pos - b);
    };
    if (token() != "P5") fail(ErrorKind::Io, "not a binary PGM (P5)");
    const double w = parse_double(token(), "PGM header"), hgt = parse_double(token(), "PGM header"),
                 maxv = parse_double(token(), "PGM header");
    if (!(w >= 1 && hgt >= 1 && maxv >= 1 && maxv <= 255)) fail(ErrorKind::Io, "unsupported PGM header");
    ++pos;  // single whitespace before the raster
    const int W = static_cast<int>(w), H = static_cast<int>(hgt);
    if (bytes.size() < pos + static_cast<std::size_t>(W) * H) fail(ErrorKind::Io, "truncated PGM raster");
    Lattice L = make_lattice(2, {W, H, 1}, meta, fb);
    GridSet s(L);
    s.complement = meta.complement;
    const int thr = static_cast<int>(maxv) / 2;
    for (int r = 0; r < H; ++r)
        for (int i = 0; i < W; ++i) {
            const auto v = static_cast<unsigned char>(bytes[pos + static_cast<std::size_t>(r) * W + i]);
            s.occ[L.linear(i, H - 1 - r, 0)] = v > thr ? 1 : 0;
        }
    return s;
}

std::string mask_to_rle(const GridSet& set, const std::string& hash) {
    const Lattice& L = set.lat;
    require(L.dim == 1, ErrorKind::Precondition, "run-length masks are one-dimensional");
    std::string s = "# config_hash=" + hash + "\n" + geometry_comment(L);
    if (set.complement) s += "# complement=1\n";
    s += "n " + std::to_string(L.n[0]) + "\n";
    for (int i = 0; i < L.n[0];) {
        if (!set.occ[i]) {
            ++i;
            continue;
        }
        int j = i;
        while (j < L.n[0] && set.occ[j]) ++j;
        s += "run " + std::to_string(i) + " " + std::to_string(j - i) + "\n";
        i = j;
    }
    return s;
}

GridSet mask_from_rle(const std::string& text, const MaskGeometry& fb) {
    Meta meta;
    std::istringstream in(text);
    std::string line;
    long n = -1;
    std::vector<std::pair<long, long>> runs;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            parse_meta(line.substr(1), meta);
            continue;
        }
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "n") {
            ls >> n;
        } else if (key == "run") {
            long b = -1, len = -1;
            ls >> b >> len;
            if (!ls || b < 0 || len < 0) fail(ErrorKind::Io, "malformed run: " + line);
            runs.emplace_back(b, len);
        } else {
            fail(ErrorKind::Io, "unknown run-length record: " + line);
        }
    }
    if (n <= 0) fail(ErrorKind::Io, "run-length mask without a positive cell count");
    Lattice L = make_lattice(1, {static_cast<int>(n), 1, 1}, meta, fb);
    GridSet s(L);
    s.complement = meta.complement;
    for (auto [b, len] : runs) {
        if (b + len > n) fail(ErrorKind::Io, "run exceeds the cell count");
        for (long i = b; i < b + len; ++i) s.occ[i] = 1;
    }
    return s;
}

namespace {

fs::path sidecar(const fs::path& p) { return fs::path(p.string() + ".json"); }

GridSet read_raw(const fs::path& path, const MaskGeometry& fb) {
    const json meta = json::parse(read_file(sidecar(path)), nullptr, false);
    if (meta.is_discarded() || !meta.contains("n")) fail(ErrorKind::Io, "bad sidecar for " + path.string());
    Index3 n{1, 1, 1};
    for (int a = 0; a < 3; ++a) n[a] = meta["n"].at(a).get<int>();
    Meta m;
    if (meta.contains("h")) m.h = meta["h"].get<double>();
    if (meta.contains("origin")) {
        Point3 o{0, 0, 0};
        for (int a = 0; a < 3; ++a) o[a] = meta["origin"].at(a).get<double>();
        m.origin = o;
    }
    m.complement = meta.value("complement", false);
    const std::string bytes = read_file(path);
    Lattice L = make_lattice(3, n, m, fb);
    if (bytes.size() != L.size()) fail(ErrorKind::Io, "raw volume size does not match its sidecar");
    GridSet s(L);
    s.complement = m.complement;
    for (std::size_t i = 0; i < L.size(); ++i) s.occ[i] = static_cast<unsigned char>(bytes[i]) > 127 ? 1 : 0;
    return s;
}

std::string ext_of(const fs::path& p) {
    std::string e = p.extension().string();
    std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return e;
}

}  // namespace

GridSet read_mask(const fs::path& path, const MaskGeometry& fb) {
    const std::string e = ext_of(path);
    if (e == ".pgm") return mask_from_pgm(read_file(path), fb);
    if (e == ".raw") return read_raw(path, fb);
    if (e == ".txt" || e == ".rle") return mask_from_rle(read_file(path), fb);
    fail(ErrorKind::Io, "unrecognized mask format: " + path.string());
}

void write_mask(const fs::path& path, const GridSet& set, const std::string& hash) {
    const int d = set.lat.dim;
    if (d == 2) return write_atomic(path, mask_to_pgm(set, hash));
    if (d == 1) return write_atomic(path, mask_to_rle(set, hash));
    std::string bytes(set.lat.size(), '\0');
    for (std::size_t i = 0; i < bytes.size(); ++i) bytes[i] = set.occ[i] ? static_cast<char>(255) : '\0';
    json meta = {{"config_hash", hash},
                 {"n", {set.lat.n[0], set.lat.n[1], set.lat.n[2]}},
                 {"h", set.lat.h},
                 {"origin", {set.lat.origin[0], set.lat.origin[1], set.lat.origin[2]}},
                 {"complement", set.complement}};
    write_atomic(path, bytes);
    write_atomic(sidecar(path), meta.dump(2) + "\n");
}

std::string labels_pgm(const Lattice& L, const std::vector<int>& labels, std::size_t count, const std::string& hash) {
    require(count <= 255, ErrorKind::Precondition, "more than 255 components cannot be written as gray levels");
    std::vector<std::uint8_t> px(L.size(), 0);
    for (std::size_t i = 0; i < px.size(); ++i)
        if (labels[i] >= 0)
            px[i] = static_cast<std::uint8_t>(255 - (static_cast<std::size_t>(labels[i]) * 254) / std::max<std::size_t>(count, 1));
    return gray_pgm(L, px, hash);
}

std::string magnitude_pgm(const GridField& f, const std::string& hash) {
    const std::size_t n = f.lat.size();
    std::vector<double> mag(n, 0.0);
    double mx = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0;
        for (int c = 0; c < f.components; ++c) s += f.at(i, c) * f.at(i, c);
        mag[i] = std::sqrt(s);
        mx = std::max(mx, mag[i]);
    }
    std::vector<std::uint8_t> px(n, 0);
    if (mx > 0)
        for (std::size_t i = 0; i < n; ++i) px[i] = static_cast<std::uint8_t>(std::lround(255.0 * mag[i] / mx));
    return gray_pgm(f.lat, px, hash);
}

// -- fields -----------------------------------------------------------------

GridField field_from_csv(const std::string& text, const MaskGeometry& fb, int dim) {
    require(dim == 1 || dim == 2, ErrorKind::Precondition, "field CSV supports d = 1 or 2");
    Meta meta;
    std::vector<std::vector<double>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            parse_meta(line.substr(1), meta);
            continue;
        }
        std::vector<double> r;
        for (const auto& c : split(line, ',')) r.push_back(parse_double(c, "field CSV"));
        rows.push_back(std::move(r));
    }
    if (rows.empty()) fail(ErrorKind::Io, "empty field CSV");
    const std::size_t w = rows[0].size();
    for (const auto& r : rows)
        if (r.size() != w) fail(ErrorKind::Io, "ragged field CSV");
    if (dim == 1 && rows.size() != 1) fail(ErrorKind::Io, "a 1D field is a single row");
    const int W = static_cast<int>(w), H = static_cast<int>(rows.size());
    Lattice L = make_lattice(dim, {W, dim == 2 ? H : 1, 1}, meta, fb);
    GridField f(L, 1);
    for (int r = 0; r < H; ++r)
        for (int i = 0; i < W; ++i) f.data[L.linear(i, dim == 2 ? H - 1 - r : 0, 0)] = rows[r][i];
    return f;
}

GridField read_field(const fs::path& path, const MaskGeometry& fb, int dim) {
    return field_from_csv(read_file(path), fb, dim);
}

// -- tables -----------------------------------------------------------------

Csv::Csv(const std::string& hash, std::vector<std::string> columns) : ncols_(columns.size()) {
    text_ = "# config_hash=" + hash + "\n";
    for (std::size_t i = 0; i < columns.size(); ++i) text_ += (i ? "," : "") + columns[i];
    text_ += "\n";
}

Csv& Csv::row(const std::vector<double>& values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(format_double(v));
    return row(cells);
}

Csv& Csv::row(const std::vector<std::string>& cells) {
    require(cells.size() == ncols_, ErrorKind::Internal, "CSV row width mismatch");
    for (std::size_t i = 0; i < cells.size(); ++i) text_ += (i ? "," : "") + cells[i];
    text_ += "\n";
    return *this;
}

// -- kernels ----------------------------------------------------------------

namespace {

double number(const json& j, const char* key, double dflt) {
    if (!j.contains(key)) return dflt;
    const json& v = j[key];
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        if (s == "inf" || s == "infinity" || s == "Infinity") return INFINITY;
    }
    fail(ErrorKind::Precondition, std::string("kernel field '") + key + "' must be a number");
}

}  // namespace

KernelSpec kernel_from_json(const json& j, int default_dim) {
    require(j.is_object(), ErrorKind::Precondition, "kernel configuration must be a JSON object");
    const std::string fam = j.value("family", std::string("truncated_fractional"));
    const int d = static_cast<int>(number(j, "dim", default_dim));
    require(d >= 1 && d <= 3, ErrorKind::Precondition, "kernel dimension must be 1, 2 or 3");
    KernelSpec k = KernelSpec::fractional(d, 0.5);
    if (fam == "fractional") {
        k = KernelSpec::fractional(d, number(j, "alpha", 0.5));
    } else if (fam == "truncated_fractional") {
        k = KernelSpec::truncated_fractional(d, number(j, "alpha", 0.5), number(j, "eps", 1.0));
    } else if (fam == "bump") {
        k = KernelSpec::bump(d, number(j, "eps", 1.0), number(j, "a", 0.1), number(j, "s", 0.0));
    } else if (fam == "tabulated") {
        require(j.contains("radii") && j.contains("values"), ErrorKind::Precondition,
                "tabulated kernel needs 'radii' and 'values'");
        k = KernelSpec::tabulated(d, j["radii"].get<std::vector<double>>(), j["values"].get<std::vector<double>>());
    } else {
        fail(ErrorKind::Precondition, "unknown kernel family '" + fam + "'");
    }
    const double t = number(j, "rescale", 1.0);
    if (t != 1.0) k = rescale_kernel(k, t);
    const std::string norm = j.value("normalization", std::string("none"));
    if (norm == "unit_mass") {
        k = normalize_kernel(k, Normalization::UnitMass);
    } else if (norm == "mass_d") {
        k = normalize_kernel(k, Normalization::MassD);
    } else if (norm != "none") {
        fail(ErrorKind::Precondition, "unknown normalization '" + norm + "'");
    }
    HypothesisExponents hx = k.hypotheses();
    hx.sigma = number(j, "sigma", hx.sigma);
    hx.gamma = number(j, "gamma", hx.gamma);
    hx.nu = number(j, "nu", hx.nu);
    hx.eta = number(j, "eta", hx.eta);
    return k.with_hypotheses(hx);
}

json kernel_to_json(const KernelSpec& k) {
    json j;
    j["dim"] = k.dim();
    switch (k.family()) {
        case KernelFamily::Fractional: j["family"] = "fractional"; break;
        case KernelFamily::TruncatedFractional: j["family"] = "truncated_fractional"; break;
        case KernelFamily::Bump: j["family"] = "bump"; break;
        case KernelFamily::Tabulated: j["family"] = "tabulated"; break;
    }
    if (k.family() == KernelFamily::Fractional || k.family() == KernelFamily::TruncatedFractional)
        j["alpha"] = k.alpha();
    if (k.family() == KernelFamily::TruncatedFractional || k.family() == KernelFamily::Bump) {
        const double base = k.horizon() / k.length();
        if (std::isfinite(base)) {
            j["eps"] = base;
        } else {
            j["eps"] = "inf";
        }
    }
    if (k.family() == KernelFamily::Bump) {
        j["a"] = k.bump_a();
        j["s"] = k.bump_s();
    }
    if (k.family() == KernelFamily::Tabulated) {
        j["radii"] = k.table_radii();
        j["values"] = k.table_values();
    }
    if (k.length() != 1.0) j["rescale"] = k.length();
    switch (k.normalization()) {
        case Normalization::None: j["normalization"] = "none"; break;
        case Normalization::UnitMass: j["normalization"] = "unit_mass"; break;
        case Normalization::MassD: j["normalization"] = "mass_d"; break;
    }
    const auto& hx = k.hypotheses();
    j["sigma"] = hx.sigma;
    j["gamma"] = hx.gamma;
    j["nu"] = hx.nu;
    j["eta"] = hx.eta;
    return j;
}

KernelSpec read_kernel(const fs::path& path, int default_dim) {
    const json j = json::parse(read_file(path), nullptr, false);
    if (j.is_discarded()) fail(ErrorKind::Io, "kernel file is not valid JSON: " + path.string());
    return kernel_from_json(j, default_dim);
}

}  // namespace nlp::io
