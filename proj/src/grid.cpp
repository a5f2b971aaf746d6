#include "dnprobe/grid.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

namespace dnprobe {

namespace {

int as_steps(double total, double step, const char* what) {
    if (!(step > 0.0) || !(total > 0.0)) throw GeometryError(std::string(what) + ": step and extent must be positive");
    const double q = total / step;
    const long r = std::lround(q);
    if (r < 1 || std::abs(r * step - total) > 1e-12 * std::max(1.0, total))
        throw GeometryError(std::string(what) + ": step does not divide the extent");
    return static_cast<int>(r);
}

struct Rect {
    Vec lo{0, 0, 0};
    Vec hi{0, 0, 0};
};

double rect_distance(const Vec& p, const Rect& r, int dim) {
    double s = 0.0;
    for (int a = 0; a < dim; ++a) {
        const double c = std::clamp(p[a], r.lo[a], r.hi[a]);
        s += (p[a] - c) * (p[a] - c);
    }
    return std::sqrt(s);
}

// ∂Ω′ as a union of closed axis-aligned rectangles.
std::vector<Rect> outer_boundary(const Grid& g) {
    std::vector<Rect> out;
    const int n = g.dim;
    const double pad = g.pad_cells * g.h;
    std::vector<std::array<double, 2>> s;
    for (std::size_t k = 0; k < g.tangential.size(); ++k)
        s.push_back({g.patch_index[k][0] * g.h, g.patch_index[k][1] * g.h});

    for (int a = 0; a < n; ++a) {
        for (int side = 0; side < 2; ++side) {
            Rect f;
            for (int b = 0; b < n; ++b) { f.lo[b] = 0.0; f.hi[b] = 1.0; }
            f.lo[a] = f.hi[a] = side;
            if (a != g.axis || side != g.side) { out.push_back(f); continue; }
            // face carrying S: keep the part outside the open patch
            for (std::size_t k = 0; k < g.tangential.size(); ++k) {
                const int t = g.tangential[k];
                Rect lower = f, upper = f;
                lower.hi[t] = s[k][0];
                upper.lo[t] = s[k][1];
                for (std::size_t m = 0; m < k; ++m) {
                    lower.lo[g.tangential[m]] = upper.lo[g.tangential[m]] = s[m][0];
                    lower.hi[g.tangential[m]] = upper.hi[g.tangential[m]] = s[m][1];
                }
                out.push_back(lower);
                out.push_back(upper);
            }
        }
    }
    // slab behind S: far face and side faces
    const double near = g.side == 0 ? 0.0 : 1.0;
    const double far = g.side == 0 ? -pad : 1.0 + pad;
    Rect slab;
    slab.lo[g.axis] = std::min(near, far);
    slab.hi[g.axis] = std::max(near, far);
    for (std::size_t k = 0; k < g.tangential.size(); ++k) {
        slab.lo[g.tangential[k]] = s[k][0];
        slab.hi[g.tangential[k]] = s[k][1];
    }
    Rect farf = slab;
    farf.lo[g.axis] = farf.hi[g.axis] = far;
    out.push_back(farf);
    for (std::size_t k = 0; k < g.tangential.size(); ++k) {
        for (int e = 0; e < 2; ++e) {
            Rect side = slab;
            side.lo[g.tangential[k]] = side.hi[g.tangential[k]] = s[k][e];
            out.push_back(side);
        }
    }
    return out;
}

}  // namespace

Face parse_face(const std::string& name) {
    static const char* names[] = {"left", "right", "bottom", "top", "front", "back"};
    for (int i = 0; i < 6; ++i)
        if (name == names[i]) return static_cast<Face>(i);
    throw GeometryError("unknown face '" + name + "'");
}

std::string face_name(Face f) {
    static const char* names[] = {"left", "right", "bottom", "top", "front", "back"};
    return names[static_cast<int>(f)];
}

std::array<int, 3> Lattice::multi(std::size_t id) const {
    std::array<int, 3> m{0, 0, 0};
    m[0] = static_cast<int>(id % n[0]);
    id /= n[0];
    m[1] = static_cast<int>(id % n[1]);
    m[2] = static_cast<int>(id / n[1]);
    return m;
}

Vec Lattice::coord(const std::array<int, 3>& m) const {
    Vec x{0, 0, 0};
    for (int a = 0; a < dim; ++a) x[a] = origin[a] + m[a] * h;
    return x;
}

Vec Lattice::coord(std::size_t id) const { return coord(multi(id)); }

struct Grid::Cache {
    std::once_flag omega_once, prime_once, lists_once, weights_once;
    Lattice omega, prime;
    std::vector<std::size_t> interior, boundary, patch;
    std::vector<int> interior_pos, boundary_pos;
    std::vector<double> bweights, mass;
};

std::size_t Grid::num_nodes() const {
    std::size_t s = 1;
    for (int a = 0; a < dim; ++a) s *= static_cast<std::size_t>(cells + 1);
    return s;
}

std::array<int, 3> Grid::multi(std::size_t node) const {
    const std::size_t n = cells + 1;
    std::array<int, 3> m{0, 0, 0};
    m[0] = static_cast<int>(node % n);
    node /= n;
    if (dim > 1) m[1] = static_cast<int>(node % n);
    if (dim > 2) m[2] = static_cast<int>(node / n);
    return m;
}

std::size_t Grid::id(const std::array<int, 3>& m) const {
    const std::size_t n = cells + 1;
    return m[0] + n * (m[1] + (dim > 2 ? n * m[2] : 0));
}

Vec Grid::coord(std::size_t node) const {
    const auto m = multi(node);
    Vec x{0, 0, 0};
    for (int a = 0; a < dim; ++a) x[a] = m[a] * h;
    return x;
}

const Grid::Cache& Grid::topo() const { return *cache_; }

const Lattice& Grid::omega() const {
    std::call_once(cache_->omega_once, [this] {
        Lattice& L = cache_->omega;
        L.dim = dim;
        L.h = h;
        L.n = {1, 1, 1};
        for (int a = 0; a < dim; ++a) L.n[a] = cells + 1;
        L.state.assign(L.size(), 2);
        for (std::size_t i = 0; i < L.size(); ++i) {
            const auto m = L.multi(i);
            for (int a = 0; a < dim; ++a)
                if (m[a] == 0 || m[a] == cells) L.state[i] = 1;
        }
    });
    return cache_->omega;
}

const Lattice& Grid::omega_prime() const {
    std::call_once(cache_->prime_once, [this] {
        Lattice& L = cache_->prime;
        L.dim = dim;
        L.h = h;
        L.n = {1, 1, 1};
        for (int a = 0; a < dim; ++a) L.n[a] = cells + 1;
        L.n[axis] += pad_cells;
        if (side == 0) L.origin[axis] = -pad_cells * h;
        const int shift = side == 0 ? pad_cells : 0;
        L.state.assign(L.size(), 0);
        for (std::size_t i = 0; i < L.size(); ++i) {
            auto m = L.multi(i);
            m[axis] -= shift;  // now in Ω index coordinates along axis
            bool in_box = true, box_interior = true;
            for (int a = 0; a < dim; ++a) {
                if (m[a] < 0 || m[a] > cells) in_box = false;
                if (m[a] <= 0 || m[a] >= cells) box_interior = false;
            }
            bool tan_closed = true, tan_open = true;
            for (std::size_t k = 0; k < tangential.size(); ++k) {
                const int v = m[tangential[k]];
                if (v < patch_index[k][0] || v > patch_index[k][1]) tan_closed = false;
                if (v <= patch_index[k][0] || v >= patch_index[k][1]) tan_open = false;
            }
            const int ax = m[axis];
            const bool slab_range = side == 0 ? (ax >= -pad_cells && ax <= 0) : (ax >= cells && ax <= cells + pad_cells);
            const bool slab_open = side == 0 ? (ax > -pad_cells && ax <= 0) : (ax >= cells && ax < cells + pad_cells);
            const bool closed = in_box || (slab_range && tan_closed);
            const bool open = box_interior || (slab_open && tan_open);
            L.state[i] = open ? 2 : (closed ? 1 : 0);
        }
    });
    return cache_->prime;
}

std::size_t Grid::to_prime(std::size_t node) const {
    const Lattice& L = omega_prime();
    auto m = multi(node);
    if (side == 0) m[axis] += pad_cells;
    return L.id(m);
}

const std::vector<std::size_t>& Grid::interior() const {
    std::call_once(cache_->lists_once, [this] {
        const Lattice& L = omega();
        Cache& c = *cache_;
        c.interior_pos.assign(L.size(), -1);
        c.boundary_pos.assign(L.size(), -1);
        for (std::size_t i = 0; i < L.size(); ++i) {
            if (L.state[i] == 2) {
                c.interior_pos[i] = static_cast<int>(c.interior.size());
                c.interior.push_back(i);
            } else {
                c.boundary_pos[i] = static_cast<int>(c.boundary.size());
                c.boundary.push_back(i);
                const auto m = multi(i);
                if (m[axis] != (side == 0 ? 0 : cells)) continue;
                bool inside = true;
                for (std::size_t k = 0; k < tangential.size(); ++k) {
                    const int v = m[tangential[k]];
                    if (v <= patch_index[k][0] || v >= patch_index[k][1]) inside = false;
                }
                if (inside) c.patch.push_back(i);
            }
        }
    });
    return cache_->interior;
}

const std::vector<std::size_t>& Grid::boundary() const {
    interior();
    return cache_->boundary;
}
const std::vector<int>& Grid::interior_pos() const {
    interior();
    return cache_->interior_pos;
}
const std::vector<int>& Grid::boundary_pos() const {
    interior();
    return cache_->boundary_pos;
}
const std::vector<std::size_t>& Grid::patch_nodes() const {
    interior();
    return cache_->patch;
}

const std::vector<double>& Grid::boundary_weights() const {
    mass_weights();
    return cache_->bweights;
}

const std::vector<double>& Grid::mass_weights() const {
    interior();
    std::call_once(cache_->weights_once, [this] {
        Cache& c = *cache_;
        const std::size_t N = num_nodes();
        c.mass.assign(N, 0.0);
        c.bweights.assign(c.boundary.size(), 0.0);
        for (std::size_t i = 0; i < N; ++i) {
            const auto m = multi(i);
            double w = 1.0;
            std::array<double, 3> wa{1, 1, 1};
            for (int a = 0; a < dim; ++a) {
                wa[a] = (m[a] == 0 || m[a] == cells) ? 0.5 * h : h;
                w *= wa[a];
            }
            c.mass[i] = w;
            const int b = c.boundary_pos[i];
            if (b < 0) continue;
            double sw = 0.0;
            for (int a = 0; a < dim; ++a) {
                if (m[a] != 0 && m[a] != cells) continue;
                double f = 1.0;
                for (int t = 0; t < dim; ++t)
                    if (t != a) f *= wa[t];
                sw += f;
            }
            c.bweights[b] = sw;
        }
    });
    return cache_->mass;
}

bool Grid::in_patch(const Vec& x, double tol) const {
    const double face = side == 0 ? 0.0 : 1.0;
    if (std::abs(x[axis] - face) > tol) return false;
    for (std::size_t k = 0; k < tangential.size(); ++k) {
        const double v = x[tangential[k]];
        if (v <= patch_index[k][0] * h + tol || v >= patch_index[k][1] * h - tol) return false;
    }
    return true;
}

Grid build_grid(const GridConfig& cfg) {
    if (cfg.dim != 2 && cfg.dim != 3) throw GeometryError("dim must be 2 or 3");
    Grid g;
    g.dim = cfg.dim;
    g.cells = as_steps(1.0, cfg.h, "h");
    g.h = 1.0 / g.cells;
    g.steps = as_steps(cfg.T, cfg.dt, "dt");
    g.dt = cfg.dt;
    g.T = cfg.T;
    g.patch = cfg.patch;
    g.axis = face_axis(cfg.patch.face);
    g.side = face_side(cfg.patch.face);
    if (g.axis >= g.dim) throw GeometryError("patch face " + face_name(cfg.patch.face) + " does not exist for dim " + std::to_string(g.dim));
    for (int a = 0; a < g.dim; ++a)
        if (a != g.axis) g.tangential.push_back(a);

    auto intervals = cfg.patch.interval;
    if (intervals.empty()) intervals.push_back({g.h, 1.0 - g.h});
    if (intervals.size() == 1)
        while (intervals.size() < g.tangential.size()) intervals.push_back(intervals[0]);
    if (intervals.size() != g.tangential.size()) throw GeometryError("patch needs one interval per tangential axis");
    for (const auto& iv : intervals) {
        const double lo = iv[0] / g.h, hi = iv[1] / g.h;
        const long li = std::lround(lo), hi_i = std::lround(hi);
        if (std::abs(lo - li) > 1e-9 || std::abs(hi - hi_i) > 1e-9) throw GeometryError("patch interval ends must be grid nodes");
        if (hi_i - li < 2) throw GeometryError("patch must contain at least one face node");
        if (li < 1 || hi_i > g.cells - 1) throw GeometryError("patch touches a corner cell");
        g.patch_index.push_back({static_cast<int>(li), static_cast<int>(hi_i)});
    }
    g.patch.interval = intervals;

    const double pad = cfg.pad > 0.0 ? cfg.pad : 4.0 * g.h;
    const double pc = pad / g.h;
    g.pad_cells = static_cast<int>(std::lround(pc));
    if (std::abs(pc - g.pad_cells) > 1e-9) throw GeometryError("pad must be a multiple of h");
    if (g.pad_cells < 4) throw GeometryError("pad must be at least 4h");

    g.normal = {0, 0, 0};
    g.normal[g.axis] = g.side == 0 ? -1.0 : 1.0;
    g.cache_ = std::make_shared<Grid::Cache>();
    return g;
}

double distance_to_outer_boundary(const Grid& g, const Vec& p) {
    double d = 1e300;
    for (const Rect& r : outer_boundary(g)) d = std::min(d, rect_distance(p, r, g.dim));
    return d;
}

double admissibility_radius(const Grid& g, const Vec& x0) {
    if (!g.in_patch(x0)) throw GeometryError("x0 is not in the open patch S");
    const double pad = g.pad_cells * g.h;
    return std::min({distance_to_outer_boundary(g, x0), 0.5 * pad, 1.0});
}

ProbeGeometry exterior_point(const Grid& g, const Vec& x0, double tau) {
    ProbeGeometry p;
    p.x0 = x0;
    p.delta = admissibility_radius(g, x0);
    p.tau0 = p.delta;
    if (!(tau >= 2.0 * g.h * (1.0 - 1e-12))) throw GeometryError("tau below the resolution guard 2h");
    if (!(tau < p.delta)) throw GeometryError("tau must be below the admissibility radius delta");
    p.tau = tau;
    p.y = x0;
    for (int a = 0; a < g.dim; ++a) p.y[a] += tau * g.normal[a];
    return p;
}

}  // namespace dnprobe
