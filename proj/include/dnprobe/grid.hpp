#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace dnprobe {

using Vec = std::array<double, 3>;

struct GeometryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Faces of the unit box. left/right are x0 = 0/1, bottom/top x1, front/back x2.
enum class Face { left, right, bottom, top, front, back };

Face parse_face(const std::string& name);
std::string face_name(Face f);
inline int face_axis(Face f) { return static_cast<int>(f) / 2; }
inline int face_side(Face f) { return static_cast<int>(f) % 2; }

/// Boundary patch S: one face and an open interval per tangential axis.
struct Patch {
    Face face = Face::left;
    std::vector<std::array<double, 2>> interval;  // ascending tangential axis order
};

struct GridConfig {
    int dim = 2;
    double h = 1.0 / 32;
    double dt = 1.0 / 64;
    double T = 1.0;
    Patch patch;
    double pad = 0.0;  // width of the Ω′ extension beyond S; 0 means 4h
};

/// Structured node lattice with a per-node state. State 0 means the node is
/// not part of the domain closure, 1 a Dirichlet node, 2 an unknown.
struct Lattice {
    int dim = 2;
    double h = 0.0;
    std::array<int, 3> n{1, 1, 1};
    Vec origin{0, 0, 0};
    std::vector<unsigned char> state;

    std::size_t size() const { return static_cast<std::size_t>(n[0]) * n[1] * n[2]; }
    std::size_t id(int i, int j, int k) const {
        return static_cast<std::size_t>(i) + static_cast<std::size_t>(n[0]) * (j + static_cast<std::size_t>(n[1]) * k);
    }
    std::size_t id(const std::array<int, 3>& m) const { return id(m[0], m[1], m[2]); }
    std::array<int, 3> multi(std::size_t id) const;
    Vec coord(std::size_t id) const;
    Vec coord(const std::array<int, 3>& m) const;
};

class Grid {
public:
    int dim = 2;
    int cells = 0;  // cells per axis of Ω
    double h = 0.0;
    double dt = 0.0;
    double T = 0.0;
    int steps = 0;  // time levels are 0..steps
    Patch patch;
    int axis = 0;   // axis normal to the face carrying S
    int side = 0;   // 0 low face, 1 high face
    int pad_cells = 4;
    std::vector<std::array<int, 2>> patch_index;  // open index interval per tangential axis
    std::vector<int> tangential;                  // tangential axes, ascending
    Vec normal{0, 0, 0};

    double time(int level) const { return level * dt; }
    int nodes_per_axis() const { return cells + 1; }
    std::size_t num_nodes() const;

    std::array<int, 3> multi(std::size_t node) const;
    std::size_t id(const std::array<int, 3>& m) const;
    Vec coord(std::size_t node) const;

    /// Ω̄ lattice (state 1 on ∂Ω, 2 inside). Built lazily; large grids used
    /// only for quadrature never allocate it.
    const Lattice& omega() const;
    /// Ω̄′ lattice: Ω̄ plus a slab of width pad behind S.
    const Lattice& omega_prime() const;
    std::size_t to_prime(std::size_t node) const;

    const std::vector<std::size_t>& interior() const;
    const std::vector<std::size_t>& boundary() const;
    /// position in interior()/boundary(), or -1
    const std::vector<int>& interior_pos() const;
    const std::vector<int>& boundary_pos() const;
    /// Ω̄ nodes lying in the open patch S, ascending.
    const std::vector<std::size_t>& patch_nodes() const;
    /// trapezoid weight of a boundary node on ∂Ω (summed over the faces it lies on)
    const std::vector<double>& boundary_weights() const;
    /// lumped trapezoid mass of each Ω̄ node
    const std::vector<double>& mass_weights() const;

    bool in_patch(const Vec& x, double tol = 1e-12) const;

private:
    struct Cache;
    std::shared_ptr<Cache> cache_;
    friend Grid build_grid(const GridConfig&);
    const Cache& topo() const;
};

Grid build_grid(const GridConfig& cfg);

struct ProbeGeometry {
    Vec x0{0, 0, 0};
    double t0 = 0.0;
    double tau = 0.0;
    Vec y{0, 0, 0};
    double delta = 0.0;
    double tau0 = 0.0;
};

/// δ for a point of S: min(dist(x0, ∂Ω′), pad/2, 1). The pad/2 cap keeps
/// dist(y_τ, ∂Ω′) ≥ δ for every τ < δ on the slab construction.
double admissibility_radius(const Grid& g, const Vec& x0);

/// dist(p, ∂Ω′) for p in Ω̄′ (closed form for the box-plus-slab domain).
double distance_to_outer_boundary(const Grid& g, const Vec& p);

ProbeGeometry exterior_point(const Grid& g, const Vec& x0, double tau);

}  // namespace dnprobe
