#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dnprobe/grid.hpp"

namespace dnprobe {

enum class FieldKind { forward, linearized, adjoint, corrector, other };
std::string field_kind_name(FieldKind k);

/// Scalar field on Ω̄-nodes × time levels, time-outer.
struct SpaceTimeField {
    FieldKind kind = FieldKind::other;
    int levels = 0;
    std::size_t nodes = 0;
    std::vector<double> values;

    SpaceTimeField() = default;
    SpaceTimeField(const Grid& g, FieldKind k);

    std::span<double> level(int n) { return {values.data() + n * nodes, nodes}; }
    std::span<const double> level(int n) const { return {values.data() + n * nodes, nodes}; }
    double& at(int n, std::size_t node) { return values[n * nodes + node]; }
    double at(int n, std::size_t node) const { return values[n * nodes + node]; }
};

/// Dirichlet data on the ∂Ω nodes (Grid::boundary() order) × time levels.
struct BoundaryField {
    int levels = 0;
    std::size_t count = 0;
    std::vector<double> values;
    std::vector<unsigned char> support;  // 1 on S

    BoundaryField() = default;
    explicit BoundaryField(const Grid& g);

    std::span<double> level(int n) { return {values.data() + n * count, count}; }
    std::span<const double> level(int n) const { return {values.data() + n * count, count}; }
    double& at(int n, std::size_t b) { return values[n * count + b]; }
    double at(int n, std::size_t b) const { return values[n * count + b]; }

    double max_abs() const;
    /// largest |value| outside the support mask
    double leakage() const;
    BoundaryField& operator+=(const BoundaryField& o);
    BoundaryField& operator*=(double c);
};

BoundaryField operator+(BoundaryField a, const BoundaryField& b);
BoundaryField operator*(double c, BoundaryField a);

/// Space-time product data g(x,t) = q(t) p(x) on the patch.
template <class Fx, class Ft>
BoundaryField separable_data(const Grid& g, Fx&& space, Ft&& time) {
    BoundaryField f(g);
    const auto& bpos = g.boundary_pos();
    for (int n = 0; n <= g.steps; ++n) {
        const double q = time(g.time(n));
        for (std::size_t node : g.patch_nodes()) f.at(n, bpos[node]) = q * space(g.coord(node));
    }
    return f;
}

}  // namespace dnprobe
