#include "dnprobe/fields.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dnprobe {

std::string field_kind_name(FieldKind k) {
    switch (k) {
        case FieldKind::forward: return "forward";
        case FieldKind::linearized: return "linearized";
        case FieldKind::adjoint: return "adjoint";
        case FieldKind::corrector: return "corrector";
        case FieldKind::other: return "other";
    }
    return "other";
}

SpaceTimeField::SpaceTimeField(const Grid& g, FieldKind k)
    : kind(k), levels(g.steps + 1), nodes(g.num_nodes()), values(static_cast<std::size_t>(levels) * nodes, 0.0) {}

BoundaryField::BoundaryField(const Grid& g)
    : levels(g.steps + 1), count(g.boundary().size()), values(static_cast<std::size_t>(levels) * count, 0.0),
      support(count, 0) {
    const auto& bpos = g.boundary_pos();
    for (std::size_t node : g.patch_nodes()) support[bpos[node]] = 1;
}

double BoundaryField::max_abs() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

double BoundaryField::leakage() const {
    double m = 0.0;
    for (int n = 0; n < levels; ++n)
        for (std::size_t b = 0; b < count; ++b)
            if (!support[b]) m = std::max(m, std::abs(at(n, b)));
    return m;
}

BoundaryField& BoundaryField::operator+=(const BoundaryField& o) {
    if (o.values.size() != values.size()) throw std::invalid_argument("boundary field shape mismatch");
    for (std::size_t i = 0; i < values.size(); ++i) values[i] += o.values[i];
    return *this;
}

BoundaryField& BoundaryField::operator*=(double c) {
    for (double& v : values) v *= c;
    return *this;
}

BoundaryField operator+(BoundaryField a, const BoundaryField& b) { return a += b; }
BoundaryField operator*(double c, BoundaryField a) { return a *= c; }

}  // namespace dnprobe
