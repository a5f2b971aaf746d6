#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dnprobe/fields.hpp"
#include "dnprobe/grid.hpp"
#include "dnprobe/material.hpp"
#include "dnprobe/pde.hpp"

namespace dnprobe {

enum class FluxProducer { nonlinear, linearized };

/// DN output on the S nodes × time levels.
struct FluxRecord {
    FluxProducer producer = FluxProducer::linearized;
    double lambda = 0.0;
    std::string law;
    int levels = 0;
    std::vector<std::size_t> nodes;  // Grid::patch_nodes()
    std::vector<double> values;

    double at(int n, std::size_t k) const { return values[n * nodes.size() + k]; }
    double& at(int n, std::size_t k) { return values[n * nodes.size() + k]; }
    FluxRecord& operator-=(const FluxRecord& o);
    FluxRecord& operator*=(double c);
};

FluxRecord operator-(FluxRecord a, const FluxRecord& b);

/// γ(t,u) A∇u·ν on S with a 3-point one-sided normal difference.
FluxRecord nonlinear_flux(const SpaceTimeField& u, const MaterialLaw& law, const MatrixField& A, const Grid& g);
/// γ(t,λ) A∇w·ν on S.
FluxRecord linear_flux(const SpaceTimeField& w, const MaterialLaw& law, const MatrixField& A, const Grid& g,
                       double lambda);

/// Flux samples as a boundary field (zero off S).
BoundaryField as_boundary(const FluxRecord& f, const Grid& g);

/// L²(S×(0,T)): trapezoid in space, implicit-Euler weights dt on levels 1..N.
double flux_l2(const FluxRecord& f, const Grid& g);

/// ∫_Σ F h with the same quadrature.
double strong_pairing(const FluxRecord& f, const BoundaryField& h, const Grid& g);

/// Per-slice harmonic extension E_T h on Ω̄ × levels.
SpaceTimeField lift(const BoundaryField& h, const Grid& g);

/// ∫_Q(-∂tρ_λ w E h - ρ_λ w ∂t(E h) + γ_λ A∇w·∇(E h)) in its exact discrete form
/// (lumped mass, summation by parts in time, trapezoid Dirichlet form).
double weak_pairing(const SpaceTimeField& w, const BoundaryField& h, const MaterialLaw& law, const MatrixField& A,
                    const Grid& g, double lambda);
double weak_pairing(const SpaceTimeField& w, const SpaceTimeField& lifted, const MaterialLaw& law,
                    const MatrixField& A, const Grid& g, double lambda);

/// Boundary norms. Spectral surrogate on n = 2, L² (flagged) otherwise.
class BoundaryNorm {
public:
    enum class Kind { l2, spectral };
    BoundaryNorm(const Grid& g, Kind requested);
    Kind kind() const { return kind_; }
    std::string flag() const;
    double half(const BoundaryField& f) const;
    double dual(const BoundaryField& f) const;
    double inner(const BoundaryField& f, const BoundaryField& g) const;

private:
    double weighted(const BoundaryField& f, bool dual) const;
    Grid grid_;
    Kind kind_;
    std::vector<int> loop_;  // arclength order of boundary positions (n = 2)
};

struct LinearizationRow {
    double k = 0.0;
    double d = 0.0;
    bool diverged = false;
    std::string note;
};

std::vector<LinearizationRow> linearization_check(const MaterialLaw& law, const MatrixField& A, const Grid& g,
                                                  double lambda, const BoundaryField& data,
                                                  const std::vector<double>& k_list);

/// Smooth space-time bumps on S with a portable seeded generator.
std::vector<BoundaryField> random_bumps(const Grid& g, int count, std::uint64_t seed);

/// Linear DN responses Λ_λ g for each dictionary entry.
std::vector<FluxRecord> linear_responses(const MaterialLaw& law, const MatrixField& A, const Grid& g, double lambda,
                                         const std::vector<BoundaryField>& dictionary);

struct EtaResult {
    double eta = 0.0;
    std::size_t argmax = 0;
    std::vector<double> ratios;
    std::string norm_flag;
};

EtaResult eta_from_responses(const std::vector<FluxRecord>& first, const std::vector<FluxRecord>& second,
                             const std::vector<BoundaryField>& dictionary, const Grid& g, const BoundaryNorm& norm);

EtaResult eta_surrogate(const MaterialLaw& first, const MaterialLaw& second, const MatrixField& A, const Grid& g,
                        double lambda, const std::vector<BoundaryField>& dictionary, const BoundaryNorm& norm);

}  // namespace dnprobe
