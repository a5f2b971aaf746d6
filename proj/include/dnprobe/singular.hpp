#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dnprobe/fields.hpp"
#include "dnprobe/grid.hpp"
#include "dnprobe/material.hpp"
#include "dnprobe/stencil.hpp"

namespace dnprobe {

struct SingularError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Unnormalized fundamental solution of -div(A grad) for constant A:
/// q^{(2-n)/2} for n ≥ 3 and -ln sqrt(q) for n = 2, q = A⁻¹(x-y)·(x-y).
/// `scale` multiplies the convention (no c_n is ever applied).
class Fundamental {
public:
    Fundamental(int dim, const MatrixField& A, const Vec& y, double scale = 1.0);
    double value(const Vec& x) const;
    Vec grad(const Vec& x) const;
    int dim() const { return dim_; }
    const Vec& pole() const { return y_; }
    double scale() const { return scale_; }
    const MatrixField& matrix() const { return A_; }

private:
    double quad(const Vec& x, Vec& Ainv_d) const;
    int dim_;
    MatrixField A_;
    Mat inv_{};
    Vec y_;
    double scale_;
};

double fundamental_H(const Vec& x, const Vec& y, const MatrixField& A, int dim);

/// A-harmonic extension on Ω′ from traces on ∂Ω′.
class CorrectorSolver {
public:
    CorrectorSolver(const Grid& g, const MatrixField& A);
    /// trace given at the Dirichlet nodes of Ω̄′ (split-operator order)
    std::vector<double> solve(std::span<const double> trace) const;
    std::vector<double> solve(const std::function<double(const Vec&)>& trace) const;
    /// max |h² (K v)_i| over Ω′ unknowns
    double residual(std::span<const double> v) const;
    const SplitOperator& op() const { return op_; }
    const Lattice& lattice() const { return grid_.omega_prime(); }

private:
    Grid grid_;
    SplitOperator op_;
    SpdSolver solver_;
};

std::vector<double> solve_corrector(const Grid& g, const std::function<double(const Vec&)>& trace,
                                    const MatrixField& A);

enum class ProbeKind { gamma, rho };
enum class BumpShape { standard, skewed };

/// a_τ rule: log -> |ln τ|^p, power -> τ^{-p}.
struct ScaleRule {
    enum class Kind { log, power };
    Kind kind = Kind::log;
    double p = 1.0 / 16.0;
    double apply(double tau) const;
};

struct CutoffOptions {
    ProbeKind kind = ProbeKind::gamma;
    double r = 0.25;
    std::optional<ScaleRule> rule;  // default: log 1/16 for γ, power r for ρ
    BumpShape shape = BumpShape::standard;
    ScaleRule effective_rule() const;
};

/// L²-normalized bump on [-1,1]; normalization by adaptive quadrature.
class BaseBump {
public:
    explicit BaseBump(BumpShape shape = BumpShape::standard);
    double operator()(double s) const;
    /// ∫_{-1}^{s} φ
    double cumulative(double s) const;
    double total() const { return total_; }
    /// ∫ |s| φ²
    double abs_moment() const { return abs_moment_; }
    double norm_sq() const { return norm_sq_; }
    BumpShape shape() const { return shape_; }

private:
    double raw(double s) const;
    BumpShape shape_;
    double c_ = 1.0;
    double total_ = 0.0;
    double abs_moment_ = 0.0;
    double norm_sq_ = 0.0;
};

struct CutoffSet {
    ProbeKind kind = ProbeKind::gamma;
    BaseBump phi;
    double t0 = 0.0, tau = 0.0, tau0 = 0.0, r = 0.25, T = 0.0;
    double a_tau = 1.0;
    double plateau = 0.0;  // τ₀ʳ
    double ramp = 0.0;     // smoothstep width

    double phi_tau(double t) const;
    double Phi_tau(double t) const;
    double chi(double t) const;
    double dchi(double t) const;
    double xi(double t) const;
    double zeta(double t) const;
    double support_lo() const { return t0 - 1.0 / a_tau; }
    double support_hi() const { return t0 + 1.0 / a_tau; }

    // samples on the time grid
    std::vector<double> phi_s, Phi_s, chi_s, xi_s, zeta_s;
};

CutoffSet make_cutoffs(double t0, double tau, const CutoffOptions& opt, const Grid& g, double tau0);

/// ∫ φ_τ² f dt by adaptive quadrature over the support of φ_τ.
double mollify(const CutoffSet& cut, const std::function<double(double)>& f);

struct SingularBasis {
    int dim = 2;
    Fundamental H;
    /// on Ω̄′ lattice nodes (zero outside the closure)
    std::vector<double> H_values, corrector_v;
    std::vector<std::vector<double>> dH_values, corrector_vj;  // filled for ρ probes
    double corrector_residual = 0.0;
    double trace_scale = 0.0;  // max |H| on ∂Ω′, sets the leakage tolerance
};

SingularBasis build_singular_basis(const Grid& g, const ProbeGeometry& geom, const MatrixField& A,
                                   bool with_derivatives, double convention_scale = 1.0);

struct ProbeSpec {
    ProbeGeometry geom;
    CutoffOptions cut;
};

BoundaryField probe_gamma(const Grid& g, const ProbeGeometry& geom, const CutoffSet& cut, const SingularBasis& basis);
std::pair<BoundaryField, BoundaryField> probe_rho(const Grid& g, const ProbeGeometry& geom, const CutoffSet& cut,
                                                  const SingularBasis& basis, int j);

/// Spatial profile P - v_τ (or ∂_jH - v_jτ for j ≥ 0) on the Ω̄ nodes.
std::vector<double> probe_profile(const Grid& g, const SingularBasis& basis, int j = -1);

/// ∫_Ω A∇H·∇H by the trapezoid rule with centered differences of H.
double grad_H_energy(const Fundamental& H, const Grid& g);
double grad_H_energy(const SingularBasis& basis, const Grid& g);

struct SingularNorms {
    double H_l2 = 0.0;
    double gradH_l2 = 0.0;
    double energy = 0.0;  // with A
};
SingularNorms singular_norms(const Fundamental& H, const Grid& g);

}  // namespace dnprobe
