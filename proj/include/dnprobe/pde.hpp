#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "dnprobe/fields.hpp"
#include "dnprobe/grid.hpp"
#include "dnprobe/material.hpp"

namespace dnprobe {

struct PdeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Newton failed inside the iteration cap; the amplitude is taken to be
/// outside the operational smallness radius.
struct NewtonDivergence : PdeError {
    explicit NewtonDivergence(const std::string& detail)
        : PdeError("outside operational smallness radius: " + detail) {}
};

struct SolveOptions {
    double newton_tol = 1e-10;
    int newton_cap = 25;
    double linear_tol = 1e-12;
};

struct SolveStats {
    int newton_iterations = 0;  // max over steps
    int linear_iterations = 0;  // max over solves
    double residual = 0.0;      // max final nonlinear residual
};

SpaceTimeField solve_forward(const MaterialLaw& law, const MatrixField& A, const Grid& g, double lambda,
                             const BoundaryField& data, const SpaceTimeField* source = nullptr,
                             const SolveOptions& opt = {}, SolveStats* stats = nullptr);

SpaceTimeField solve_linearized(const MaterialLaw& law, const MatrixField& A, const Grid& g, double lambda,
                                const BoundaryField& data, const SpaceTimeField* source = nullptr,
                                const SolveOptions& opt = {}, SolveStats* stats = nullptr);

/// -∂t(ρ_λ w̄) - γ_λ div(A∇w̄) = 0, w̄(T) = 0, w̄ = ḡ on ∂Ω; stepped backward.
SpaceTimeField solve_adjoint(const MaterialLaw& law, const MatrixField& A, const Grid& g, double lambda,
                             const BoundaryField& data, const SolveOptions& opt = {}, SolveStats* stats = nullptr);

/// Manufactured solutions for A = Id.
///   space: u = λ + t Π sin(π x_a)          (exact in time under implicit Euler)
///   time:  u = λ + sin(t) Π 4 x_a (1 - x_a) (exact in space for constant γ)
struct Manufactured {
    enum class Kind { space, time };
    Kind kind = Kind::space;
    int dim = 2;
    double lambda = 0.0;

    double u(const Vec& x, double t) const;
    double ut(const Vec& x, double t) const;
    Vec grad(const Vec& x, double t) const;
    double laplacian(const Vec& x, double t) const;
};

SpaceTimeField manufactured_source(const Manufactured& m, const MaterialLaw& law, const Grid& g);
BoundaryField manufactured_data(const Manufactured& m, const Grid& g);
/// max over nodes and levels of |u - u*|
double manufactured_error(const Manufactured& m, const SpaceTimeField& u, const Grid& g);

struct MmsRow {
    double h = 0.0, dt = 0.0, error = 0.0, seconds = 0.0;
};

/// Runs the forward solver on each grid and returns the error table.
std::vector<MmsRow> mms_study(const Manufactured& m, const MaterialLaw& law, const std::vector<GridConfig>& grids);

}  // namespace dnprobe
