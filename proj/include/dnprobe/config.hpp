#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dnprobe/dnmap.hpp"
#include "dnprobe/grid.hpp"
#include "dnprobe/material.hpp"
#include "dnprobe/reconstruct.hpp"
#include "dnprobe/singular.hpp"

namespace dnprobe {

/// Invalid or unknown configuration; the CLI maps it to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    GridConfig grid;

    // law² = (gamma2, rho2); law¹ = law² + eps·(dgamma, drho) unless gamma1/rho1 are given
    ScalarLaw gamma2 = ScalarLaw::constant(1.0), rho2 = ScalarLaw::constant(1.0);
    std::optional<ScalarLaw> gamma1, rho1;
    ScalarLaw dgamma = ScalarLaw::constant(0.0), drho = ScalarLaw::constant(0.0);
    double eps = 0.0;
    MatrixField A;
    double floor = 0.0;
    double kappa = 1e300;
    double s_min = -1.0, s_max = 1.0;
    int samples = 256;

    Vec x0{0, 0, 0};
    double t0 = 0.0;
    double lambda = 0.0;
    Target target = Target::gamma;
    double r = 0.25;
    std::optional<ScaleRule> a_rule;
    BumpShape shape = BumpShape::standard;
    std::optional<double> tau0;
    Pairing pairing = Pairing::weak;
    double convention = 1.0;

    BoundaryNorm::Kind norm = BoundaryNorm::Kind::spectral;
    int dictionary_size = 16;

    std::vector<double> tau_list, eps_list, k_list{4, 8, 16, 32};

    double forward_lambda = 0.0;
    std::string data = "bump";  // zero | bump
    double amplitude = 0.1;
    std::string mms = "none";   // none | space | time

    std::string out_dir = "out";
    std::string prefix;

    std::uint64_t seed = 12345;

    std::string canonical;  // resolved text the hash is computed from
    std::uint64_t hash = 0;

    MaterialLaw law_first() const;
    MaterialLaw law_second() const;
    LawFamily family() const;
    std::string hash_hex() const;
    SweepSettings sweep(Target t) const;
    StabilitySettings stability(Target t) const;
};

/// INI text with sections grid, material, probe, norm, sweep, forward, output, run.
/// Numbers accept fractions such as 1/64. Unknown keys are rejected by name.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

std::uint64_t fnv1a64(const std::string& s);

/// "1/64", "0.5", "-2e-3"
double parse_number(const std::string& s);
/// comma- or space-separated numbers
std::vector<double> parse_list(const std::string& s);

}  // namespace dnprobe
