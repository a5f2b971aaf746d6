#pragma once

#include <string>
#include <vector>

namespace dnprobe {

/// Least-squares slope of log|y| against log|x|; pairs with a zero entry are skipped.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct LineFit {
    double intercept = 0.0;
    double slope = 0.0;
};

/// Ordinary least squares y = intercept + slope x.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct Extrapolation {
    bool ok = false;
    double limit = 0.0;
    double c = 0.0;
    double p = 0.0;
    std::string note;
};

/// e(τ) = e∞ + c τ^p through the last three points (τ strictly decreasing).
Extrapolation power_extrapolate(const std::vector<double>& tau, const std::vector<double>& e);

/// e(τ) = e∞ + c ψ(τ), least squares over the last three points.
Extrapolation linear_extrapolate(const std::vector<double>& psi, const std::vector<double>& e);

}  // namespace dnprobe
