#include "dnprobe/fit.hpp"

#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <stdexcept>

namespace dnprobe {

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("line fit needs at least two points");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("line fit with coincident abscissae");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    return f;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
        if (x[i] == 0.0 || y[i] == 0.0 || !std::isfinite(x[i]) || !std::isfinite(y[i])) continue;
        lx.push_back(std::log(std::abs(x[i])));
        ly.push_back(std::log(std::abs(y[i])));
    }
    return fit_line(lx, ly).slope;
}

Extrapolation power_extrapolate(const std::vector<double>& tau, const std::vector<double>& e) {
    Extrapolation r;
    if (tau.size() != e.size() || tau.size() < 3) {
        r.note = "fewer than three sweep points";
        r.limit = e.empty() ? 0.0 : e.back();
        return r;
    }
    const std::size_t k = tau.size() - 3;
    const double t1 = tau[k], t2 = tau[k + 1], t3 = tau[k + 2];
    const double e1 = e[k], e2 = e[k + 1], e3 = e[k + 2];
    const double d12 = e1 - e2, d23 = e2 - e3;
    r.limit = e3;
    if (d12 == 0.0 && d23 == 0.0) {
        r.ok = true;
        r.note = "constant sequence";
        return r;
    }
    if (d23 == 0.0 || d12 / d23 <= 0.0) {
        r.note = "non-monotone sequence, extrapolation skipped";
        return r;
    }
    const double ratio = d12 / d23;
    auto f = [&](double p) { return (std::pow(t1, p) - std::pow(t2, p)) / (std::pow(t2, p) - std::pow(t3, p)) - ratio; };
    const double lo = 1e-3, hi = 8.0;
    if (f(lo) * f(hi) > 0.0) {
        r.note = "no exponent in (0, 8] matches the sequence";
        return r;
    }
    boost::uintmax_t iters = 200;
    const auto bracket =
        boost::math::tools::toms748_solve(f, lo, hi, boost::math::tools::eps_tolerance<double>(50), iters);
    r.p = 0.5 * (bracket.first + bracket.second);
    r.c = d23 / (std::pow(t2, r.p) - std::pow(t3, r.p));
    r.limit = e3 - r.c * std::pow(t3, r.p);
    r.ok = std::isfinite(r.limit);
    return r;
}

Extrapolation linear_extrapolate(const std::vector<double>& psi, const std::vector<double>& e) {
    Extrapolation r;
    if (psi.size() != e.size() || psi.size() < 3) {
        r.note = "fewer than three sweep points";
        r.limit = e.empty() ? 0.0 : e.back();
        return r;
    }
    const std::vector<double> x(psi.end() - 3, psi.end()), y(e.end() - 3, e.end());
    if (y[0] == y[1] && y[1] == y[2]) {
        r.ok = true;
        r.limit = y[2];
        r.note = "constant sequence";
        return r;
    }
    const LineFit f = fit_line(x, y);
    r.ok = true;
    r.limit = f.intercept;
    r.c = f.slope;
    r.p = 1.0;
    return r;
}

}  // namespace dnprobe
