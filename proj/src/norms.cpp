#include <fftw3.h>

#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>

#include "dnprobe/dnmap.hpp"

namespace dnprobe {

namespace {
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

BoundaryNorm::BoundaryNorm(const Grid& g, Kind requested)
    : grid_(g), kind_(g.dim == 2 ? requested : Kind::l2) {
    if (kind_ != Kind::spectral) return;
    const int N = g.cells;
    const auto& bpos = g.boundary_pos();
    auto push = [&](int i, int j) { loop_.push_back(bpos[g.id({i, j, 0})]); };
    for (int i = 0; i < N; ++i) push(i, 0);
    for (int j = 0; j < N; ++j) push(N, j);
    for (int i = N; i > 0; --i) push(i, N);
    for (int j = N; j > 0; --j) push(0, j);
}

std::string BoundaryNorm::flag() const {
    if (kind_ == Kind::spectral) return "spectral-half";
    return grid_.dim == 2 ? "L2" : "surrogate=L2";
}

double BoundaryNorm::inner(const BoundaryField& f, const BoundaryField& h) const {
    const auto& w = grid_.boundary_weights();
    double s = 0.0;
    for (int n = 1; n < f.levels; ++n) {
        double l = 0.0;
        for (std::size_t b = 0; b < f.count; ++b) l += w[b] * f.at(n, b) * h.at(n, b);
        s += grid_.dt * l;
    }
    return s;
}

double BoundaryNorm::weighted(const BoundaryField& f, bool dual) const {
    const int P = static_cast<int>(loop_.size());
    const int Q = f.levels - 1;
    fftw_complex* buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * P * Q));
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        plan = fftw_plan_dft_2d(Q, P, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    }
    for (int q = 0; q < Q; ++q)
        for (int p = 0; p < P; ++p) {
            buf[q * P + p][0] = f.at(q + 1, loop_[p]);
            buf[q * P + p][1] = 0.0;
        }
    fftw_execute(plan);
    const double ds = grid_.h, dt = grid_.dt;
    const double two_pi = 2.0 * std::numbers::pi;
    double s = 0.0;
    for (int q = 0; q < Q; ++q) {
        const int lq = q <= Q / 2 ? q : q - Q;
        const double xt = std::abs(two_pi * lq / (Q * dt));
        for (int p = 0; p < P; ++p) {
            const int kp = p <= P / 2 ? p : p - P;
            const double xx = std::abs(two_pi * kp / (P * ds));
            const double wgt = 2.0 + xx + xt;
            const double a2 = buf[q * P + p][0] * buf[q * P + p][0] + buf[q * P + p][1] * buf[q * P + p][1];
            s += (dual ? 1.0 / wgt : wgt) * a2;
        }
    }
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    fftw_free(buf);
    return std::sqrt(s * ds * dt / (static_cast<double>(P) * Q));
}

double BoundaryNorm::half(const BoundaryField& f) const {
    return kind_ == Kind::spectral ? weighted(f, false) : std::sqrt(std::max(0.0, inner(f, f)));
}

double BoundaryNorm::dual(const BoundaryField& f) const {
    return kind_ == Kind::spectral ? weighted(f, true) : std::sqrt(std::max(0.0, inner(f, f)));
}

}  // namespace dnprobe
