#pragma once
#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace perpdual::detail {

/// Adaptive Dormand-Prince 5(4) pair for small fixed-size systems.
/// Integrates dy/dt = f(t, y) from t0 to t1 (either direction) and can
/// report dense values at caller-chosen points by stepping exactly onto them.
template <std::size_t N>
class Rk45 {
public:
    using State = std::array<double, N>;
    using Rhs = std::function<void(double, const State&, State&)>;

    double rtol = 1e-10;
    double atol = 1e-13;
    double h_min_factor = 1e-14;  // step underflow guard, relative to span
    std::size_t max_steps = 2'000'000;

    /// Advance y from t0 to t1. Calls `accept(t, y)` after every accepted step
    /// when provided. Throws std::runtime_error on step underflow.
    void integrate(const Rhs& f, double t0, double t1, State& y,
                   const std::function<void(double, const State&)>& accept = nullptr) const {
        if (t0 == t1) return;
        const double dir = (t1 > t0) ? 1.0 : -1.0;
        const double span = std::abs(t1 - t0);
        double t = t0;
        double h = dir * std::min(0.1 * span, 0.1);
        State k1, k2, k3, k4, k5, k6, k7, ytmp, y5, err;
        f(t, y, k1);
        std::size_t steps = 0;
        while (dir * (t1 - t) > 0.0) {
            if (++steps > max_steps)
                throw std::runtime_error("rk45: step limit exceeded");
            if (dir * (t + h - t1) > 0.0) h = t1 - t;
            if (std::abs(h) < h_min_factor * span)
                throw std::runtime_error("rk45: step size underflow");

            stage(f, t, y, h, k1, k2, k3, k4, k5, k6, k7, ytmp, y5, err);

            double emax = 0.0;
            for (std::size_t i = 0; i < N; ++i) {
                double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(y5[i]));
                emax = std::max(emax, std::abs(err[i]) / sc);
            }
            if (emax <= 1.0) {
                t += h;
                y = y5;
                k1 = k7;  // FSAL
                if (accept) accept(t, y);
                double fac = (emax == 0.0) ? 5.0 : 0.9 * std::pow(emax, -0.2);
                h *= std::min(5.0, std::max(0.2, fac));
            } else {
                h *= std::max(0.1, 0.9 * std::pow(emax, -0.2));
            }
        }
    }

private:
    static void stage(const Rhs& f, double t, const State& y, double h,
                      const State& k1, State& k2, State& k3, State& k4, State& k5,
                      State& k6, State& k7, State& ytmp, State& y5, State& err) {
        auto axpy = [&](State& out, std::initializer_list<std::pair<double, const State*>> terms) {
            for (std::size_t i = 0; i < N; ++i) {
                double s = y[i];
                for (auto& [c, k] : terms) s += h * c * (*k)[i];
                out[i] = s;
            }
        };
        axpy(ytmp, {{1.0 / 5, &k1}});
        f(t + h / 5, ytmp, k2);
        axpy(ytmp, {{3.0 / 40, &k1}, {9.0 / 40, &k2}});
        f(t + 3 * h / 10, ytmp, k3);
        axpy(ytmp, {{44.0 / 45, &k1}, {-56.0 / 15, &k2}, {32.0 / 9, &k3}});
        f(t + 4 * h / 5, ytmp, k4);
        axpy(ytmp, {{19372.0 / 6561, &k1}, {-25360.0 / 2187, &k2}, {64448.0 / 6561, &k3}, {-212.0 / 729, &k4}});
        f(t + 8 * h / 9, ytmp, k5);
        axpy(ytmp, {{9017.0 / 3168, &k1}, {-355.0 / 33, &k2}, {46732.0 / 5247, &k3}, {49.0 / 176, &k4}, {-5103.0 / 18656, &k5}});
        f(t + h, ytmp, k6);
        axpy(y5, {{35.0 / 384, &k1}, {500.0 / 1113, &k3}, {125.0 / 192, &k4}, {-2187.0 / 6784, &k5}, {11.0 / 84, &k6}});
        f(t + h, y5, k7);
        // embedded 4th-order difference
        static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                                e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
        for (std::size_t i = 0; i < N; ++i)
            err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
    }
};

/// Integrate hitting each point of `ts` in order (ts must be monotone in the
/// travel direction); calls out(index, y) at each point.
template <std::size_t N>
void rk45_at_points(const Rk45<N>& solver, const typename Rk45<N>::Rhs& f,
                    double t0, const std::vector<double>& ts,
                    typename Rk45<N>::State y,
                    const std::function<void(std::size_t, const typename Rk45<N>::State&)>& out) {
    double t = t0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (ts[i] != t) solver.integrate(f, t, ts[i], y);
        t = ts[i];
        out(i, y);
    }
}

} // namespace perpdual::detail
