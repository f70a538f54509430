#include "kgflow/odesolve.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace kgflow {

namespace {

// Dormand-Prince 5(4) tableau
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// b - bhat (error weights)
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;

}  // namespace

OdeStats integrate_dopri5(const std::function<Vector(double, const Vector&)>& rhs, Vector y,
                          const std::vector<double>& output_times,
                          const std::function<void(double, const Vector&)>& on_output,
                          const OdeOptions& opts,
                          const std::function<bool(const Vector&)>& guard,
                          const std::function<void(double, const Vector&)>& on_accept) {
    OdeStats stats;
    if (output_times.empty()) return stats;

    double t = output_times.front();
    on_output(t, y);

    double h = opts.first_step;
    Vector k1 = rhs(t, y);

    for (size_t target_idx = 1; target_idx < output_times.size(); ++target_idx) {
        const double t_target = output_times[target_idx];
        while (t < t_target) {
            if (stats.accepted + stats.rejected > opts.max_steps)
                throw std::runtime_error("ode: step budget exhausted");
            h = std::min({h, opts.max_step, t_target - t});
            if (h < opts.min_step) throw StepUnderflow(t, h);

            const Vector k2 = rhs(t + c2 * h, y + h * (a21 * k1));
            const Vector k3 = rhs(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
            const Vector k4 = rhs(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
            const Vector k5 =
                rhs(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
            const Vector k6 =
                rhs(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
            const Vector ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
            const Vector k7 = rhs(t + h, ynew);
            const Vector err_vec =
                h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

            double err = 0.0;
            for (Eigen::Index i = 0; i < y.size(); ++i) {
                const double scale =
                    opts.abs_tol +
                    opts.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
                const double r = err_vec[i] / scale;
                err += r * r;
            }
            err = std::sqrt(err / static_cast<double>(y.size()));

            const bool guarded_ok = !guard || guard(ynew);
            if (err <= 1.0 && guarded_ok) {
                t += h;
                y = ynew;
                k1 = k7;  // FSAL
                ++stats.accepted;
                if (on_accept) on_accept(t, y);
                const double grow =
                    err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
                h *= std::clamp(grow, 0.2, 5.0);
            } else {
                ++stats.rejected;
                h *= guarded_ok ? std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9) : 0.5;
            }
        }
        on_output(t, y);
    }
    return stats;
}

}  // namespace kgflow
