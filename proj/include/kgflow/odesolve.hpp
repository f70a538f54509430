#pragma once

#include <Eigen/Dense>
#include <functional>
#include <stdexcept>
#include <string>

namespace kgflow {

using Vector = Eigen::VectorXd;

// Embedded Dormand-Prince 5(4) step control. Steps land exactly on requested
// output points; an optional acceptance guard can veto a step (used for
// positivity), forcing a retry at half the size.
struct OdeOptions {
    double rel_tol = 1e-9;
    double abs_tol = 1e-60;
    double first_step = 1e-4;
    double max_step = 0.5;
    double min_step = 1e-14;
    long max_steps = 50'000'000;
};

struct OdeStats {
    long accepted = 0;
    long rejected = 0;
};

class StepUnderflow : public std::runtime_error {
public:
    StepUnderflow(double t, double h)
        : std::runtime_error("ode: step size underflow at t = " + std::to_string(t) +
                             " (h = " + std::to_string(h) + ")"),
          time(t), step(h) {}
    double time, step;
};

// rhs(t, y) -> dy/dt. on_output(t, y) fires at every requested output point;
// on_accept(t, y) after every accepted internal step. guard(y) may reject a
// proposed state.
OdeStats integrate_dopri5(const std::function<Vector(double, const Vector&)>& rhs, Vector y0,
                          const std::vector<double>& output_times,
                          const std::function<void(double, const Vector&)>& on_output,
                          const OdeOptions& opts = {},
                          const std::function<bool(const Vector&)>& guard = nullptr,
                          const std::function<void(double, const Vector&)>& on_accept = nullptr);

}  // namespace kgflow
