#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "kgflow/fgr.hpp"
#include "kgflow/frequency.hpp"
#include "kgflow/odesolve.hpp"
#include "kgflow/polynomial.hpp"
#include "kgflow/resonance.hpp"

namespace kgflow {

// Injection models for the terms the reduced system drops.
// P follows the perturbative-term envelope
//     p * ( |X| sum X^{l+r} (l_j+r_j)  +  X_j sum X^{l+r} ),
// R follows the error envelope
//     r * ( eps^{2-delta} Y^{1/2} W^{3/2} + eps^3 <t>^{-9/8} Y^{1/2} W^{1/2} ).
struct PerturbationSpec {
    double p_prefactor = 0.0;
    double r_prefactor = 0.0;
    double eps = 0.1;
};

// The reduced dynamical system for the mode actions.
struct OdeSystem {
    FrequencySpec freq;
    std::vector<ResonancePair> lambda_star;
    std::vector<ResonancePair> lambda_full;  // drives the leading sum of the hat system
    std::vector<double> coefficients;        // c_{lambda rho}, one per lambda_star entry
    std::vector<double> c_hat;               // per-mode hat-system constants
    double C0 = 10.0;
    Exponents expo;
    PerturbationSpec pert;

    mutable long clamp_events = 0;  // negative-state clamps seen by the rhs

    int n() const { return freq.n_modes(); }
    double delta() const { return 1.0 / (100.0 * expo.N.back()); }

    // Builds a system with unit coefficients (or the supplied per-pair map)
    // and exponents derived from freq + lambda_full.
    static OdeSystem make(const FrequencySpec& freq, std::vector<ResonancePair> lambda_star,
                          std::vector<ResonancePair> lambda_full = {},
                          std::vector<double> coefficients = {});
};

// d/dt X_j = - sum_{(l,r) in Lambda*} (l_j - r_j) c_{lr} X^{l+r} + P_j + R_j
Vector rhs_X(double t, const Vector& X, const OdeSystem& sys);

// Renormalized variables: prefix sums and the exponential reweighting.
Vector to_tilde(const Vector& X, const FrequencySpec& freq);
Vector to_hat(const Vector& tilde, double accumulator, double C0);

// d/dt Xh_j = -ch_j ( sum_{Lambda} sum_{k<=j} (l_k+r_k) Xh^{l+r}
//                     + Xh_j sum_{Lambda*} Xh^{l+r} ) + Rh_j
Vector rhs_hat(double t, const Vector& Xh, const OdeSystem& sys);

struct ModeTrajectory {
    std::vector<double> times;
    std::vector<Vector> X;        // integrated actions (hat runs store Xhat here)
    std::vector<Vector> X_tilde;  // derived prefix sums
    std::vector<Vector> X_hat;    // derived renormalized variables
    std::vector<double> accumulator;  // int_0^t sum_{Lambda*} Xt^{l+r} ds

    long accepted_steps = 0;
    long hat_increase_events = 0;   // accepted steps where a derived Xhat rose
    long x_increase_events = 0;     // accepted steps where some X_j rose
    double max_hat_increase = 0.0;  // largest relative uptick seen in Xhat

    std::vector<double> component(int j) const;
    std::vector<double> hat_component(int j) const;
    std::vector<double> tilde_component(int j) const;
    // largest ratio X_j(t_k) / X_j(t_0) per mode, for transient-growth reports
    double max_growth(int j) const;
};

// Integrates the X system in log-time tau = log(1+t) with the running
// integral of sum Xt^{l+r} carried as an extra state component. Positivity
// is enforced by step rejection; samples are logarithmically spaced.
ModeTrajectory integrate(const OdeSystem& sys, const Vector& X0, double t_end, double rel_tol,
                         int samples = 400);

// Same engine driving the autonomous hat system.
ModeTrajectory integrate_hat(const OdeSystem& sys, const Vector& Xh0, double t_end,
                             double rel_tol, int samples = 400);

// Closed-form comparison solutions of dY/dt = -Y^{2N+1}, dW/dt = -W^2.
double comparison_Y(double t, double eps, int N_n);
double comparison_W(double t, double eps, double kappa);

// Least-squares slope of log x against log t over [t_lo, t_hi]. Requires at
// least one decade of window and positive samples inside it.
double fit_decay_exponent(const std::vector<double>& times, const std::vector<double>& values,
                          double t_lo, double t_hi);

struct BoundCheck {
    std::string name;
    double constant = 0.0;  // fitted
    bool pass = false;
    std::string detail;
};

struct BoundReport {
    std::vector<BoundCheck> checks;
    double suspicious_constant = 1e3;
    bool all_pass() const;
    std::string summary() const;
};

// Fits the comparison constants of the decay estimates along a trajectory:
//   (a) Xh_j <= C Y^{alpha_j}
//   (b) c Y <= |Xh| <= C Y
//   (c) Xh^{l+r} <= C Y W on Lambda*
//   (d) Xh^{l+r} <= C Y^{1+delta}/<t> when some l_j+r_j != 0 with j < j0
//   (e) accumulator <= 10 eps
// Constants above the suspicious threshold fail their check.
BoundReport verify_theorem_bounds(const ModeTrajectory& traj, const OdeSystem& sys, double eps);

// Resonant coupling block for the complex eta system: the slot basis of
// M_{lambda,rho} and its golden-rule matrix T = T_re + i T_im.
struct EtaCoupling {
    ResonancePair pair;
    std::vector<SlotPair> basis;
    CMatrix T;
};

// Full complex right-hand side
//   d eta_jk/dt = -i w_j eta_jk - i dZ0/d(conj eta_jk) + resonant coupling.
CVector rhs_eta(const CVector& eta, const SparsePolynomial& Z0,
                const std::vector<EtaCoupling>& couplings, const FrequencySpec& freq);

// d/dt X_j implied by rhs_eta: Re sum_k conj(eta_jk) etadot_jk.
Vector eta_action_derivative(const CVector& eta, const SparsePolynomial& Z0,
                             const std::vector<EtaCoupling>& couplings,
                             const FrequencySpec& freq);

// Integrates the eta system (real-packed dopri5) and samples the actions
// X_j = (1/2) sum_k |eta_jk|^2 at the given times.
std::vector<Vector> integrate_eta(const CVector& eta0, const SparsePolynomial& Z0,
                                  const std::vector<EtaCoupling>& couplings,
                                  const FrequencySpec& freq, const std::vector<double>& times,
                                  double rel_tol = 1e-9);

}  // namespace kgflow
