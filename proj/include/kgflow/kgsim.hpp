#pragma once

#include <Eigen/Dense>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "kgflow/frequency.hpp"

namespace kgflow {

// Uniform periodic grid on [-L, L).
struct Grid {
    double half_length = 40.0;
    int points = 1024;

    double h() const { return 2.0 * half_length / points; }
    std::vector<double> coordinates() const;
    void validate() const;
};

// -V0 sech^2(x/a), the stock potential with closed-form bound states.
struct PoschlTeller {
    double V0 = 2.0;
    double a = 1.0;
    double operator()(double x) const;
    // Analytic bound-state energies of -d''/dx'' - V0 sech^2(x/a).
    std::vector<double> analytic_eigenvalues() const;
};

// Dense spectral data of H = -d2/dx2 + V on the grid, with the functional
// calculus for B = sqrt(H + m^2) acting in the eigenbasis. Eigenvectors are
// kept l2-orthonormal; physical L2 normalization carries the 1/sqrt(h)
// factor at the projection layer.
class SpectralDecomposition {
public:
    Grid grid;
    double mass = 1.0;
    Eigen::MatrixXd evecs;   // columns: eigenvectors of H (l2-orthonormal)
    Eigen::VectorXd evals;   // ascending eigenvalues of H
    Eigen::VectorXd beta;    // sqrt(evals + m^2)
    std::vector<int> bound_indices;  // eigenvalues below -eig_tol

    int size() const { return static_cast<int>(evals.size()); }
    int n_bound() const { return static_cast<int>(bound_indices.size()); }

    // Frequencies omega_j = sqrt(m^2 + lambda_j) of the bound states,
    // ordered decreasingly (lambda_1 > lambda_2 > ...).
    std::vector<double> bound_frequencies() const;
    FrequencySpec frequency_spec(double degeneracy_tol = 1e-6) const;

    // Eigensolver column of the j-th bound mode, 0-based in the paper's
    // ordering (decreasing omega, i.e. shallowest eigenvalue first).
    int mode_column(int j) const { return bound_indices[static_cast<size_t>(n_bound() - 1 - j)]; }
    double mode_omega(int j) const;

    // L2-normalized bound-state eigenfunction of mode j.
    Eigen::VectorXd bound_state(int j) const;

    // Eigenbasis transforms (hand-rolled kernels; OpenMP and serial
    // reference variants, bitwise identical).
    Eigen::VectorXd to_modes(const Eigen::VectorXd& u) const;          // Q^T u
    Eigen::VectorXd from_modes(const Eigen::VectorXd& c) const;       // Q c
    Eigen::VectorXd to_modes_serial(const Eigen::VectorXd& u) const;
    Eigen::VectorXd from_modes_serial(const Eigen::VectorXd& c) const;

    // Continuum projector applied to a grid function.
    Eigen::VectorXd project_continuum(const Eigen::VectorXd& u) const;

    // rotation coefficients for a fixed dt, rebuilt only when dt changes
    struct RotationCache {
        double dt = 0.0;
        Eigen::VectorXd cosb, sinb;
    };
    mutable RotationCache rotation_;
    const RotationCache& rotation(double dt) const;
};

// Builds the decomposition; throws when H + m^2 fails to be positive
// definite.
SpectralDecomposition discretize(const std::function<double(double)>& V, const Grid& grid,
                                 double mass, double eig_tol = 1e-8);

struct FieldState {
    Eigen::VectorXd u, v;  // field and time derivative on the grid
    double t = 0.0;
};

// Cubic damping ramp over the outer fraction of the domain, applied to v in
// the kick substeps. Emulates radiation to infinity on a finite box.
struct AbsorberProfile {
    Eigen::VectorXd sigma;
    double onset = 0.0;  // |x| where the ramp starts

    static AbsorberProfile make(const Grid& grid, double fraction = 0.15, double strength = 1.0);

    // exp(-tau sigma), cached for the repeated half-kick tau
    const Eigen::ArrayXd& damping(double tau) const;

private:
    mutable double cached_tau_ = -1.0;
    mutable Eigen::ArrayXd damp_;
};

// CFL-like accuracy bound for the splitting (the linear substep is exact).
double default_dt(const Grid& grid, double min_potential);

// One Strang step: half nonlinear kick v += (dt/2) lambda u^3, exact linear
// rotation through the eigenbasis, half kick. Absorber (when given) damps v
// inside each half kick. Throws on NaN/overflow.
void step(FieldState& state, double dt, double lambda_nl, const SpectralDecomposition& spec,
          const AbsorberProfile* absorber = nullptr);

struct ModeProjection {
    Eigen::VectorXd q, p;   // bound-state coordinates <u, phi_j>, <v, phi_j>
    Eigen::VectorXcd xi;    // (q sqrt(w) + i p / sqrt(w)) / sqrt(2)
    Eigen::VectorXd Pc_u, Pc_v;  // continuum parts
};
ModeProjection project_modes(const FieldState& state, const SpectralDecomposition& spec);

// E = 1/2 int v^2 + |du|^2 + (m^2+V) u^2 - (lambda/4) int u^4, with the
// gradient term evaluated through the discrete operator.
double energy(const FieldState& state, const SpectralDecomposition& spec, double lambda_nl);

struct KgConfig {
    Grid grid;
    PoschlTeller potential;
    double mass = 1.3;
    double lambda_nl = 1.0;
    std::vector<double> mode_amplitudes;  // initial q_j
    double continuum_seed = 0.0;          // amplitude of a smooth even bump seeded into P_c u
    double t_end = 100.0;
    double dt = 0.0;  // 0 = default_dt
    bool absorber = true;
    double absorber_strength = 1.0;
    double absorber_fraction = 0.15;
    int output_every = 0;  // 0 = ~400 rows
};

struct KgRunSummary {
    std::vector<double> times;
    std::vector<Eigen::VectorXd> xi_abs;   // |xi_j| per output time
    std::vector<double> sup_continuum;     // sup |P_c u|
    std::vector<double> energies;
    std::vector<double> l2_norms;
    double energy_drift_pre_absorber = 0.0;  // relative, while radiation is
                                             // still outside the layer
    double dt_used = 0.0;
    long steps = 0;
};

// Evolves the configured experiment, streaming CSV rows
// (t, |xi_j|..., |q_j|..., sup|Pc u|, energy, l2) to `csv` when given.
KgRunSummary run_experiment(const KgConfig& cfg, const SpectralDecomposition& spec,
                            std::ostream* csv = nullptr);

}  // namespace kgflow
