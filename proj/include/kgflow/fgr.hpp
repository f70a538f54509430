#pragma once

#include <Eigen/Dense>
#include <complex>
#include <map>
#include <vector>

#include "kgflow/frequency.hpp"
#include "kgflow/resonance.hpp"

namespace kgflow {

using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

// Discretized continuum restriction of B: eigenvalues >= m, orthonormal
// eigenvectors (columns), and quadrature weights approximating the spectral
// measure.
struct ContinuumOperator {
    std::vector<double> eigenvalues;
    Eigen::MatrixXd eigenvectors;  // dim x K, columns match eigenvalues
    std::vector<double> weights;   // one per eigenvalue

    int dim() const { return static_cast<int>(eigenvectors.rows()); }
    int modes() const { return static_cast<int>(eigenvalues.size()); }

    // Throws unless sizes are coherent, eigenvalues are sorted and >= m-tol,
    // and the columns are orthonormal to tol.
    void validate(double m, double tol = 1e-8) const;

    // 4x the local eigenvalue spacing around E: the default smoothing width.
    double default_width(double E) const;
};

// Synthetic spectrum of a free-like continuum on [m, m+span] with uniform
// density and Gaussian-enveloped coupling rows. Used when no kgsim
// eigen-data is imported.
ContinuumOperator uniform_continuum(double m, double span, int levels, int dim);

enum class DeltaKernel { gaussian, lorentzian };

// pi < Phi, delta_width(B - E) Phi' >  against the discrete spectral
// measure. Gaussian kernel by default; the Lorentzian kernel makes the
// Plemelj split of the width-regularized resolvent exact.
std::complex<double> shell_projection(const ContinuumOperator& op, double E, double width,
                                      const CVector& phi, const CVector& phi2, double m,
                                      DeltaKernel kernel = DeltaKernel::gaussian);

// Principal value with the regularized kernel x/(x^2 + width^2).
std::complex<double> resolvent_pv(const ContinuumOperator& op, double E, double width,
                                  const CVector& phi, const CVector& phi2, double m);

// < Phi, (B - E - i width)^{-1} Phi' >; equals resolvent_pv + i *
// shell_projection(lorentzian) identically.
std::complex<double> resolvent_regularized(const ContinuumOperator& op, double E, double width,
                                           const CVector& phi, const CVector& phi2, double m);

using SlotPair = std::pair<MultiIndex, MultiIndex>;
using CouplingMap = std::map<SlotPair, CVector>;

// Golden-rule matrices on the shell E = omega.(lambda-rho): entries
// c = < Phi_i, (PV + i pi delta)(B - E) Phi_j > split into the Hermitian
// principal-value part T_re and the PSD shell part T_im.
struct ResonanceMatrices {
    CMatrix T_re;
    CMatrix T_im;
    double shell_energy = 0.0;
    double width = 0.0;
    std::vector<SlotPair> basis;  // ordered keys of M_{lambda,rho}
};

ResonanceMatrices build_matrices(const ResonancePair& pair, const CouplingMap& couplings,
                                 const ContinuumOperator& op, const FrequencySpec& freq,
                                 double width = -1.0,
                                 DeltaKernel kernel = DeltaKernel::gaussian);
ResonanceMatrices build_matrices_serial(const ResonancePair& pair, const CouplingMap& couplings,
                                        const ContinuumOperator& op, const FrequencySpec& freq,
                                        double width = -1.0,
                                        DeltaKernel kernel = DeltaKernel::gaussian);

struct FgrVerdict {
    bool definite = false;
    double min_eigenvalue = 0.0;
    double tol_used = 0.0;
    CVector near_null;  // reported when degenerate
};

// Definiteness check of a Hermitian PSD matrix; tol_def < 0 picks the
// default 1e-8 * trace / dim.
FgrVerdict check_fgr(const CMatrix& T_im, double tol_def = -1.0);

// Quadratic form Gamma T_im Gamma^dagger / X^{lambda+rho}.
double c_lambda_rho(const CVector& gamma, const CMatrix& T_im, double X_power);

}  // namespace kgflow
