#include "kgflow/fgr.hpp"

#include <cmath>
#include <stdexcept>

namespace kgflow {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kUnderflowFloor = 1e-280;
}  // namespace

void ContinuumOperator::validate(double m, double tol) const {
    if (modes() == 0) throw std::invalid_argument("ContinuumOperator: empty spectrum");
    if (eigenvectors.cols() != modes() || static_cast<int>(weights.size()) != modes())
        throw std::invalid_argument("ContinuumOperator: inconsistent sizes");
    double prev = m - tol;
    for (double e : eigenvalues) {
        if (e < m - tol) throw std::invalid_argument("ContinuumOperator: eigenvalue below m");
        if (e < prev) throw std::invalid_argument("ContinuumOperator: eigenvalues not sorted");
        prev = e;
    }
    for (int a = 0; a < modes(); ++a)
        for (int b = a; b < modes(); ++b) {
            const double g = eigenvectors.col(a).dot(eigenvectors.col(b));
            if (std::abs(g - (a == b ? 1.0 : 0.0)) > tol)
                throw std::invalid_argument("ContinuumOperator: eigenvectors not orthonormal");
        }
}

double ContinuumOperator::default_width(double E) const {
    if (modes() < 2) return 1.0;
    // local spacing at the level nearest E
    size_t best = 0;
    double dist = std::abs(eigenvalues[0] - E);
    for (size_t k = 1; k < eigenvalues.size(); ++k) {
        const double d = std::abs(eigenvalues[k] - E);
        if (d < dist) {
            dist = d;
            best = k;
        }
    }
    const size_t lo = best == 0 ? 0 : best - 1;
    const size_t hi = best + 1 < eigenvalues.size() ? best + 1 : best;
    const double spacing = (eigenvalues[hi] - eigenvalues[lo]) / std::max<size_t>(1, hi - lo);
    return 4.0 * std::max(spacing, 1e-12);
}

ContinuumOperator uniform_continuum(double m, double span, int levels, int dim) {
    if (levels < 1 || dim < levels) throw std::invalid_argument("uniform_continuum: bad sizes");
    ContinuumOperator op;
    op.eigenvectors = Eigen::MatrixXd::Zero(dim, levels);
    const double de = span / levels;
    for (int k = 0; k < levels; ++k) {
        op.eigenvalues.push_back(m + (k + 0.5) * de);
        op.weights.push_back(1.0);
        op.eigenvectors(k, k) = 1.0;  // abstract orthonormal basis
    }
    return op;
}

namespace {

template <typename Kernel>
std::complex<double> spectral_sum(const ContinuumOperator& op, const CVector& phi,
                                  const CVector& phi2, double E, Kernel&& kernel) {
    if (phi.size() != op.dim() || phi2.size() != op.dim())
        throw std::invalid_argument("fgr: coupling vector dimension mismatch");
    std::complex<double> sum{0.0, 0.0};
    for (int k = 0; k < op.modes(); ++k) {
        std::complex<double> a{0.0, 0.0}, b{0.0, 0.0};
        for (int i = 0; i < op.dim(); ++i) {
            a += std::conj(phi[i]) * op.eigenvectors(i, k);
            b += op.eigenvectors(i, k) * phi2[i];
        }
        sum += op.weights[static_cast<size_t>(k)] * a * b *
               kernel(op.eigenvalues[static_cast<size_t>(k)] - E);
    }
    return sum;
}

}  // namespace

std::complex<double> shell_projection(const ContinuumOperator& op, double E, double width,
                                      const CVector& phi, const CVector& phi2, double m,
                                      DeltaKernel kernel) {
    if (E <= m) throw std::invalid_argument("shell_projection: E must exceed the continuum edge");
    if (width <= 0.0) throw std::invalid_argument("shell_projection: width must be positive");
    if (kernel == DeltaKernel::gaussian) {
        const double norm = 1.0 / (width * std::sqrt(2.0 * kPi));
        return kPi * spectral_sum(op, phi, phi2, E, [&](double x) {
                   return norm * std::exp(-0.5 * (x / width) * (x / width));
               });
    }
    return kPi * spectral_sum(op, phi, phi2, E, [&](double x) {
               return (width / kPi) / (x * x + width * width);
           });
}

std::complex<double> resolvent_pv(const ContinuumOperator& op, double E, double width,
                                  const CVector& phi, const CVector& phi2, double m) {
    if (E <= m) throw std::invalid_argument("resolvent_pv: E must exceed the continuum edge");
    if (width <= 0.0) throw std::invalid_argument("resolvent_pv: width must be positive");
    return spectral_sum(op, phi, phi2, E,
                        [&](double x) { return x / (x * x + width * width); });
}

std::complex<double> resolvent_regularized(const ContinuumOperator& op, double E, double width,
                                           const CVector& phi, const CVector& phi2, double m) {
    if (E <= m) throw std::invalid_argument("resolvent_regularized: E must exceed the edge");
    std::complex<double> sum{0.0, 0.0};
    for (int k = 0; k < op.modes(); ++k) {
        const Eigen::VectorXd e = op.eigenvectors.col(k);
        std::complex<double> a{0.0, 0.0}, b{0.0, 0.0};
        for (int i = 0; i < op.dim(); ++i) {
            a += std::conj(phi[i]) * e[i];
            b += e[i] * phi2[i];
        }
        sum += op.weights[static_cast<size_t>(k)] * a * b /
               std::complex<double>{op.eigenvalues[static_cast<size_t>(k)] - E, -width};
    }
    return sum;
}

namespace {

ResonanceMatrices assemble(const ResonancePair& pair, const CouplingMap& couplings,
                           const ContinuumOperator& op, const FrequencySpec& freq, double width,
                           DeltaKernel kernel, bool parallel) {
    const auto slot_modes = freq.slot_modes();
    const int n = freq.n_modes();
    for (const auto& [key, vec] : couplings) {
        std::vector<int> lam(static_cast<size_t>(n), 0), rho(static_cast<size_t>(n), 0);
        for (size_t a = 0; a < key.first.size(); ++a) {
            rho[static_cast<size_t>(slot_modes[a])] += key.first[a];   // mu collapses to rho
            lam[static_cast<size_t>(slot_modes[a])] += key.second[a];  // nu collapses to lambda
        }
        if (lam != pair.lambda || rho != pair.rho)
            throw std::invalid_argument("build_matrices: coupling key does not collapse to (lambda,rho)");
        if (vec.size() != op.dim())
            throw std::invalid_argument("build_matrices: coupling vector dimension mismatch");
    }

    ResonanceMatrices R;
    R.shell_energy = omega_dot(pair, freq);
    if (R.shell_energy <= freq.m)
        throw std::invalid_argument("build_matrices: pair is not above the continuum edge");
    R.width = width > 0.0 ? width : op.default_width(R.shell_energy);
    for (const auto& [key, vec] : couplings) R.basis.push_back(key);

    const int dim = static_cast<int>(R.basis.size());
    R.T_re = CMatrix::Zero(dim, dim);
    R.T_im = CMatrix::Zero(dim, dim);

    auto entry = [&](int r, int c) {
        const CVector& a = couplings.at(R.basis[static_cast<size_t>(r)]);
        const CVector& b = couplings.at(R.basis[static_cast<size_t>(c)]);
        R.T_re(r, c) = resolvent_pv(op, R.shell_energy, R.width, a, b, freq.m);
        R.T_im(r, c) = shell_projection(op, R.shell_energy, R.width, a, b, freq.m, kernel);
    };

    if (parallel) {
#pragma omp parallel for collapse(2) schedule(static)
        for (int r = 0; r < dim; ++r)
            for (int c = 0; c < dim; ++c) entry(r, c);
    } else {
        for (int r = 0; r < dim; ++r)
            for (int c = 0; c < dim; ++c) entry(r, c);
    }
    return R;
}

}  // namespace

ResonanceMatrices build_matrices(const ResonancePair& pair, const CouplingMap& couplings,
                                 const ContinuumOperator& op, const FrequencySpec& freq,
                                 double width, DeltaKernel kernel) {
    return assemble(pair, couplings, op, freq, width, kernel, true);
}

ResonanceMatrices build_matrices_serial(const ResonancePair& pair, const CouplingMap& couplings,
                                        const ContinuumOperator& op, const FrequencySpec& freq,
                                        double width, DeltaKernel kernel) {
    return assemble(pair, couplings, op, freq, width, kernel, false);
}

FgrVerdict check_fgr(const CMatrix& T_im, double tol_def) {
    FgrVerdict v;
    if (T_im.rows() == 0) return v;
    if (tol_def < 0.0) tol_def = 1e-8 * T_im.real().trace() / static_cast<double>(T_im.rows());
    v.tol_used = tol_def;
    Eigen::SelfAdjointEigenSolver<CMatrix> es(T_im);
    v.min_eigenvalue = es.eigenvalues().minCoeff();
    v.definite = v.min_eigenvalue > tol_def;
    if (!v.definite) {
        Eigen::Index which = 0;
        es.eigenvalues().minCoeff(&which);
        v.near_null = es.eigenvectors().col(which);
    }
    return v;
}

double c_lambda_rho(const CVector& gamma, const CMatrix& T_im, double X_power) {
    if (X_power < kUnderflowFloor)
        throw std::invalid_argument("c_lambda_rho: X^(lambda+rho) below underflow floor");
    const std::complex<double> q = gamma.adjoint() * (T_im * gamma);
    return q.real() / X_power;
}

}  // namespace kgflow
