#include <random>

#include "doctest.h"
#include "kgflow/fgr.hpp"
#include "kgflow/pipeline.hpp"

using namespace kgflow;

namespace {

constexpr double kPi = 3.14159265358979323846;

FrequencySpec freq45() {
    FrequencySpec f;
    f.m = 1.0;
    f.omegas = {0.45, 0.25};
    return f;
}

CVector unit(int dim, int k) {
    CVector v = CVector::Zero(dim);
    v[k] = 1.0;
    return v;
}

}  // namespace

TEST_CASE("operator validation") {
    auto op = uniform_continuum(1.0, 2.0, 8, 8);
    CHECK_NOTHROW(op.validate(1.0));
    op.eigenvalues[3] = 0.5;  // below the edge
    CHECK_THROWS(op.validate(1.0));
}

TEST_CASE("shell projection: diagonal is nonnegative, off-support vanishes") {
    const auto op = uniform_continuum(1.0, 2.0, 40, 40);
    const double E = 1.6, w = 0.05;
    const CVector phi = unit(40, 12);
    const auto diag = shell_projection(op, E, w, phi, phi, 1.0);
    CHECK(diag.imag() == doctest::Approx(0.0));
    CHECK(diag.real() >= 0.0);

    // eigenvalue exactly at E with unit weight: pi * gaussian(0)
    ContinuumOperator single;
    single.eigenvalues = {E};
    single.weights = {1.0};
    single.eigenvectors = Eigen::MatrixXd::Identity(1, 1);
    const auto peak = shell_projection(single, E, w, unit(1, 0), unit(1, 0), 1.0);
    CHECK(peak.real() == doctest::Approx(kPi / (w * std::sqrt(2.0 * kPi))));

    // support far outside [E - 5w, E + 5w]
    const CVector far = unit(40, 39);  // eigenvalue 2.9875, E + 5w = 1.85
    CHECK(std::abs(shell_projection(op, E, w, far, far, 1.0)) < 1e-8);

    CHECK_THROWS(shell_projection(op, 0.9, w, phi, phi, 1.0));  // below edge
    CHECK_THROWS(shell_projection(op, E, -0.1, phi, phi, 1.0));
}

TEST_CASE("principal value: symmetric spectra cancel, one-sided spectra are signed") {
    // symmetric two-level spectrum about E with equal couplings
    ContinuumOperator sym;
    sym.eigenvalues = {1.2, 1.8};
    sym.weights = {1.0, 1.0};
    sym.eigenvectors = Eigen::MatrixXd::Identity(2, 2);
    CVector phi(2);
    phi << 0.7, 0.7;
    CHECK(std::abs(resolvent_pv(sym, 1.5, 0.05, phi, phi, 1.0)) < 1e-14);

    // spectrum entirely above E: positive kernel
    const auto op = uniform_continuum(1.0, 1.0, 20, 20);
    CVector mix = CVector::Zero(20);
    for (int k = 5; k < 15; ++k) mix[k] = 0.3;
    CHECK(resolvent_pv(op, 1.01, 0.02, mix, mix, 1.0).real() > 0.0);
}

TEST_CASE("principal value converges as the width shrinks on a smooth density") {
    // dense spectrum + smooth coupling: successive halvings of the width
    const int K = 800;
    ContinuumOperator op;
    op.eigenvectors = Eigen::MatrixXd::Identity(K, K);
    CVector phi(K);
    const double lo = 1.0, hi = 4.0, dE = (hi - lo) / K;
    for (int k = 0; k < K; ++k) {
        const double E = lo + (k + 0.5) * dE;
        op.eigenvalues.push_back(E);
        op.weights.push_back(dE);
        phi[k] = std::exp(-(E - 2.2) * (E - 2.2));
    }
    const double E0 = 2.0;
    double prev_gap = 1e300;
    double w = 0.2;
    double prev = resolvent_pv(op, E0, w, phi, phi, 1.0).real();
    for (int it = 0; it < 4; ++it) {
        w *= 0.5;
        const double cur = resolvent_pv(op, E0, w, phi, phi, 1.0).real();
        const double gap = std::abs(cur - prev);
        CHECK(gap < prev_gap + 1e-12);  // Cauchy-like contraction
        prev_gap = gap;
        prev = cur;
    }
}

TEST_CASE("Plemelj split of the regularized resolvent is exact with the matching kernel") {
    const auto op = uniform_continuum(1.0, 2.0, 60, 60);
    std::mt19937 rng(31);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
        CVector a(60), b(60);
        for (int i = 0; i < 60; ++i) {
            a[i] = Complex{g(rng), g(rng)};
            b[i] = Complex{g(rng), g(rng)};
        }
        const double E = 1.4, w = 0.07;
        const auto full = resolvent_regularized(op, E, w, a, b, 1.0);
        const auto pv = resolvent_pv(op, E, w, a, b, 1.0);
        const auto sh = shell_projection(op, E, w, a, b, 1.0, DeltaKernel::lorentzian);
        CHECK(std::abs(full - (pv + Complex{0.0, 1.0} * sh)) <
              1e-12 * (1.0 + std::abs(full)));
    }
}

TEST_CASE("matrix assembly: scalar, zero and rank cases") {
    const auto f = freq45();
    const ResonancePair pair{{2, 1}, {0, 0}};  // shell at 1.15
    const auto basis = expand_pair_basis(pair, f);
    REQUIRE(basis.size() == 1);
    const auto op = uniform_continuum(1.0, 1.0, 50, 50);

    CouplingMap cm;
    CVector phi = CVector::Zero(50);
    for (int k = 0; k < 50; ++k) phi[k] = std::exp(-0.05 * (k - 8) * (k - 8));
    cm[basis[0]] = phi;
    const auto R = build_matrices(pair, cm, op, f);
    CHECK(R.T_im.rows() == 1);
    CHECK(R.shell_energy == doctest::Approx(1.15));
    CHECK(R.T_im(0, 0).real() >= 0.0);
    CHECK(R.T_im(0, 0).imag() == doctest::Approx(0.0));

    // zero couplings give zero matrices
    cm[basis[0]] = CVector::Zero(50);
    const auto Rz = build_matrices(pair, cm, op, f);
    CHECK(Rz.T_im.norm() == doctest::Approx(0.0));
    CHECK(Rz.T_re.norm() == doctest::Approx(0.0));

    // inconsistent collapse is rejected
    CouplingMap wrong;
    wrong[{MultiIndex{0, 0}, MultiIndex{1, 1}}] = CVector::Zero(50);
    CHECK_THROWS(build_matrices(pair, wrong, op, f));
}

TEST_CASE("independent shell traces make T_im positive definite") {
    FrequencySpec f;
    f.m = 1.0;
    f.omegas = {0.45, 0.25};
    f.multiplicities = {2, 1};  // degenerate: basis has several elements
    const ResonancePair pair{{2, 1}, {0, 0}};
    const auto basis = expand_pair_basis(pair, f);
    REQUIRE(basis.size() == 3);
    std::mt19937 rng(77);
    const auto op = uniform_continuum(1.0, 1.0, 80, 80);
    const auto cm = synthetic_couplings(basis, 80, rng);
    const auto R = build_matrices(pair, cm, op, f);

    const auto verdict = check_fgr(R.T_im);
    CHECK(verdict.definite);
    CHECK((R.T_im - R.T_im.adjoint()).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((R.T_re - R.T_re.adjoint()).cwiseAbs().maxCoeff() < 1e-10);

    // parallel assembly matches the serial reference bitwise
    const auto Rs = build_matrices_serial(pair, cm, op, f);
    CHECK((R.T_im - Rs.T_im).cwiseAbs().maxCoeff() == 0.0);
    CHECK((R.T_re - Rs.T_re).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("definiteness verdicts") {
    CHECK(check_fgr(CMatrix::Identity(3, 3)).definite);

    CMatrix gram(2, 2);  // rank-1 Gram matrix of (1, 1)
    gram << 1.0, 1.0, 1.0, 1.0;
    const auto v = check_fgr(gram);
    CHECK_FALSE(v.definite);
    REQUIRE(v.near_null.size() == 2);
    CHECK(std::abs(v.near_null[0] + v.near_null[1]) < 1e-10);  // orthogonal to (1,1)

    CHECK_FALSE(check_fgr(CMatrix::Zero(1, 1)).definite);
}

TEST_CASE("normalized quadratic form") {
    const CMatrix I2 = CMatrix::Identity(2, 2);
    CVector gamma(2);
    gamma << Complex{0.6, 0.0}, Complex{0.0, 0.8};  // |gamma|^2 = 1
    CHECK(c_lambda_rho(gamma, I2, 1.0) == doctest::Approx(1.0));
    CHECK(c_lambda_rho(gamma, 2.0 * I2, 1.0) == doctest::Approx(2.0));

    // Rayleigh bounds for a generic Hermitian PSD matrix
    CMatrix T(2, 2);
    T << 2.0, Complex{0.3, 0.1}, Complex{0.3, -0.1}, 1.0;
    Eigen::SelfAdjointEigenSolver<CMatrix> es(T);
    std::mt19937 rng(5);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int t = 0; t < 200; ++t) {
        CVector v(2);
        v << Complex{g(rng), g(rng)}, Complex{g(rng), g(rng)};
        const double q = c_lambda_rho(v, T, v.squaredNorm());
        CHECK(q >= es.eigenvalues().minCoeff() - 1e-12);
        CHECK(q <= es.eigenvalues().maxCoeff() + 1e-12);
    }
    CHECK_THROWS(c_lambda_rho(gamma, I2, 0.0));
}

TEST_CASE("random quadratic forms against T_im stay nonnegative") {
    FrequencySpec f = freq45();
    const ResonancePair pair{{3, 0}, {0, 0}};
    const auto basis = expand_pair_basis(pair, f);
    std::mt19937 rng(13);
    const auto op = uniform_continuum(1.0, 1.5, 60, 60);
    const auto cm = synthetic_couplings(basis, 60, rng);
    const auto R = build_matrices(pair, cm, op, f);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int t = 0; t < 1000; ++t) {
        CVector v(R.T_im.rows());
        for (int i = 0; i < v.size(); ++i) v[i] = Complex{g(rng), g(rng)};
        CHECK((v.adjoint() * (R.T_im * v))(0).real() >= -1e-10);
    }
}
