#include "kgflow/kgsim.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace kgflow {

std::vector<double> Grid::coordinates() const {
    std::vector<double> x(static_cast<size_t>(points));
    for (int i = 0; i < points; ++i) x[static_cast<size_t>(i)] = -half_length + h() * i;
    return x;
}

void Grid::validate() const {
    if (points < 8 || points % 2 != 0)
        throw std::invalid_argument("Grid: point count must be even and >= 8");
    if (half_length <= 0.0) throw std::invalid_argument("Grid: nonpositive half length");
}

double PoschlTeller::operator()(double x) const {
    const double s = 1.0 / std::cosh(x / a);
    return -V0 * s * s;
}

std::vector<double> PoschlTeller::analytic_eigenvalues() const {
    // -V0 sech^2(x/a) supports s = (sqrt(4 V0 a^2 + 1) - 1)/2 and levels
    // -(s - k)^2 / a^2 for integer k with s - k > 0.
    const double s = 0.5 * (std::sqrt(4.0 * V0 * a * a + 1.0) - 1.0);
    std::vector<double> ev;
    for (int k = 0; s - k > 1e-12; ++k) {
        const double q = (s - k) / a;
        ev.push_back(-q * q);
    }
    return ev;
}

std::vector<double> SpectralDecomposition::bound_frequencies() const {
    std::vector<double> w;
    for (int idx : bound_indices) w.push_back(std::sqrt(mass * mass + evals[idx]));
    std::sort(w.rbegin(), w.rend());
    return w;
}

FrequencySpec SpectralDecomposition::frequency_spec(double degeneracy_tol) const {
    FrequencySpec f;
    f.m = mass;
    for (double w : bound_frequencies()) {
        if (!f.omegas.empty() && std::abs(f.omegas.back() - w) <= degeneracy_tol) {
            f.multiplicities.back() += 1;
        } else {
            f.omegas.push_back(w);
            f.multiplicities.push_back(1);
        }
    }
    return f;
}

double SpectralDecomposition::mode_omega(int j) const {
    return std::sqrt(mass * mass + evals[mode_column(j)]);
}

Eigen::VectorXd SpectralDecomposition::bound_state(int j) const {
    return evecs.col(mode_column(j)) / std::sqrt(grid.h());
}

namespace {

void matvec(const Eigen::MatrixXd& A, const double* x, double* y, bool transpose,
            bool parallel) {
    const int rows = static_cast<int>(A.rows());
    const int cols = static_cast<int>(A.cols());
    if (!transpose) {
#pragma omp parallel for schedule(static) if (parallel)
        for (int i = 0; i < rows; ++i) {
            double acc = 0.0;
            for (int k = 0; k < cols; ++k) acc += A(i, k) * x[k];
            y[i] = acc;
        }
    } else {
#pragma omp parallel for schedule(static) if (parallel)
        for (int i = 0; i < cols; ++i) {
            double acc = 0.0;
            for (int k = 0; k < rows; ++k) acc += A(k, i) * x[k];
            y[i] = acc;
        }
    }
}

Eigen::VectorXd apply(const Eigen::MatrixXd& A, const Eigen::VectorXd& x, bool transpose,
                      bool parallel) {
    Eigen::VectorXd y(transpose ? A.cols() : A.rows());
    matvec(A, x.data(), y.data(), transpose, parallel);
    return y;
}

}  // namespace

Eigen::VectorXd SpectralDecomposition::to_modes(const Eigen::VectorXd& u) const {
    return apply(evecs, u, true, true);
}
Eigen::VectorXd SpectralDecomposition::from_modes(const Eigen::VectorXd& c) const {
    return apply(evecs, c, false, true);
}
Eigen::VectorXd SpectralDecomposition::to_modes_serial(const Eigen::VectorXd& u) const {
    return apply(evecs, u, true, false);
}
Eigen::VectorXd SpectralDecomposition::from_modes_serial(const Eigen::VectorXd& c) const {
    return apply(evecs, c, false, false);
}

Eigen::VectorXd SpectralDecomposition::project_continuum(const Eigen::VectorXd& u) const {
    Eigen::VectorXd w = u;
    for (int idx : bound_indices) {
        const Eigen::VectorXd phi = evecs.col(idx);
        w -= phi.dot(u) * phi;
    }
    return w;
}

SpectralDecomposition discretize(const std::function<double(double)>& V, const Grid& grid,
                                 double mass, double eig_tol) {
    grid.validate();
    const int M = grid.points;
    const double h = grid.h();
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(M, M);
    const double inv_h2 = 1.0 / (h * h);
    const auto x = grid.coordinates();
    for (int i = 0; i < M; ++i) {
        H(i, i) = 2.0 * inv_h2 + V(x[static_cast<size_t>(i)]);
        H(i, (i + 1) % M) = -inv_h2;
        H(i, (i + M - 1) % M) = -inv_h2;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    if (es.info() != Eigen::Success) throw std::runtime_error("discretize: eigensolver failed");

    SpectralDecomposition spec;
    spec.grid = grid;
    spec.mass = mass;
    spec.evals = es.eigenvalues();
    spec.evecs = es.eigenvectors();
    if (spec.evals[0] + mass * mass <= 0.0)
        throw std::invalid_argument("discretize: H + m^2 is not positive definite");
    spec.beta = (spec.evals.array() + mass * mass).sqrt();
    for (int i = 0; i < M; ++i)
        if (spec.evals[i] < -eig_tol) spec.bound_indices.push_back(i);
    return spec;
}

AbsorberProfile AbsorberProfile::make(const Grid& grid, double fraction, double strength) {
    AbsorberProfile ap;
    ap.onset = grid.half_length * (1.0 - fraction);
    const auto x = grid.coordinates();
    ap.sigma = Eigen::VectorXd::Zero(grid.points);
    const double width = grid.half_length - ap.onset;
    for (int i = 0; i < grid.points; ++i) {
        const double d = (std::abs(x[static_cast<size_t>(i)]) - ap.onset) / width;
        if (d > 0.0) ap.sigma[i] = strength * d * d * d;
    }
    return ap;
}

const Eigen::ArrayXd& AbsorberProfile::damping(double tau) const {
    if (cached_tau_ != tau) {
        cached_tau_ = tau;
        damp_ = (-tau * sigma.array()).exp();
    }
    return damp_;
}

double default_dt(const Grid& grid, double min_potential) {
    const double h = grid.h();
    return 0.5 * h / std::sqrt(1.0 + (M_PI / h) * (M_PI / h) + std::abs(min_potential));
}

const SpectralDecomposition::RotationCache& SpectralDecomposition::rotation(double dt) const {
    if (rotation_.dt != dt) {
        rotation_.dt = dt;
        rotation_.cosb = (beta.array() * dt).cos();
        rotation_.sinb = (beta.array() * dt).sin();
    }
    return rotation_;
}

void step(FieldState& state, double dt, double lambda_nl, const SpectralDecomposition& spec,
          const AbsorberProfile* absorber) {
    auto kick = [&](double tau) {
        if (lambda_nl != 0.0)
            state.v.array() += tau * lambda_nl * state.u.array().cube();
        if (absorber) state.v.array() *= absorber->damping(tau);
    };
    kick(0.5 * dt);

    const auto& rot = spec.rotation(dt);
    Eigen::VectorXd cu = spec.to_modes(state.u);
    Eigen::VectorXd cv = spec.to_modes(state.v);
    for (int k = 0; k < spec.size(); ++k) {
        const double b = spec.beta[k];
        const double cb = rot.cosb[k], sb = rot.sinb[k];
        const double nu = cb * cu[k] + sb / b * cv[k];
        const double nv = -b * sb * cu[k] + cb * cv[k];
        cu[k] = nu;
        cv[k] = nv;
    }
    state.u = spec.from_modes(cu);
    state.v = spec.from_modes(cv);

    kick(0.5 * dt);
    state.t += dt;

    if (!state.u.allFinite() || !state.v.allFinite())
        throw std::runtime_error("step: non-finite field at t = " + std::to_string(state.t));
}

ModeProjection project_modes(const FieldState& state, const SpectralDecomposition& spec) {
    const int nb = spec.n_bound();
    ModeProjection mp;
    mp.q.resize(nb);
    mp.p.resize(nb);
    mp.xi.resize(nb);
    const double h = spec.grid.h();
    mp.Pc_u = state.u;
    mp.Pc_v = state.v;
    for (int j = 0; j < nb; ++j) {
        const Eigen::VectorXd phi = spec.bound_state(j);
        const double w = spec.mode_omega(j);
        mp.q[j] = h * phi.dot(state.u);
        mp.p[j] = h * phi.dot(state.v);
        mp.xi[j] = std::complex<double>{mp.q[j] * std::sqrt(w), mp.p[j] / std::sqrt(w)} / std::sqrt(2.0);
        mp.Pc_u -= (h * phi.dot(state.u)) * phi;
        mp.Pc_v -= (h * phi.dot(state.v)) * phi;
    }
    return mp;
}

double energy(const FieldState& state, const SpectralDecomposition& spec, double lambda_nl) {
    const double h = spec.grid.h();
    const Eigen::VectorXd Hu = spec.from_modes(
        (spec.evals.array() * spec.to_modes(state.u).array()).matrix());
    double e = 0.5 * h * (state.v.squaredNorm() + state.u.dot(Hu) +
                          spec.mass * spec.mass * state.u.squaredNorm());
    e -= 0.25 * lambda_nl * h * state.u.array().pow(4).sum();
    return e;
}

KgRunSummary run_experiment(const KgConfig& cfg, const SpectralDecomposition& spec,
                            std::ostream* csv) {
    const int nb = spec.n_bound();
    if (static_cast<int>(cfg.mode_amplitudes.size()) > nb)
        throw std::invalid_argument("run_experiment: more amplitudes than bound states");

    FieldState state;
    state.u = Eigen::VectorXd::Zero(spec.grid.points);
    state.v = Eigen::VectorXd::Zero(spec.grid.points);
    for (size_t j = 0; j < cfg.mode_amplitudes.size(); ++j)
        state.u += cfg.mode_amplitudes[j] * spec.bound_state(static_cast<int>(j));
    if (cfg.continuum_seed != 0.0) {
        const auto x = spec.grid.coordinates();
        Eigen::VectorXd bump(spec.grid.points);
        for (int i = 0; i < spec.grid.points; ++i) {
            const double r = x[static_cast<size_t>(i)] / 3.0;
            bump[i] = std::exp(-r * r);
        }
        state.u += cfg.continuum_seed * spec.project_continuum(bump);
    }

    const double min_v = cfg.potential(0.0);
    const double dt = cfg.dt > 0.0 ? cfg.dt : default_dt(spec.grid, min_v);
    const long steps = static_cast<long>(std::ceil(cfg.t_end / dt));
    const long output_every =
        cfg.output_every > 0 ? cfg.output_every : std::max<long>(1, steps / 400);

    AbsorberProfile absorber;
    const AbsorberProfile* ap = nullptr;
    if (cfg.absorber) {
        absorber = AbsorberProfile::make(spec.grid, cfg.absorber_fraction, cfg.absorber_strength);
        ap = &absorber;
    }
    // time until outgoing radiation (group speed < 1) can reach the layer
    const double t_quiet = cfg.absorber ? std::max(0.0, absorber.onset - 6.0) : cfg.t_end;

    KgRunSummary out;
    out.dt_used = dt;
    const double h = spec.grid.h();
    const double E0 = energy(state, spec, cfg.lambda_nl);

    auto record = [&]() {
        const ModeProjection mp = project_modes(state, spec);
        out.times.push_back(state.t);
        out.xi_abs.push_back(mp.xi.cwiseAbs());
        out.sup_continuum.push_back(mp.Pc_u.cwiseAbs().maxCoeff());
        out.energies.push_back(energy(state, spec, cfg.lambda_nl));
        out.l2_norms.push_back(std::sqrt(h) * state.u.norm());
        if (csv) {
            (*csv) << state.t;
            for (int j = 0; j < nb; ++j) (*csv) << ',' << std::abs(mp.xi[j]);
            for (int j = 0; j < nb; ++j) (*csv) << ',' << std::abs(mp.q[j]);
            (*csv) << ',' << out.sup_continuum.back() << ',' << out.energies.back() << ','
                   << out.l2_norms.back() << '\n';
        }
    };

    if (csv) {
        (*csv) << "t";
        for (int j = 0; j < nb; ++j) (*csv) << ",abs_xi_" << j + 1;
        for (int j = 0; j < nb; ++j) (*csv) << ",abs_q_" << j + 1;
        (*csv) << ",sup_continuum,energy,l2\n";
    }
    record();
    for (long k = 0; k < steps; ++k) {
        step(state, dt, cfg.lambda_nl, spec, ap);
        ++out.steps;
        if (state.t <= t_quiet) {
            const double drift = std::abs(energy(state, spec, cfg.lambda_nl) - E0) /
                                 std::max(std::abs(E0), 1e-300);
            out.energy_drift_pre_absorber = std::max(out.energy_drift_pre_absorber, drift);
        }
        if ((k + 1) % output_every == 0 || k + 1 == steps) record();
    }
    return out;
}

}  // namespace kgflow
