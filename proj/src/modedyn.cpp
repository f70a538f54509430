#include "kgflow/modedyn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace kgflow {

namespace {

double monomial_power(const Vector& X, const ResonancePair& p) {
    double v = 1.0;
    for (int j = 0; j < X.size(); ++j) {
        const int e = p.lambda[static_cast<size_t>(j)] + p.rho[static_cast<size_t>(j)];
        for (int q = 0; q < e; ++q) v *= X[j];
    }
    return v;
}

Vector clamped(const Vector& X, const OdeSystem& sys) {
    Vector Y = X;
    for (int j = 0; j < Y.size(); ++j)
        if (Y[j] < 0.0) {
            Y[j] = 0.0;
            ++sys.clamp_events;
        }
    return Y;
}

double r_envelope(double t, const OdeSystem& sys) {
    const PerturbationSpec& ps = sys.pert;
    if (ps.r_prefactor == 0.0) return 0.0;
    const double d = sys.delta();
    const double Y = comparison_Y(t, ps.eps, sys.expo.N.back());
    const double W = comparison_W(t, ps.eps, sys.expo.kappa);
    return ps.r_prefactor * (std::pow(ps.eps, 2.0 - d) * std::sqrt(Y) * W * std::sqrt(W) +
                             std::pow(ps.eps, 3.0) * std::pow(1.0 + t, -9.0 / 8.0) *
                                 std::sqrt(Y) * std::sqrt(W));
}

}  // namespace

OdeSystem OdeSystem::make(const FrequencySpec& freq, std::vector<ResonancePair> lambda_star,
                          std::vector<ResonancePair> lambda_full,
                          std::vector<double> coefficients) {
    OdeSystem sys;
    sys.freq = freq;
    sys.lambda_star = std::move(lambda_star);
    sys.lambda_full = lambda_full.empty() ? sys.lambda_star : std::move(lambda_full);
    if (coefficients.empty())
        sys.coefficients.assign(sys.lambda_star.size(), 1.0);
    else if (coefficients.size() == sys.lambda_star.size())
        sys.coefficients = std::move(coefficients);
    else
        throw std::invalid_argument("OdeSystem: coefficient count mismatch");
    sys.c_hat.assign(static_cast<size_t>(freq.n_modes()), 1.0);
    sys.expo = compute_exponents(freq, sys.lambda_full);
    return sys;
}

Vector rhs_X(double t, const Vector& X, const OdeSystem& sys) {
    const Vector Xc = clamped(X, sys);
    const int n = sys.n();
    Vector dX = Vector::Zero(n);
    double power_sum = 0.0;        // sum over Lambda* of X^{l+r}
    Vector weighted = Vector::Zero(n);  // sum of X^{l+r} (l_j + r_j)
    for (size_t i = 0; i < sys.lambda_star.size(); ++i) {
        const ResonancePair& p = sys.lambda_star[i];
        const double mono = monomial_power(Xc, p);
        const double c = sys.coefficients[i];
        power_sum += mono;
        for (int j = 0; j < n; ++j) {
            dX[j] -= c * (p.lambda[static_cast<size_t>(j)] - p.rho[static_cast<size_t>(j)]) * mono;
            weighted[j] += mono * (p.lambda[static_cast<size_t>(j)] + p.rho[static_cast<size_t>(j)]);
        }
    }
    if (sys.pert.p_prefactor != 0.0) {
        const double Xmax = Xc.size() ? Xc.maxCoeff() : 0.0;
        for (int j = 0; j < n; ++j)
            dX[j] += sys.pert.p_prefactor * (Xmax * weighted[j] + Xc[j] * power_sum);
    }
    const double R = r_envelope(t, sys);
    for (int j = 0; j < n; ++j) dX[j] += R;
    return dX;
}

Vector to_tilde(const Vector& X, const FrequencySpec& freq) {
    Vector t = Vector::Zero(X.size());
    double acc = 0.0;
    for (int j = 0; j < X.size(); ++j) {
        acc += freq.omegas[static_cast<size_t>(j)] * X[j];
        t[j] = acc;
    }
    return t;
}

Vector to_hat(const Vector& tilde, double accumulator, double C0) {
    return tilde * std::exp(-C0 * accumulator);
}

Vector rhs_hat(double t, const Vector& Xh, const OdeSystem& sys) {
    const Vector Xc = clamped(Xh, sys);
    const int n = sys.n();
    Vector dX = Vector::Zero(n);
    double star_sum = 0.0;
    for (const auto& p : sys.lambda_star) star_sum += monomial_power(Xc, p);
    for (const auto& p : sys.lambda_full) {
        const double mono = monomial_power(Xc, p);
        int prefix = 0;
        for (int j = 0; j < n; ++j) {
            prefix += p.lambda[static_cast<size_t>(j)] + p.rho[static_cast<size_t>(j)];
            dX[j] -= sys.c_hat[static_cast<size_t>(j)] * prefix * mono;
        }
    }
    const double R = r_envelope(t, sys);
    for (int j = 0; j < n; ++j)
        dX[j] += -sys.c_hat[static_cast<size_t>(j)] * Xc[j] * star_sum + R;
    return dX;
}

std::vector<double> ModeTrajectory::component(int j) const {
    std::vector<double> v;
    v.reserve(X.size());
    for (const auto& x : X) v.push_back(x[j]);
    return v;
}

std::vector<double> ModeTrajectory::hat_component(int j) const {
    std::vector<double> v;
    v.reserve(X_hat.size());
    for (const auto& x : X_hat) v.push_back(x[j]);
    return v;
}

std::vector<double> ModeTrajectory::tilde_component(int j) const {
    std::vector<double> v;
    v.reserve(X_tilde.size());
    for (const auto& x : X_tilde) v.push_back(x[j]);
    return v;
}

double ModeTrajectory::max_growth(int j) const {
    if (X.empty() || X.front()[j] <= 0.0) return 0.0;
    double peak = 0.0;
    for (const auto& x : X) peak = std::max(peak, x[j]);
    return peak / X.front()[j];
}

namespace {

ModeTrajectory run_system(const OdeSystem& sys, const Vector& start, double t_end,
                          double rel_tol, int samples, bool hat_system) {
    const int n = sys.n();
    if (start.size() != n) throw std::invalid_argument("integrate: X0 dimension mismatch");
    for (int j = 0; j < n; ++j)
        if (start[j] < 0.0) throw std::invalid_argument("integrate: negative initial data");

    // state = (X_1..X_n, accumulator of sum_{Lambda*} Xt^{l+r})
    auto rhs_tau = [&](double tau, const Vector& s) {
        const double t = std::expm1(tau);
        const Vector X = s.head(n);
        Vector ds(n + 1);
        ds.head(n) = hat_system ? rhs_hat(t, X, sys) : rhs_X(t, X, sys);
        Vector ref = hat_system ? X : to_tilde(X.cwiseMax(0.0), sys.freq);
        double power_sum = 0.0;
        for (const auto& p : sys.lambda_star) power_sum += monomial_power(ref, p);
        ds[n] = power_sum;
        return Vector((1.0 + t) * ds);
    };

    ModeTrajectory traj;
    Vector s0(n + 1);
    s0.head(n) = start;
    s0[n] = 0.0;

    OdeOptions opts;
    opts.rel_tol = rel_tol;
    opts.abs_tol = 1e-60;
    opts.first_step = 1e-6;
    opts.max_step = 0.25;

    const double tau_end = std::log1p(t_end);
    std::vector<double> taus(static_cast<size_t>(samples));
    for (int i = 0; i < samples; ++i) taus[static_cast<size_t>(i)] = tau_end * i / (samples - 1);

    auto guard = [&](const Vector& s) {
        for (int j = 0; j < n; ++j)
            if (s[j] < 0.0) return false;
        return true;
    };

    Vector prev_hat;
    bool have_prev = false;
    auto on_accept = [&](double tau, const Vector& s) {
        ++traj.accepted_steps;
        const double t = std::expm1(tau);
        (void)t;
        Vector hat;
        if (hat_system) {
            hat = s.head(n);
        } else {
            hat = to_hat(to_tilde(s.head(n), sys.freq), s[n], sys.C0);
        }
        if (have_prev) {
            for (int j = 0; j < n; ++j) {
                const double rise = hat[j] - prev_hat[j];
                if (rise > 0.0) {
                    ++traj.hat_increase_events;
                    if (prev_hat[j] > 0.0)
                        traj.max_hat_increase = std::max(traj.max_hat_increase, rise / prev_hat[j]);
                }
            }
        }
        prev_hat = hat;
        have_prev = true;
    };

    auto on_output = [&](double tau, const Vector& s) {
        const double t = std::expm1(tau);
        traj.times.push_back(t);
        const Vector X = s.head(n);
        traj.X.push_back(X);
        const Vector tilde = hat_system ? X : to_tilde(X, sys.freq);
        traj.X_tilde.push_back(tilde);
        traj.X_hat.push_back(hat_system ? X : to_hat(tilde, s[n], sys.C0));
        traj.accumulator.push_back(s[n]);
    };

    integrate_dopri5(rhs_tau, s0, taus, on_output, opts, guard, on_accept);

    // transient-increase bookkeeping on the sampled raw trajectory
    for (size_t k = 1; k < traj.X.size(); ++k)
        for (int j = 0; j < n; ++j)
            if (traj.X[k][j] > traj.X[k - 1][j] * (1.0 + 1e-9) &&
                traj.X[k][j] - traj.X[k - 1][j] > 1e-30)
                ++traj.x_increase_events;
    return traj;
}

}  // namespace

ModeTrajectory integrate(const OdeSystem& sys, const Vector& X0, double t_end, double rel_tol,
                         int samples) {
    return run_system(sys, X0, t_end, rel_tol, samples, false);
}

ModeTrajectory integrate_hat(const OdeSystem& sys, const Vector& Xh0, double t_end,
                             double rel_tol, int samples) {
    return run_system(sys, Xh0, t_end, rel_tol, samples, true);
}

double comparison_Y(double t, double eps, int N_n) {
    const double a = 2.0 * N_n * std::pow(eps, 4.0 * N_n);
    return eps * eps * std::pow(1.0 + a * t, -1.0 / (2.0 * N_n));
}

double comparison_W(double t, double eps, double kappa) {
    const double w0 = std::pow(eps, kappa);
    return w0 / (1.0 + w0 * t);
}

double fit_decay_exponent(const std::vector<double>& times, const std::vector<double>& values,
                          double t_lo, double t_hi) {
    if (!(t_hi >= 10.0 * t_lo) || t_lo <= 0.0)
        throw std::invalid_argument("fit_decay_exponent: window must span at least one decade");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    long count = 0;
    for (size_t k = 0; k < times.size(); ++k) {
        if (times[k] < t_lo || times[k] > t_hi || values[k] <= 0.0) continue;
        const double lx = std::log(times[k]), ly = std::log(values[k]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++count;
    }
    if (count < 3) throw std::invalid_argument("fit_decay_exponent: too few samples in window");
    const double denom = count * sxx - sx * sx;
    if (denom == 0.0) return 0.0;
    return (count * sxy - sx * sy) / denom;
}

bool BoundReport::all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const BoundCheck& c) { return c.pass; });
}

std::string BoundReport::summary() const {
    std::ostringstream os;
    for (const auto& c : checks) {
        os << (c.pass ? "  pass  " : "  FAIL  ") << c.name << "  C = " << c.constant;
        if (!c.detail.empty()) os << "  (" << c.detail << ")";
        os << '\n';
    }
    return os.str();
}

BoundReport verify_theorem_bounds(const ModeTrajectory& traj, const OdeSystem& sys, double eps) {
    BoundReport rep;
    const int n = sys.n();
    const int Nn = sys.expo.N.back();
    const double kappa = sys.expo.kappa;
    const double delta = sys.delta();

    // (a) Xh_j <= C Y^alpha_j
    for (int j = 0; j < n; ++j) {
        double C = 0.0;
        for (size_t k = 0; k < traj.times.size(); ++k) {
            const double Y = comparison_Y(traj.times[k], eps, Nn);
            C = std::max(C, traj.X_hat[k][j] / std::pow(Y, sys.expo.alpha[static_cast<size_t>(j)]));
        }
        rep.checks.push_back({"Xhat_" + std::to_string(j + 1) + " <= C Y^alpha", C,
                              C <= rep.suspicious_constant, ""});
    }
    // (b) c Y <= |Xh| <= C Y
    {
        double Cup = 0.0, clo = 1e300;
        for (size_t k = 0; k < traj.times.size(); ++k) {
            const double Y = comparison_Y(traj.times[k], eps, Nn);
            const double norm = traj.X_hat[k].maxCoeff();
            Cup = std::max(Cup, norm / Y);
            clo = std::min(clo, norm / Y);
        }
        rep.checks.push_back({"|Xhat| <= C Y", Cup, Cup <= rep.suspicious_constant, ""});
        rep.checks.push_back({"|Xhat| >= c Y", clo, clo >= 1e-3, "lower constant"});
    }
    // (c) Xh^{l+r} <= C Y W over Lambda*
    for (const auto& p : sys.lambda_star) {
        double C = 0.0;
        for (size_t k = 0; k < traj.times.size(); ++k) {
            const double Y = comparison_Y(traj.times[k], eps, Nn);
            const double W = comparison_W(traj.times[k], eps, kappa);
            C = std::max(C, monomial_power(traj.X_hat[k], p) / (Y * W));
        }
        rep.checks.push_back({"Xhat^" + p.str() + " <= C Y W", C, C <= rep.suspicious_constant, ""});
    }
    // (d) low-mode pairs decay like Y^{1+delta}/<t>
    for (const auto& p : sys.lambda_star) {
        bool low = false;
        for (int j = 0; j < sys.expo.j0; ++j)
            if (p.lambda[static_cast<size_t>(j)] + p.rho[static_cast<size_t>(j)] != 0) low = true;
        if (!low) continue;
        double C = 0.0;
        for (size_t k = 0; k < traj.times.size(); ++k) {
            const double Y = comparison_Y(traj.times[k], eps, Nn);
            C = std::max(C, monomial_power(traj.X_hat[k], p) * (1.0 + traj.times[k]) /
                                std::pow(Y, 1.0 + delta));
        }
        rep.checks.push_back(
            {"Xhat^" + p.str() + " <= C Y^(1+d)/<t>", C, C <= rep.suspicious_constant, ""});
    }
    // (e) accumulator bound
    {
        const double C = traj.accumulator.back() / eps;
        rep.checks.push_back({"int sum Xt^{l+r} <= 10 eps", C, C <= 10.0, ""});
    }
    return rep;
}

CVector rhs_eta(const CVector& eta, const SparsePolynomial& Z0,
                const std::vector<EtaCoupling>& couplings, const FrequencySpec& freq) {
    if (!Z0.empty() && !Z0.is_real(1e-9))
        throw std::invalid_argument("rhs_eta: Z0 must be real");
    const auto slot_w = freq.slot_omegas();
    const int L = static_cast<int>(slot_w.size());
    if (eta.size() != L) throw std::invalid_argument("rhs_eta: eta dimension mismatch");

    const Complex I{0.0, 1.0};
    CVector d = CVector::Zero(L);
    for (int a = 0; a < L; ++a) d[a] = -I * slot_w[static_cast<size_t>(a)] * eta[a];

    if (!Z0.empty()) {
        std::vector<Complex> pt(eta.data(), eta.data() + L);
        for (int a = 0; a < L; ++a) d[a] += -I * evaluate(Z0.diff_xibar(a), pt);
    }

    auto mono = [&](const MultiIndex& mu, const MultiIndex& nu, int drop_nu_slot) {
        Complex v{1.0, 0.0};
        for (int a = 0; a < L; ++a) {
            for (int q = 0; q < mu[static_cast<size_t>(a)]; ++q) v *= eta[a];
            int e = nu[static_cast<size_t>(a)];
            if (a == drop_nu_slot) e -= 1;
            for (int q = 0; q < e; ++q) v *= std::conj(eta[a]);
        }
        return v;
    };

    for (const auto& cpl : couplings) {
        const size_t B = cpl.basis.size();
        for (size_t i = 0; i < B; ++i) {
            const auto& [mu, nu] = cpl.basis[i];
            for (size_t ip = 0; ip < B; ++ip) {
                const auto& [mup, nup] = cpl.basis[ip];
                // full monomial eta^{mu+nu'} conj(eta)^{nu+mu'} / conj(eta_jk)
                MultiIndex up(mu), down(nu);
                for (int a = 0; a < L; ++a) {
                    up[static_cast<size_t>(a)] += nup[static_cast<size_t>(a)];
                    down[static_cast<size_t>(a)] += mup[static_cast<size_t>(a)];
                }
                const Complex c = cpl.T(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(ip));
                const Complex cbar = std::conj(cpl.T(static_cast<Eigen::Index>(ip), static_cast<Eigen::Index>(i)));
                for (int a = 0; a < L; ++a) {
                    const int nu_a = nu[static_cast<size_t>(a)];
                    const int mup_a = mup[static_cast<size_t>(a)];
                    if (nu_a == 0 && mup_a == 0) continue;
                    const Complex base = mono(up, down, a);
                    d[a] += I * base * (static_cast<double>(nu_a) * c + static_cast<double>(mup_a) * cbar);
                }
            }
        }
    }
    return d;
}

Vector eta_action_derivative(const CVector& eta, const SparsePolynomial& Z0,
                             const std::vector<EtaCoupling>& couplings,
                             const FrequencySpec& freq) {
    const CVector d = rhs_eta(eta, Z0, couplings, freq);
    const auto modes = freq.slot_modes();
    Vector dX = Vector::Zero(freq.n_modes());
    for (int a = 0; a < eta.size(); ++a)
        dX[modes[static_cast<size_t>(a)]] += (std::conj(eta[a]) * d[a]).real();
    return dX;
}

std::vector<Vector> integrate_eta(const CVector& eta0, const SparsePolynomial& Z0,
                                  const std::vector<EtaCoupling>& couplings,
                                  const FrequencySpec& freq, const std::vector<double>& times,
                                  double rel_tol) {
    const int L = static_cast<int>(eta0.size());
    auto pack = [L](const CVector& e) {
        Vector v(2 * L);
        for (int a = 0; a < L; ++a) {
            v[2 * a] = e[a].real();
            v[2 * a + 1] = e[a].imag();
        }
        return v;
    };
    auto unpack = [L](const Vector& v) {
        CVector e(L);
        for (int a = 0; a < L; ++a) e[a] = Complex{v[2 * a], v[2 * a + 1]};
        return e;
    };
    auto rhs = [&](double, const Vector& v) { return pack(rhs_eta(unpack(v), Z0, couplings, freq)); };

    const auto modes = freq.slot_modes();
    std::vector<Vector> out;
    auto on_output = [&](double, const Vector& v) {
        const CVector e = unpack(v);
        Vector X = Vector::Zero(freq.n_modes());
        for (int a = 0; a < L; ++a)
            X[modes[static_cast<size_t>(a)]] += 0.5 * std::norm(e[a]);
        out.push_back(X);
    };

    OdeOptions opts;
    opts.rel_tol = rel_tol;
    opts.abs_tol = 1e-14;
    opts.max_step = 0.2;  // resolve the omega-rotation
    integrate_dopri5(rhs, pack(eta0), times, on_output, opts);
    return out;
}

}  // namespace kgflow
