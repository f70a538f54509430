#include "kgflow/normalform.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace kgflow {

SparsePolynomial poisson_bracket(const SparsePolynomial& P, const SparsePolynomial& Q) {
    P.check_context(Q);
    SparsePolynomial r(P.context());
    const Complex i{0.0, 1.0};
    for (int a = 0; a < P.slots(); ++a) {
        r = r + (P.diff_xi(a) * Q.diff_xibar(a)) * i;
        r = r - (P.diff_xibar(a) * Q.diff_xi(a)) * i;
    }
    return r;
}

HomologicalSplit split_normal_form(const SparsePolynomial& K, double tol_gap,
                                   double divisor_floor) {
    HomologicalSplit s;
    s.Z = SparsePolynomial(K.context());
    s.chi = SparsePolynomial(K.context());
    const Complex i{0.0, 1.0};
    for (const auto& [key, coeff] : K.terms()) {
        const double divisor = K.omega_dot(key);
        if (std::abs(divisor) <= tol_gap) {
            s.Z.add_term(key, coeff);
        } else {
            if (std::abs(divisor) < divisor_floor) s.small_divisors.emplace_back(key, divisor);
            s.chi.add_term(key, i * coeff / divisor);
        }
    }
    return s;
}

SparsePolynomial lie_transform(const SparsePolynomial& H, const SparsePolynomial& chi,
                               int max_degree) {
    H.check_context(chi);
    if (!chi.empty() && chi.min_degree() < 3)
        throw std::invalid_argument("lie_transform: generator must have degree >= 3");
    SparsePolynomial sum = H.truncate_degree(max_degree);
    SparsePolynomial term = sum;
    double factorial = 1.0;
    for (int k = 1; !term.empty(); ++k) {
        term = poisson_bracket(chi, term).truncate_degree(max_degree);
        factorial *= k;
        sum = sum + term * Complex{1.0 / factorial, 0.0};
        if (term.empty()) break;
    }
    return sum;
}

NormalFormResult birkhoff(const SparsePolynomial& H_P, int steps, int max_degree) {
    if (!H_P.empty() && H_P.min_degree() < 4)
        throw std::invalid_argument("birkhoff: interaction must have minimum degree 4");
    if (max_degree < 0) max_degree = 2 * steps + 6;

    NormalFormResult res;
    res.Z0 = SparsePolynomial(H_P.context());
    res.achieved_order = 2 * steps + 4;

    const SparsePolynomial H_L = quadratic_action(H_P.context());
    SparsePolynomial work = H_P.truncate_degree(max_degree);

    for (int s = 1; s <= steps; ++s) {
        const int shell = 2 * s + 2;
        const SparsePolynomial K = work.select_degree(shell);
        HomologicalSplit split = split_normal_form(K);
        res.small_divisors.insert(res.small_divisors.end(), split.small_divisors.begin(),
                                  split.small_divisors.end());
        res.generators.push_back(split.chi);
        if (!split.chi.empty()) {
            // conjugate the full Hamiltonian; the quadratic part transforms the
            // degree-(2s+2) shell into its resonant projection
            SparsePolynomial total = lie_transform(H_L + work, split.chi, max_degree);
            work = total - H_L;
        }
        // by construction the shell now carries only resonant terms
        res.Z0 = res.Z0 + work.select_degree(shell);
    }
    SparsePolynomial rem(H_P.context());
    for (const auto& [key, coeff] : work.terms())
        if (key.degree() >= 2 * steps + 4) rem.add_term(key, coeff);
    res.remainder = rem;
    return res;
}

Pseudo1dReport check_pseudo_1d(const SparsePolynomial& Z0, const FrequencySpec& freq,
                               double tol) {
    if (!Z0.is_real(1e-9))
        throw std::invalid_argument("check_pseudo_1d: Z0 is not real");
    const auto slot_modes = freq.slot_modes();
    if (static_cast<int>(slot_modes.size()) != Z0.slots())
        throw std::invalid_argument("check_pseudo_1d: context mismatch with FrequencySpec");

    Pseudo1dReport rep;
    for (int j = 0; j < freq.n_modes(); ++j) {
        SparsePolynomial action(Z0.context());
        for (int a = 0; a < Z0.slots(); ++a) {
            if (slot_modes[static_cast<size_t>(a)] != j) continue;
            MonomialKey k;
            k.mu.assign(static_cast<size_t>(Z0.slots()), 0);
            k.nu.assign(static_cast<size_t>(Z0.slots()), 0);
            k.mu[static_cast<size_t>(a)] = 1;
            k.nu[static_cast<size_t>(a)] = 1;
            action.add_term(k, 1.0);
        }
        SparsePolynomial bracket = poisson_bracket(action, Z0);
        if (bracket.max_abs_coeff() > tol) {
            rep.ok = false;
            rep.failing_modes.push_back(j);
            rep.residuals.push_back(bracket);
        }
    }
    return rep;
}

std::string Pseudo1dReport::summary() const {
    if (ok) return "pseudo-1d cancellation holds for every eigenspace";
    std::ostringstream os;
    os << "pseudo-1d cancellation FAILS for mode(s):";
    for (size_t i = 0; i < failing_modes.size(); ++i)
        os << ' ' << failing_modes[i] + 1 << " [" << residuals[i].str() << "]";
    return os.str();
}

SparsePolynomial build_quartic_hamiltonian(const std::vector<double>& overlaps,
                                           const FrequencySpec& freq) {
    const auto w = freq.slot_omegas();
    const size_t L = w.size();
    if (overlaps.size() != L * L * L * L)
        throw std::invalid_argument("build_quartic_hamiltonian: tensor size must be L^4");
    auto I = [&](size_t a, size_t b, size_t c, size_t d) -> double {
        return overlaps[((a * L + b) * L + c) * L + d];
    };
    for (size_t a = 0; a < L; ++a)
        for (size_t b = 0; b < L; ++b)
            for (size_t c = 0; c < L; ++c)
                for (size_t d = 0; d < L; ++d) {
                    const double ref = I(a, b, c, d);
                    if (std::abs(I(a, b, d, c) - ref) > 1e-10 ||
                        std::abs(I(a, c, b, d) - ref) > 1e-10 ||
                        std::abs(I(b, a, c, d) - ref) > 1e-10 ||
                        std::abs(I(d, c, b, a) - ref) > 1e-10)
                        throw std::invalid_argument(
                            "build_quartic_hamiltonian: overlap tensor is not symmetric");
                }

    SparsePolynomial H(w);
    std::vector<size_t> idx(4);
    MonomialKey key;
    for (idx[0] = 0; idx[0] < L; ++idx[0])
        for (idx[1] = 0; idx[1] < L; ++idx[1])
            for (idx[2] = 0; idx[2] < L; ++idx[2])
                for (idx[3] = 0; idx[3] < L; ++idx[3]) {
                    double coeff = -0.25 * I(idx[0], idx[1], idx[2], idx[3]);
                    if (coeff == 0.0) continue;
                    for (size_t s = 0; s < 4; ++s) coeff /= std::sqrt(2.0 * w[idx[s]]);
                    // expand prod (xi + xibar): one bit per factor
                    for (int bits = 0; bits < 16; ++bits) {
                        key.mu.assign(L, 0);
                        key.nu.assign(L, 0);
                        for (int s = 0; s < 4; ++s) {
                            if (bits & (1 << s))
                                key.nu[idx[static_cast<size_t>(s)]] += 1;
                            else
                                key.mu[idx[static_cast<size_t>(s)]] += 1;
                        }
                        H.add_term(key, coeff);
                    }
                }
    return H;
}

}  // namespace kgflow
