#include "kgflow/resonance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace kgflow {

int order_of(const MultiIndex& v) {
    int s = 0;
    for (int x : v) s += x;
    return s;
}

std::string ResonancePair::str() const {
    std::ostringstream os;
    os << "(";
    for (size_t i = 0; i < lambda.size(); ++i) os << (i ? "," : "") << lambda[i];
    os << ")|(";
    for (size_t i = 0; i < rho.size(); ++i) os << (i ? "," : "") << rho[i];
    os << ")";
    return os.str();
}

double omega_dot(const ResonancePair& p, const FrequencySpec& freq) {
    double dot = 0.0;
    for (size_t j = 0; j < p.lambda.size(); ++j)
        dot += freq.omegas[j] * (p.lambda[j] - p.rho[j]);
    return dot;
}

bool dominates(const ResonancePair& hi, const ResonancePair& lo) {
    for (size_t j = 0; j < hi.lambda.size(); ++j)
        if (lo.lambda[j] > hi.lambda[j]) return false;
    for (size_t j = 0; j < hi.rho.size(); ++j)
        if (lo.rho[j] > hi.rho[j]) return false;
    return true;
}

bool pair_less(const ResonancePair& a, const ResonancePair& b) {
    const int oa = a.order(), ob = b.order();
    if (oa != ob) return oa < ob;
    if (a.lambda != b.lambda) return a.lambda < b.lambda;
    return a.rho < b.rho;
}

namespace {

// All (lambda, rho) in N^n x N^n with |lambda| + |rho| == degree, visited in
// lexicographic order of the concatenated vector.
template <typename F>
void for_each_pair_of_degree(int n, int degree, F&& visit) {
    std::vector<int> c(static_cast<size_t>(2 * n), 0);
    auto rec = [&](auto&& self, int idx, int remaining) -> void {
        if (idx == 2 * n - 1) {
            c[static_cast<size_t>(idx)] = remaining;
            visit(c);
            return;
        }
        for (int v = remaining; v >= 0; --v) {
            c[static_cast<size_t>(idx)] = v;
            self(self, idx + 1, remaining - v);
        }
    };
    if (n > 0) rec(rec, 0, degree);
}

std::vector<ResonancePair> collect_shell(const FrequencySpec& freq, int degree, double tol) {
    const int n = freq.n_modes();
    std::vector<ResonancePair> shell;
    for_each_pair_of_degree(n, degree, [&](const std::vector<int>& c) {
        double dot = 0.0;
        for (int j = 0; j < n; ++j)
            dot += freq.omegas[static_cast<size_t>(j)] *
                   (c[static_cast<size_t>(j)] - c[static_cast<size_t>(n + j)]);
        if (std::abs(dot - freq.m) <= tol) {
            ResonancePair p{MultiIndex(c.begin(), c.begin() + n), MultiIndex(c.begin() + n, c.end())};
            throw std::domain_error("enumerate_lambda: pair " + p.str() +
                                    " lies on the continuum edge (V4 boundary)");
        }
        if (dot > freq.m + tol) {
            shell.push_back({MultiIndex(c.begin(), c.begin() + n), MultiIndex(c.begin() + n, c.end())});
        }
    });
    return shell;
}

}  // namespace

std::vector<ResonancePair> enumerate_lambda_serial(const FrequencySpec& freq, int max_order,
                                                   double tol) {
    if (max_order % 2 == 0)
        throw std::invalid_argument("enumerate_lambda: max_order must be odd");
    freq.validate();
    std::vector<ResonancePair> out;
    for (int d = 1; d <= max_order; d += 2) {
        auto shell = collect_shell(freq, d, tol);
        std::sort(shell.begin(), shell.end(), pair_less);
        out.insert(out.end(), shell.begin(), shell.end());
    }
    return out;
}

std::vector<ResonancePair> enumerate_lambda(const FrequencySpec& freq, int max_order, double tol) {
    if (max_order % 2 == 0)
        throw std::invalid_argument("enumerate_lambda: max_order must be odd");
    freq.validate();
    const int shells = (max_order + 1) / 2;
    std::vector<std::vector<ResonancePair>> per_shell(static_cast<size_t>(shells));
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (int s = 0; s < shells; ++s) {
        try {
            per_shell[static_cast<size_t>(s)] = collect_shell(freq, 2 * s + 1, tol);
        } catch (...) {
#pragma omp critical
            failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    std::vector<ResonancePair> out;
    for (auto& shell : per_shell) {
        std::sort(shell.begin(), shell.end(), pair_less);
        out.insert(out.end(), shell.begin(), shell.end());
    }
    return out;
}

std::vector<ResonancePair> minimal_set_serial(const std::vector<ResonancePair>& lambda) {
    std::vector<ResonancePair> out;
    for (const auto& p : lambda) {
        bool minimal = true;
        for (const auto& q : lambda) {
            if (&p != &q && dominates(p, q) && !(q == p)) {
                minimal = false;
                break;
            }
        }
        if (minimal) out.push_back(p);
    }
    std::sort(out.begin(), out.end(), pair_less);
    return out;
}

std::vector<ResonancePair> minimal_set(const std::vector<ResonancePair>& lambda) {
    const int64_t count = static_cast<int64_t>(lambda.size());
    std::vector<uint8_t> keep(lambda.size(), 1);
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < count; ++i) {
        const auto& p = lambda[static_cast<size_t>(i)];
        for (const auto& q : lambda) {
            if (dominates(p, q) && !(q == p)) {
                keep[static_cast<size_t>(i)] = 0;
                break;
            }
        }
    }
    std::vector<ResonancePair> out;
    for (size_t i = 0; i < lambda.size(); ++i)
        if (keep[i]) out.push_back(lambda[i]);
    std::sort(out.begin(), out.end(), pair_less);
    return out;
}

ThetaMinimal theta_minimal(const MultiIndex& theta, const FrequencySpec& freq, double tol) {
    ThetaMinimal r;
    r.pair.lambda.resize(theta.size());
    r.pair.rho.resize(theta.size());
    for (size_t j = 0; j < theta.size(); ++j) {
        r.pair.lambda[j] = theta[j] > 0 ? theta[j] : 0;
        r.pair.rho[j] = theta[j] < 0 ? -theta[j] : 0;
    }
    r.dot = omega_dot(r.pair, freq);
    r.in_lambda = (r.pair.order() % 2 == 1) && (r.dot > freq.m + tol);
    return r;
}

StructureReport verify_lambda_star_structure(const std::vector<ResonancePair>& lambda_star) {
    StructureReport rep;
    rep.checked = lambda_star;
    for (const auto& p : lambda_star) {
        const int rho_order = order_of(p.rho);
        if (rho_order > 1) {
            rep.violations.emplace_back(p, "|rho| = " + std::to_string(rho_order) + " exceeds 1");
        } else if (rho_order == 1) {
            int j = 0;
            while (p.rho[static_cast<size_t>(j)] == 0) ++j;
            if (j == 0) rep.violations.emplace_back(p, "rho_1 = 1 (bad resonance in leading mode)");
            for (size_t k = static_cast<size_t>(j); k < p.lambda.size(); ++k)
                if (p.lambda[k] != 0) {
                    rep.violations.emplace_back(
                        p, "lambda_" + std::to_string(k + 1) + " nonzero above rho support");
                    break;
                }
        }
        for (size_t j = 0; j < p.lambda.size(); ++j)
            if (p.lambda[j] - p.rho[j] < 0) rep.bad_resonances.emplace_back(p, static_cast<int>(j));
    }
    return rep;
}

double weighted_cancellation(const ResonancePair& pair, int j, const FrequencySpec& freq) {
    if (j < 0 || j >= freq.n_modes()) throw std::invalid_argument("weighted_cancellation: bad mode");
    double wsum = 0.0;
    int osum = 0;
    for (int k = 0; k <= j; ++k) {
        wsum += freq.omegas[static_cast<size_t>(k)] *
                (pair.lambda[static_cast<size_t>(k)] - pair.rho[static_cast<size_t>(k)]);
        osum += pair.lambda[static_cast<size_t>(k)] + pair.rho[static_cast<size_t>(k)];
    }
    if (osum > 0 && wsum <= 0.0)
        throw std::domain_error("weighted_cancellation: nonpositive prefix sum for " + pair.str() +
                                " (pair is not in a valid minimal set)");
    return wsum;
}

std::pair<double, double> cancellation_ratio_bounds(const FrequencySpec& freq, int max_order) {
    const double lo = std::min(freq.omegas.back(), freq.m / std::max(1, max_order));
    return {lo, freq.omegas.front()};
}

Exponents compute_exponents(const FrequencySpec& freq, const std::vector<ResonancePair>& lambda) {
    Exponents e;
    for (int j = 0; j < freq.n_modes(); ++j) {
        const int N = resonance_window_index(freq.omegas[static_cast<size_t>(j)], freq.m);
        if (N < 0)
            throw std::domain_error("compute_exponents: N_" + std::to_string(j + 1) +
                                    " undefined (V3 fails)");
        e.N.push_back(N);
    }
    const int Nn = e.N.back();
    for (int j = 0; j < freq.n_modes(); ++j)
        e.alpha.push_back(std::min(static_cast<double>(Nn) / e.N[static_cast<size_t>(j)], 3.0));
    e.j0 = 0;
    while (e.N[static_cast<size_t>(e.j0)] != Nn) ++e.j0;
    e.kappa = 8.0;
    for (const auto& p : lambda) {
        double dot = 0.0;
        for (size_t j = 0; j < p.lambda.size(); ++j)
            dot += (p.lambda[j] + p.rho[j]) * e.alpha[j];
        e.kappa = std::min(e.kappa, 2.0 * dot - 2.0);
    }
    return e;
}

int default_max_order(const FrequencySpec& freq) {
    int Nn = 1;
    for (int j = 0; j < freq.n_modes(); ++j)
        Nn = std::max(Nn, resonance_window_index(freq.omegas[static_cast<size_t>(j)], freq.m));
    return 2 * Nn + 3;
}

namespace {

// Compositions of total into `parts` nonnegative entries, lexicographic.
void compositions(int total, int parts, std::vector<std::vector<int>>& out) {
    std::vector<int> c(static_cast<size_t>(parts), 0);
    auto rec = [&](auto&& self, int idx, int remaining) -> void {
        if (idx == parts - 1) {
            c[static_cast<size_t>(idx)] = remaining;
            out.push_back(c);
            return;
        }
        for (int v = remaining; v >= 0; --v) {
            c[static_cast<size_t>(idx)] = v;
            self(self, idx + 1, remaining - v);
        }
    };
    if (parts > 0) rec(rec, 0, total);
}

}  // namespace

std::vector<std::pair<MultiIndex, MultiIndex>> expand_pair_basis(const ResonancePair& pair,
                                                                 const FrequencySpec& freq) {
    const int n = freq.n_modes();
    std::vector<std::vector<std::vector<int>>> mu_parts(static_cast<size_t>(n)),
        nu_parts(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) {
        compositions(pair.rho[static_cast<size_t>(j)], freq.multiplicity(j),
                     mu_parts[static_cast<size_t>(j)]);
        compositions(pair.lambda[static_cast<size_t>(j)], freq.multiplicity(j),
                     nu_parts[static_cast<size_t>(j)]);
    }
    std::vector<std::pair<MultiIndex, MultiIndex>> basis;
    std::vector<size_t> pick(static_cast<size_t>(2 * n), 0);
    auto rec = [&](auto&& self, int slot) -> void {
        if (slot == 2 * n) {
            MultiIndex mu, nu;
            for (int j = 0; j < n; ++j) {
                const auto& mp = mu_parts[static_cast<size_t>(j)][pick[static_cast<size_t>(j)]];
                mu.insert(mu.end(), mp.begin(), mp.end());
                const auto& np =
                    nu_parts[static_cast<size_t>(j)][pick[static_cast<size_t>(n + j)]];
                nu.insert(nu.end(), np.begin(), np.end());
            }
            basis.emplace_back(std::move(mu), std::move(nu));
            return;
        }
        const auto& options = slot < n ? mu_parts[static_cast<size_t>(slot)]
                                       : nu_parts[static_cast<size_t>(slot - n)];
        for (size_t i = 0; i < options.size(); ++i) {
            pick[static_cast<size_t>(slot)] = i;
            self(self, slot + 1);
        }
    };
    rec(rec, 0);
    return basis;
}

}  // namespace kgflow
