#include "kgflow/frequency.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace kgflow {

int FrequencySpec::total_slots() const {
    int L = 0;
    for (int j = 0; j < n_modes(); ++j) L += multiplicity(j);
    return L;
}

std::vector<double> FrequencySpec::slot_omegas() const {
    std::vector<double> w;
    for (int j = 0; j < n_modes(); ++j)
        for (int k = 0; k < multiplicity(j); ++k) w.push_back(omegas[static_cast<size_t>(j)]);
    return w;
}

std::vector<int> FrequencySpec::slot_modes() const {
    std::vector<int> md;
    for (int j = 0; j < n_modes(); ++j)
        for (int k = 0; k < multiplicity(j); ++k) md.push_back(j);
    return md;
}

void FrequencySpec::validate() const {
    if (m <= 0.0) throw std::invalid_argument("FrequencySpec: mass must be positive");
    if (omegas.empty()) throw std::invalid_argument("FrequencySpec: no frequencies");
    if (!multiplicities.empty() && multiplicities.size() != omegas.size())
        throw std::invalid_argument("FrequencySpec: multiplicities/omegas length mismatch");
    double prev = m;
    for (size_t j = 0; j < omegas.size(); ++j) {
        const double w = omegas[j];
        if (!(w > kTolGap) || !(w < prev - kTolGap))
            throw std::invalid_argument("FrequencySpec: omegas must satisfy m > w1 > ... > wn > 0");
        prev = w;
    }
    for (size_t j = 0; j < multiplicities.size(); ++j)
        if (multiplicities[j] < 1)
            throw std::invalid_argument("FrequencySpec: multiplicities must be >= 1");
}

int resonance_window_index(double omega, double m, double tol) {
    if (omega <= 0.0 || omega >= m) return -1;
    const double r = m / omega;  // lies in (2N-1, 2N+1)
    const int N = static_cast<int>(std::floor((r + 1.0) / 2.0));
    if (N < 1) return -1;
    const double lo = m / (2.0 * N + 1.0);
    const double hi = m / (2.0 * N - 1.0);
    if (omega > lo + tol && omega < hi - tol) return N;
    return -1;  // sitting on an odd-harmonic edge
}

namespace {

// Enumerates mu in Z^n with 1 <= |mu| <= max_order (|mu| = sum |mu_j|) and
// feeds each to the visitor. Signs are explored per nonzero entry.
template <typename F>
void for_each_integer_vector(int n, int max_order, F&& visit) {
    std::vector<int> mag(static_cast<size_t>(n), 0);
    std::vector<int> mu(static_cast<size_t>(n), 0);
    // odometer over magnitudes with sum <= max_order, then sign patterns
    auto signs = [&](auto&& self, int idx) -> void {
        if (idx == n) {
            visit(mu);
            return;
        }
        const int v = mag[static_cast<size_t>(idx)];
        if (v == 0) {
            mu[static_cast<size_t>(idx)] = 0;
            self(self, idx + 1);
        } else {
            mu[static_cast<size_t>(idx)] = v;
            self(self, idx + 1);
            mu[static_cast<size_t>(idx)] = -v;
            self(self, idx + 1);
        }
    };
    auto rec = [&](auto&& self, int idx, int remaining) -> void {
        if (idx == n) {
            int total = 0;
            for (int v : mag) total += v;
            if (total >= 1) signs(signs, 0);
            return;
        }
        for (int v = 0; v <= remaining; ++v) {
            mag[static_cast<size_t>(idx)] = v;
            self(self, idx + 1, remaining - v);
        }
    };
    rec(rec, 0, max_order);
}

}  // namespace

AssumptionReport check_assumptions(const FrequencySpec& freq, int max_order, double tol) {
    if (max_order < 3 || max_order % 2 == 0)
        throw std::invalid_argument("check_assumptions: max_order must be odd and >= 3");
    freq.validate();

    AssumptionReport rep;
    rep.max_order = max_order;
    rep.v3_ok = true;
    rep.v4_ok = true;
    rep.v5_ok = true;

    int prevN = 0;
    for (int j = 0; j < freq.n_modes(); ++j) {
        const int N = resonance_window_index(freq.omegas[static_cast<size_t>(j)], freq.m, tol);
        rep.window_index.push_back(N);
        if (N < 0 || N < prevN) {
            rep.v3_ok = false;
            rep.violations.push_back({'3', {}, j, freq.omegas[static_cast<size_t>(j)]});
        }
        if (N > 0) prevN = N;
    }

    const int n = freq.n_modes();
    for_each_integer_vector(n, max_order, [&](const std::vector<int>& mu) {
        double dot = 0.0;
        int order = 0;
        for (int j = 0; j < n; ++j) {
            dot += mu[static_cast<size_t>(j)] * freq.omegas[static_cast<size_t>(j)];
            order += std::abs(mu[static_cast<size_t>(j)]);
        }
        if (order % 2 == 1 && std::abs(dot - freq.m) <= tol) {
            rep.v4_ok = false;
            rep.violations.push_back({'4', mu, -1, dot});
        }
        if (std::abs(dot) <= tol) {
            rep.v5_ok = false;
            rep.violations.push_back({'5', mu, -1, dot});
        }
    });
    return rep;
}

std::string AssumptionReport::summary() const {
    std::ostringstream os;
    os << "V3 " << (v3_ok ? "pass" : "FAIL") << "  V4 " << (v4_ok ? "pass" : "FAIL")
       << "  V5 " << (v5_ok ? "pass" : "FAIL") << "  (order " << max_order << ")";
    if (v3_ok) {
        os << "  N =";
        for (int N : window_index) os << ' ' << N;
    }
    for (const auto& v : violations) {
        os << "\n  V" << v.rule << " violated";
        if (v.rule == '3') {
            os << " at mode " << (v.mode + 1) << " (omega = " << v.value << ")";
        } else {
            os << " by mu = (";
            for (size_t i = 0; i < v.mu.size(); ++i) os << (i ? "," : "") << v.mu[i];
            os << "), sum = " << v.value;
        }
    }
    return os.str();
}

}  // namespace kgflow
