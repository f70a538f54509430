#pragma once

#include <string>
#include <vector>

#include "kgflow/frequency.hpp"
#include "kgflow/polynomial.hpp"

namespace kgflow {

// Divisors below this magnitude (but above kTolGap) are flagged as
// near-resonant conditioning hazards rather than silently inverted.
inline constexpr double kDivisorFloor = 1e-6;

// Discrete-sector Poisson bracket
//   {P,Q} = i (dP/dxi . dQ/dxibar - dP/dxibar . dQ/dxi),
// bilinear, antisymmetric, degree(P)+degree(Q)-2 on monomials.
SparsePolynomial poisson_bracket(const SparsePolynomial& P, const SparsePolynomial& Q);

struct HomologicalSplit {
    SparsePolynomial Z;    // resonant part: |omega.(mu-nu)| <= tol_gap
    SparsePolynomial chi;  // generator solving {H_L, chi} + Z = K
    std::vector<std::pair<MonomialKey, double>> small_divisors;  // conditioning warnings
};

// Solves the homological equation for K: Z keeps the resonant monomials,
// chi = sum i a_{mu nu} / omega.(mu-nu) xi^mu xibar^nu over the rest.
HomologicalSplit split_normal_form(const SparsePolynomial& K, double tol_gap = kTolGap,
                                   double divisor_floor = kDivisorFloor);

// Truncated Lie series H o phi = sum_k ad_chi^k(H) / k! with ad_chi = {chi, .}.
// Requires min degree of chi >= 3 so the series terminates under truncation.
SparsePolynomial lie_transform(const SparsePolynomial& H, const SparsePolynomial& chi,
                               int max_degree);

struct NormalFormResult {
    SparsePolynomial Z0;                      // accumulated resonant normal form
    std::vector<SparsePolynomial> generators; // chi_1 .. chi_r
    SparsePolynomial remainder;               // min degree >= 2r+4
    int achieved_order = 0;                   // 2r+4
    std::vector<std::pair<MonomialKey, double>> small_divisors;
};

// Iterated Birkhoff normal form of H_L + H_P for the discrete polynomial
// sector. Step s removes the non-resonant degree-(2s+2) terms; each step
// raises the non-normal residual's minimum degree by two.
NormalFormResult birkhoff(const SparsePolynomial& H_P, int steps, int max_degree = -1);

// Audit of the within-eigenspace cancellation: for each mode j the bracket
// { sum_k |xi_jk|^2 , Z0 } must vanish identically when Z0 is real, resonant
// and the context frequencies satisfy (V5).
struct Pseudo1dReport {
    bool ok = true;
    std::vector<int> failing_modes;
    std::vector<SparsePolynomial> residuals;  // per mode, the offending bracket
    std::string summary() const;
};
Pseudo1dReport check_pseudo_1d(const SparsePolynomial& Z0, const FrequencySpec& freq,
                               double tol = kCoeffTol);

// Quartic interaction Hamiltonian
//   -(1/4) sum I_{abcd} prod_{s in {a,b,c,d}} (xi_s + xibar_s)/sqrt(2 w_s)
// from a fully symmetric overlap tensor I (flattened L^4, row-major).
SparsePolynomial build_quartic_hamiltonian(const std::vector<double>& overlaps,
                                           const FrequencySpec& freq);

}  // namespace kgflow
