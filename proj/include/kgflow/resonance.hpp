#pragma once

#include <string>
#include <utility>
#include <vector>

#include "kgflow/frequency.hpp"

namespace kgflow {

using MultiIndex = std::vector<int>;

int order_of(const MultiIndex& v);

// A multi-index pair (lambda, rho) over the n collapsed frequencies.
// Membership in the resonance set requires odd |lambda+rho| and
// omega.(lambda-rho) > m.
struct ResonancePair {
    MultiIndex lambda;
    MultiIndex rho;

    int order() const { return order_of(lambda) + order_of(rho); }
    bool operator==(const ResonancePair& o) const { return lambda == o.lambda && rho == o.rho; }
    std::string str() const;
};

double omega_dot(const ResonancePair& p, const FrequencySpec& freq);

// Componentwise partial order on the concatenated (lambda, rho).
bool dominates(const ResonancePair& hi, const ResonancePair& lo);

// Canonical ordering: by total order, then lexicographic on lambda, then rho.
bool pair_less(const ResonancePair& a, const ResonancePair& b);

// All (lambda, rho) with odd |lambda+rho| <= max_order and
// omega.(lambda-rho) > m + tol, sorted canonically. Throws on even
// max_order and when a pair lands within tol of the continuum edge
// (an assumption-boundary case that (V4) rules out for valid input).
// Parallel over degree shells with a deterministic shell-ordered merge;
// the _serial variant is the reference implementation.
std::vector<ResonancePair> enumerate_lambda(const FrequencySpec& freq, int max_order,
                                            double tol = kTolGap);
std::vector<ResonancePair> enumerate_lambda_serial(const FrequencySpec& freq, int max_order,
                                                   double tol = kTolGap);

// Minimal elements of the given set under componentwise domination.
// The result is an antichain.
std::vector<ResonancePair> minimal_set(const std::vector<ResonancePair>& lambda);
std::vector<ResonancePair> minimal_set_serial(const std::vector<ResonancePair>& lambda);

// Positive/negative part split of theta in Z^n: the unique candidate for the
// minimal element of the theta-class. in_lambda marks whether it actually
// satisfies the resonance conditions for the given frequencies.
struct ThetaMinimal {
    ResonancePair pair;
    double dot = 0.0;
    bool in_lambda = false;
};
ThetaMinimal theta_minimal(const MultiIndex& theta, const FrequencySpec& freq,
                           double tol = kTolGap);

// Structural audit of a minimal set:
//   (i)  |rho| is 0 or 1;
//   (ii) rho_j = 1 implies j >= 2 and lambda_k = 0 for all k >= j.
// Bad resonances (lambda_j - rho_j < 0) are reported alongside.
struct StructureReport {
    std::vector<ResonancePair> checked;
    std::vector<std::pair<ResonancePair, std::string>> violations;
    std::vector<std::pair<ResonancePair, int>> bad_resonances;  // (pair, mode j, 0-based)
    bool ok() const { return violations.empty(); }
};
StructureReport verify_lambda_star_structure(const std::vector<ResonancePair>& lambda_star);

// Prefix sum  sum_{k<=j} omega_k (lambda_k - rho_k)  for a minimal-set pair,
// 0-based inclusive j. Throws std::domain_error when the cancellation
// contract fails (positive prefix weight with nonpositive sum), which flags
// a pair outside a valid minimal set.
double weighted_cancellation(const ResonancePair& pair, int j, const FrequencySpec& freq);

// Lower/upper bounds of the ratio prefix-sum / prefix-order implied by the
// cancellation lemma, computable from the frequencies and a truncation order.
std::pair<double, double> cancellation_ratio_bounds(const FrequencySpec& freq, int max_order);

// Decay-law exponents: window indices N_j, alpha_j = min(N_n/N_j, 3),
// kappa = min(8, min over Lambda of 2 (lambda+rho).alpha - 2), and j0 =
// first mode with N_j = N_n (0-based).
struct Exponents {
    std::vector<int> N;
    std::vector<double> alpha;
    double kappa = 8.0;
    int j0 = 0;
};
Exponents compute_exponents(const FrequencySpec& freq, const std::vector<ResonancePair>& lambda);

// Default truncation: one parity level above the slowest intrinsic
// resonance (2 N_n + 3).
int default_max_order(const FrequencySpec& freq);

// Expands a collapsed pair into its slot-level basis M_{lambda,rho}: all
// (mu, nu) in N^L x N^L with sum_k mu_jk = rho_j and sum_k nu_jk = lambda_j.
// Deterministic (lexicographic) order.
std::vector<std::pair<MultiIndex, MultiIndex>> expand_pair_basis(const ResonancePair& pair,
                                                                 const FrequencySpec& freq);

}  // namespace kgflow
