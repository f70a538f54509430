#pragma once

#include <string>
#include <vector>

namespace kgflow {

// Strict-inequality guard for tests against the continuum edge m and against 0.
// Values inside the guard band are treated as assumption violations, not as
// members of either side.
inline constexpr double kTolGap = 1e-9;

// Spectral data of the linearized operator: mass m and the discrete
// frequencies m > omega_1 > ... > omega_n > 0 with multiplicities l_j.
struct FrequencySpec {
    double m = 1.0;
    std::vector<double> omegas;
    std::vector<int> multiplicities;  // empty means all simple

    int n_modes() const { return static_cast<int>(omegas.size()); }

    int multiplicity(int j) const {
        return multiplicities.empty() ? 1 : multiplicities[static_cast<size_t>(j)];
    }

    // L = sum_j l_j, the number of complex mode slots.
    int total_slots() const;

    // Frequency of each slot: omega_{jk} = omega_j repeated l_j times.
    std::vector<double> slot_omegas() const;

    // Mode index j of each slot.
    std::vector<int> slot_modes() const;

    // Throws std::invalid_argument unless m > 0, the omegas are strictly
    // decreasing inside (0, m) with a kTolGap margin, and multiplicities
    // (when present) are positive and match omegas in length.
    void validate() const;
};

// N_j is the odd-window index: m/(2N_j+1) < omega_j < m/(2N_j-1).
// Returns -1 when omega sits within tol of a window edge (no valid N).
int resonance_window_index(double omega, double m, double tol = kTolGap);

struct AssumptionViolation {
    char rule;                   // '3', '4' or '5'
    std::vector<int> mu;        // witnessing integer vector (empty for V3)
    int mode = -1;               // offending mode for V3
    double value = 0.0;          // sum mu.omega (V4/V5) or omega_j (V3)
};

// Result of the numeric (V3)/(V4)/(V5) scan up to |mu| <= max_order.
struct AssumptionReport {
    bool v3_ok = false;
    bool v4_ok = false;
    bool v5_ok = false;
    std::vector<int> window_index;  // N_j, valid when v3_ok
    std::vector<AssumptionViolation> violations;
    int max_order = 0;

    bool all_ok() const { return v3_ok && v4_ok && v5_ok; }
    std::string summary() const;
};

// Scans all integer vectors mu with 1 <= |mu| <= max_order:
//   (V4)  |sum mu_j omega_j - m| > tol for odd |mu|;
//   (V5)  sum mu_j omega_j = 0 (within tol) only for mu = 0.
// The V5 scan covers both parities: a vanishing odd combination is just as
// fatal for the resonance bookkeeping as an even one, and the canonical
// failure (omega_1 = 2 omega_2) first shows up at odd order.
// Also checks (V3): every omega_j has a window index and the sequence N_j
// is nondecreasing. Violations are recorded, not thrown.
AssumptionReport check_assumptions(const FrequencySpec& freq, int max_order,
                                   double tol = kTolGap);

}  // namespace kgflow
