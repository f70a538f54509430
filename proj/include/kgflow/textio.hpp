#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kgflow/fgr.hpp"
#include "kgflow/frequency.hpp"
#include "kgflow/modedyn.hpp"
#include "kgflow/polynomial.hpp"
#include "kgflow/resonance.hpp"

namespace kgflow {

// Key/value configuration text with [section] tables, '#' comments and
// whitespace-separated list values. Keys outside any section land in "".
class ConfigFile {
public:
    static ConfigFile parse(std::istream& in);
    static ConfigFile load(const std::string& path);

    bool has(const std::string& section, const std::string& key) const;
    std::string get(const std::string& section, const std::string& key) const;
    std::string get_or(const std::string& section, const std::string& key,
                       const std::string& fallback) const;
    double get_double(const std::string& section, const std::string& key) const;
    double get_double_or(const std::string& section, const std::string& key, double fallback) const;
    long get_int_or(const std::string& section, const std::string& key, long fallback) const;
    bool get_bool_or(const std::string& section, const std::string& key, bool fallback) const;
    std::vector<double> get_doubles(const std::string& section, const std::string& key) const;
    std::vector<std::string> sections() const;
    const std::map<std::string, std::string>& section_map(const std::string& section) const;

private:
    std::map<std::string, std::map<std::string, std::string>> data_;
};

// All floats on disk carry 17 significant digits.
std::string format_double(double v);

// write-temp-then-rename
void atomic_write(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

// frequency file: keys m, omegas, multiplicities (bare or in [frequency])
FrequencySpec load_frequency_spec(const ConfigFile& cfg);
FrequencySpec load_frequency_file(const std::string& path);
std::string frequency_to_text(const FrequencySpec& freq);

// pair list: lambda=..;rho=..;dot=..;minimal=0|1;bad_modes=[..]
std::string pair_list_to_text(const std::vector<ResonancePair>& lambda,
                              const std::vector<ResonancePair>& minimal,
                              const FrequencySpec& freq);
// parses the lambda=..;rho=.. prefix of one pair-list line
ResonancePair parse_pair_token(const std::string& token);

// polynomial file: context line then one monomial per line
//   mu=[..] nu=[..] re=<float> im=<float>
std::string polynomial_to_text(const SparsePolynomial& p);
SparsePolynomial load_polynomial(const std::string& path);
SparsePolynomial parse_polynomial(std::istream& in);

// continuum operator file
std::string operator_to_text(const ContinuumOperator& op, double m);
std::pair<ContinuumOperator, double> load_operator(const std::string& path);

// couplings file: one "coupling mu=[..] nu=[..] re=[..] im=[..]" per line
std::string couplings_to_text(const CouplingMap& map);
CouplingMap load_couplings(const std::string& path);

// resonance matrices as a structured re/im grid
std::string matrices_to_text(const ResonanceMatrices& R);

// reduced-system file
std::string system_to_text(const OdeSystem& sys);
OdeSystem load_system(const std::string& path);

// trajectory CSV: t, X_1..X_n, Xt_1..Xt_n, Xh_1..Xh_n, Y, W, accumulator
void write_trajectory_csv(std::ostream& os, const ModeTrajectory& traj, const OdeSystem& sys,
                          double eps);

}  // namespace kgflow
