#pragma once

#include <complex>
#include <map>
#include <string>
#include <vector>

namespace kgflow {

// Pruning threshold applied after every arithmetic operation; keeps the
// sparse maps compact and makes zero-tests meaningful.
inline constexpr double kCoeffTol = 1e-12;

using Complex = std::complex<double>;

// Exponent pair of a monomial xi^mu conj(xi)^nu over L slots.
struct MonomialKey {
    std::vector<int> mu, nu;
    int degree() const;
    bool operator==(const MonomialKey& o) const { return mu == o.mu && nu == o.nu; }
};

// Graded lexicographic order: total degree first, then (mu, nu) lex.
struct GradedLex {
    bool operator()(const MonomialKey& a, const MonomialKey& b) const;
};

// Finite sum of monomials xi^mu conj(xi)^nu with complex coefficients over a
// fixed frequency context (one omega per slot, degenerate frequencies
// repeated). Immutable-style value type: every operation returns a new
// polynomial pruned at kCoeffTol.
class SparsePolynomial {
public:
    using TermMap = std::map<MonomialKey, Complex, GradedLex>;

    SparsePolynomial() = default;
    explicit SparsePolynomial(std::vector<double> slot_omegas)
        : omega_(std::move(slot_omegas)) {}

    static SparsePolynomial monomial(std::vector<double> slot_omegas, MonomialKey key,
                                     Complex coeff);

    const std::vector<double>& context() const { return omega_; }
    int slots() const { return static_cast<int>(omega_.size()); }
    const TermMap& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }
    size_t size() const { return terms_.size(); }

    Complex coefficient(const MonomialKey& key) const;
    void add_term(const MonomialKey& key, Complex coeff);  // accumulates, prunes

    // Degree range over stored terms; min_degree of the zero polynomial is
    // reported as a large sentinel so truncation checks read naturally.
    int min_degree() const;
    int max_degree() const;

    double omega_dot(const MonomialKey& key) const;  // omega . (mu - nu)

    SparsePolynomial operator+(const SparsePolynomial& o) const;
    SparsePolynomial operator-(const SparsePolynomial& o) const;
    SparsePolynomial operator*(const SparsePolynomial& o) const;
    SparsePolynomial operator*(Complex s) const;

    // d/dxi_a and d/d(conj xi_a)
    SparsePolynomial diff_xi(int slot) const;
    SparsePolynomial diff_xibar(int slot) const;

    SparsePolynomial conjugate() const;  // complex conjugate (swaps mu <-> nu)
    SparsePolynomial truncate_degree(int max_degree) const;
    SparsePolynomial select_degree(int degree) const;

    // Real in the Hamiltonian sense: coeff(mu,nu) == conj(coeff(nu,mu)).
    bool is_real(double tol = kCoeffTol) const;
    double max_abs_coeff() const;

    // Largest |coeff(mu,nu) - conj(coeff(nu,mu))| deviation.
    double reality_defect() const;

    void check_context(const SparsePolynomial& o) const;

    std::string str() const;

    static constexpr int kEmptyDegree = 1 << 20;

private:
    std::vector<double> omega_;
    TermMap terms_;
};

// Evaluates P at a point xi in C^L.
Complex evaluate(const SparsePolynomial& p, const std::vector<Complex>& xi);

// H_L = sum_a omega_a |xi_a|^2 in the given context.
SparsePolynomial quadratic_action(const std::vector<double>& slot_omegas);

}  // namespace kgflow
