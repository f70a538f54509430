#include "kgflow/polynomial.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace kgflow {

int MonomialKey::degree() const {
    int d = 0;
    for (int e : mu) d += e;
    for (int e : nu) d += e;
    return d;
}

bool GradedLex::operator()(const MonomialKey& a, const MonomialKey& b) const {
    const int da = a.degree(), db = b.degree();
    if (da != db) return da < db;
    if (a.mu != b.mu) return a.mu < b.mu;
    return a.nu < b.nu;
}

SparsePolynomial SparsePolynomial::monomial(std::vector<double> slot_omegas, MonomialKey key,
                                            Complex coeff) {
    SparsePolynomial p(std::move(slot_omegas));
    if (key.mu.size() != p.omega_.size() || key.nu.size() != p.omega_.size())
        throw std::invalid_argument("SparsePolynomial: key size does not match context");
    p.add_term(key, coeff);
    return p;
}

Complex SparsePolynomial::coefficient(const MonomialKey& key) const {
    auto it = terms_.find(key);
    return it == terms_.end() ? Complex{0.0, 0.0} : it->second;
}

void SparsePolynomial::add_term(const MonomialKey& key, Complex coeff) {
    auto [it, inserted] = terms_.try_emplace(key, coeff);
    if (!inserted) it->second += coeff;
    if (std::abs(it->second) <= kCoeffTol) terms_.erase(it);
}

int SparsePolynomial::min_degree() const {
    return terms_.empty() ? kEmptyDegree : terms_.begin()->first.degree();
}

int SparsePolynomial::max_degree() const {
    return terms_.empty() ? 0 : terms_.rbegin()->first.degree();
}

double SparsePolynomial::omega_dot(const MonomialKey& key) const {
    double dot = 0.0;
    for (size_t a = 0; a < omega_.size(); ++a) dot += omega_[a] * (key.mu[a] - key.nu[a]);
    return dot;
}

void SparsePolynomial::check_context(const SparsePolynomial& o) const {
    if (omega_ != o.omega_)
        throw std::invalid_argument("SparsePolynomial: frequency context mismatch");
}

SparsePolynomial SparsePolynomial::operator+(const SparsePolynomial& o) const {
    check_context(o);
    SparsePolynomial r(*this);
    for (const auto& [k, c] : o.terms_) r.add_term(k, c);
    return r;
}

SparsePolynomial SparsePolynomial::operator-(const SparsePolynomial& o) const {
    check_context(o);
    SparsePolynomial r(*this);
    for (const auto& [k, c] : o.terms_) r.add_term(k, -c);
    return r;
}

SparsePolynomial SparsePolynomial::operator*(Complex s) const {
    SparsePolynomial r(omega_);
    if (std::abs(s) <= kCoeffTol) return r;
    for (const auto& [k, c] : terms_) r.add_term(k, c * s);
    return r;
}

SparsePolynomial SparsePolynomial::operator*(const SparsePolynomial& o) const {
    check_context(o);
    SparsePolynomial r(omega_);
    const size_t L = omega_.size();
    MonomialKey key;
    key.mu.resize(L);
    key.nu.resize(L);
    for (const auto& [ka, ca] : terms_) {
        for (const auto& [kb, cb] : o.terms_) {
            for (size_t a = 0; a < L; ++a) {
                key.mu[a] = ka.mu[a] + kb.mu[a];
                key.nu[a] = ka.nu[a] + kb.nu[a];
            }
            r.add_term(key, ca * cb);
        }
    }
    return r;
}

SparsePolynomial SparsePolynomial::diff_xi(int slot) const {
    SparsePolynomial r(omega_);
    const size_t a = static_cast<size_t>(slot);
    for (const auto& [k, c] : terms_) {
        if (k.mu[a] == 0) continue;
        MonomialKey d = k;
        d.mu[a] -= 1;
        r.add_term(d, c * static_cast<double>(k.mu[a]));
    }
    return r;
}

SparsePolynomial SparsePolynomial::diff_xibar(int slot) const {
    SparsePolynomial r(omega_);
    const size_t a = static_cast<size_t>(slot);
    for (const auto& [k, c] : terms_) {
        if (k.nu[a] == 0) continue;
        MonomialKey d = k;
        d.nu[a] -= 1;
        r.add_term(d, c * static_cast<double>(k.nu[a]));
    }
    return r;
}

SparsePolynomial SparsePolynomial::conjugate() const {
    SparsePolynomial r(omega_);
    for (const auto& [k, c] : terms_) r.add_term({k.nu, k.mu}, std::conj(c));
    return r;
}

SparsePolynomial SparsePolynomial::truncate_degree(int max_deg) const {
    SparsePolynomial r(omega_);
    for (const auto& [k, c] : terms_)
        if (k.degree() <= max_deg) r.add_term(k, c);
    return r;
}

SparsePolynomial SparsePolynomial::select_degree(int degree) const {
    SparsePolynomial r(omega_);
    for (const auto& [k, c] : terms_)
        if (k.degree() == degree) r.add_term(k, c);
    return r;
}

bool SparsePolynomial::is_real(double tol) const { return reality_defect() <= tol; }

double SparsePolynomial::reality_defect() const {
    double defect = 0.0;
    for (const auto& [k, c] : terms_) {
        const Complex mirror = coefficient({k.nu, k.mu});
        defect = std::max(defect, std::abs(c - std::conj(mirror)));
    }
    return defect;
}

double SparsePolynomial::max_abs_coeff() const {
    double m = 0.0;
    for (const auto& [k, c] : terms_) m = std::max(m, std::abs(c));
    return m;
}

std::string SparsePolynomial::str() const {
    std::ostringstream os;
    bool first = true;
    for (const auto& [k, c] : terms_) {
        if (!first) os << " + ";
        first = false;
        os << "(" << c.real() << (c.imag() < 0 ? "-" : "+") << std::abs(c.imag()) << "i)";
        for (size_t a = 0; a < k.mu.size(); ++a) {
            if (k.mu[a]) os << " x" << a + 1 << "^" << k.mu[a];
            if (k.nu[a]) os << " X" << a + 1 << "^" << k.nu[a];
        }
    }
    if (first) os << "0";
    return os.str();
}

Complex evaluate(const SparsePolynomial& p, const std::vector<Complex>& xi) {
    if (static_cast<int>(xi.size()) != p.slots())
        throw std::invalid_argument("evaluate: point dimension mismatch");
    Complex sum{0.0, 0.0};
    for (const auto& [k, c] : p.terms()) {
        Complex v = c;
        for (size_t a = 0; a < xi.size(); ++a) {
            for (int e = 0; e < k.mu[a]; ++e) v *= xi[a];
            for (int e = 0; e < k.nu[a]; ++e) v *= std::conj(xi[a]);
        }
        sum += v;
    }
    return sum;
}

SparsePolynomial quadratic_action(const std::vector<double>& slot_omegas) {
    SparsePolynomial h(slot_omegas);
    const size_t L = slot_omegas.size();
    for (size_t a = 0; a < L; ++a) {
        MonomialKey k;
        k.mu.assign(L, 0);
        k.nu.assign(L, 0);
        k.mu[a] = 1;
        k.nu[a] = 1;
        h.add_term(k, slot_omegas[a]);
    }
    return h;
}

}  // namespace kgflow
