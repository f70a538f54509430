#include <random>

#include "doctest.h"
#include "kgflow/normalform.hpp"

using namespace kgflow;

namespace {

const std::vector<double> ctx{0.45, 0.25};

MonomialKey key(std::vector<int> mu, std::vector<int> nu) { return {std::move(mu), std::move(nu)}; }

SparsePolynomial mono(const std::vector<double>& c, std::vector<int> mu, std::vector<int> nu,
                      Complex coeff = 1.0) {
    return SparsePolynomial::monomial(c, key(std::move(mu), std::move(nu)), coeff);
}

SparsePolynomial random_poly(int n_terms, int max_deg, std::mt19937& rng,
                             const std::vector<double>& omegas) {
    std::uniform_real_distribution<double> coeff(-1.0, 1.0);
    std::uniform_int_distribution<int> pick(0, max_deg);
    SparsePolynomial p(omegas);
    const size_t L = omegas.size();
    for (int t = 0; t < n_terms; ++t) {
        MonomialKey k;
        k.mu.assign(L, 0);
        k.nu.assign(L, 0);
        int budget = pick(rng);
        for (size_t a = 0; a < 2 * L && budget > 0; ++a) {
            const int e = std::uniform_int_distribution<int>(0, budget)(rng);
            (a < L ? k.mu[a] : k.nu[a - L]) = e;
            budget -= e;
        }
        p.add_term(k, {coeff(rng), coeff(rng)});
    }
    return p;
}

}  // namespace

TEST_CASE("bracket basics") {
    // {x1 conj(x1), x1} = -i x1
    const auto r = poisson_bracket(mono(ctx, {1, 0}, {1, 0}), mono(ctx, {1, 0}, {0, 0}));
    REQUIRE(r.size() == 1);
    CHECK(r.coefficient(key({1, 0}, {0, 0})) == Complex{0.0, -1.0});

    // antisymmetry on a generic polynomial
    std::mt19937 rng(3);
    const auto P = random_poly(8, 4, rng, ctx);
    CHECK(poisson_bracket(P, P).max_abs_coeff() < 1e-12);
}

TEST_CASE("bracket with the quadratic action is diagonal") {
    const auto HL = quadratic_action(ctx);
    const auto m = mono(ctx, {2, 0}, {0, 1});
    const auto r = poisson_bracket(HL, m);
    // {H_L, m} = i omega.(nu - mu) m = -0.65 i m
    REQUIRE(r.size() == 1);
    const Complex c = r.coefficient(key({2, 0}, {0, 1}));
    CHECK(c.real() == doctest::Approx(0.0));
    CHECK(c.imag() == doctest::Approx(-0.65));
}

TEST_CASE("Jacobi identity on random low-degree polynomials") {
    std::mt19937 rng(17);
    for (int trial = 0; trial < 30; ++trial) {
        const auto P = random_poly(6, 4, rng, ctx);
        const auto Q = random_poly(6, 4, rng, ctx);
        const auto R = random_poly(6, 4, rng, ctx);
        auto jac = poisson_bracket(P, poisson_bracket(Q, R)) +
                   poisson_bracket(Q, poisson_bracket(R, P)) +
                   poisson_bracket(R, poisson_bracket(P, Q));
        CHECK(jac.max_abs_coeff() < 1e-10);
    }
}

TEST_CASE("Leibniz rule") {
    std::mt19937 rng(19);
    for (int trial = 0; trial < 20; ++trial) {
        const auto P = random_poly(5, 3, rng, ctx);
        const auto Q = random_poly(5, 3, rng, ctx);
        const auto R = random_poly(5, 3, rng, ctx);
        const auto lhs = poisson_bracket(P, Q * R);
        const auto rhs = poisson_bracket(P, Q) * R + Q * poisson_bracket(P, R);
        CHECK((lhs - rhs).max_abs_coeff() < 1e-10);
    }
}

TEST_CASE("homological split on the worked example") {
    const auto s = split_normal_form(mono(ctx, {2, 0}, {0, 1}));
    CHECK(s.Z.empty());
    REQUIRE(s.chi.size() == 1);
    const Complex c = s.chi.coefficient(key({2, 0}, {0, 1}));
    CHECK(c.real() == doctest::Approx(0.0));
    CHECK(c.imag() == doctest::Approx(1.0 / 0.65));
}

TEST_CASE("resonant monomials stay in Z") {
    const auto s = split_normal_form(mono(ctx, {1, 0}, {1, 0}));  // |x1|^2
    CHECK(s.chi.empty());
    CHECK(s.Z.size() == 1);
}

TEST_CASE("split reconstructs K and projects onto disjoint supports") {
    std::mt19937 rng(23);
    const auto HL = quadratic_action(ctx);
    for (int trial = 0; trial < 10; ++trial) {
        auto K = random_poly(10, 5, rng, ctx);
        K = K + K.conjugate();  // make it real
        const auto s = split_normal_form(K);
        const auto rebuilt = poisson_bracket(HL, s.chi) + s.Z;
        CHECK((rebuilt - K).max_abs_coeff() < 1e-10);
        CHECK(s.Z.is_real(1e-10));
        // disjoint supports
        for (const auto& [k, c] : s.Z.terms()) CHECK(s.chi.coefficient(k) == Complex{0.0, 0.0});
    }
}

TEST_CASE("small divisors are flagged") {
    std::vector<double> close{0.45, 0.45 - 1e-8};  // nearly degenerate pair
    const auto s = split_normal_form(mono(close, {1, 0}, {0, 1}));  // divisor 1e-8
    CHECK(s.small_divisors.size() == 1);
}

TEST_CASE("lie transform: identity, homological identity, degree audit") {
    const auto HL = quadratic_action(ctx);
    CHECK((lie_transform(HL, SparsePolynomial(ctx), 8) - HL).max_abs_coeff() < 1e-12);

    const auto K = mono(ctx, {2, 0}, {0, 1}) + mono(ctx, {0, 1}, {2, 0});
    const auto s = split_normal_form(K);
    const auto transformed = lie_transform(HL, s.chi, 4);
    // H_L + {chi, H_L} + ... with {chi, H_L} = Z - K = -K here
    CHECK((transformed - (HL - K)).max_abs_coeff() < 1e-10);

    // bracket degree count: deg(ad_chi m) = deg m + deg chi - 2
    const auto chi = mono(ctx, {3, 0}, {0, 0}, Complex{0.0, 1.0});
    const auto m = mono(ctx, {0, 2}, {1, 0});
    const auto br = poisson_bracket(chi, m);
    CHECK(br.min_degree() == 3 + 3 - 2);
    CHECK_THROWS(lie_transform(HL, mono(ctx, {1, 0}, {1, 0}), 8));  // degree-2 generator
}

TEST_CASE("quartic interaction from a single mode") {
    FrequencySpec f;
    f.m = 2.0;
    f.omegas = {1.0};
    const std::vector<double> I{1.0};
    const auto H = build_quartic_hamiltonian(I, f);
    // -(1/16) (x + conj x)^4: binomial coefficients 1 4 6 4 1
    CHECK(H.coefficient({{4}, {0}}) == Complex{-1.0 / 16.0, 0.0});
    CHECK(H.coefficient({{3}, {1}}) == Complex{-4.0 / 16.0, 0.0});
    CHECK(H.coefficient({{2}, {2}}) == Complex{-6.0 / 16.0, 0.0});
    CHECK(H.is_real());
    CHECK(H.min_degree() == 4);
    CHECK(H.max_degree() == 4);
}

TEST_CASE("quartic interaction rejects asymmetric tensors and zero works") {
    FrequencySpec f;
    f.m = 1.0;
    f.omegas = {0.45, 0.25};
    std::vector<double> I(16, 0.0);
    CHECK(build_quartic_hamiltonian(I, f).empty());
    I[1] = 0.7;  // I_0001 without its permutations
    CHECK_THROWS(build_quartic_hamiltonian(I, f));
}

namespace {
// fully symmetric two-slot overlap tensor with mildly varying entries
std::vector<double> stock_tensor2() {
    std::vector<double> I(16, 0.0);
    for (size_t a = 0; a < 2; ++a)
        for (size_t b = 0; b < 2; ++b)
            for (size_t c = 0; c < 2; ++c)
                for (size_t d = 0; d < 2; ++d)
                    I[((a * 2 + b) * 2 + c) * 2 + d] = 1.0 + 0.1 * static_cast<double>(a + b + c + d);
    return I;
}
}  // namespace

TEST_CASE("birkhoff: r = 0 leaves the interaction untouched") {
    FrequencySpec f;
    f.m = 1.0;
    f.omegas = {0.45, 0.25};
    const auto quartic = build_quartic_hamiltonian(stock_tensor2(), f);
    const auto nf = birkhoff(quartic, 0);
    CHECK(nf.Z0.empty());
    CHECK((nf.remainder - quartic).max_abs_coeff() < 1e-12);
    CHECK(nf.achieved_order == 4);
}

TEST_CASE("birkhoff: one step clears degree 4 up to resonant terms") {
    FrequencySpec f;
    f.m = 1.0;
    f.omegas = {0.45, 0.25};
    const auto quartic = build_quartic_hamiltonian(stock_tensor2(), f);
    const auto nf = birkhoff(quartic, 1);
    CHECK(nf.achieved_order == 6);
    CHECK(nf.remainder.min_degree() >= 6);
    CHECK(nf.Z0.is_real(1e-9));
    for (const auto& [k, c] : nf.Z0.terms()) CHECK(std::abs(nf.Z0.omega_dot(k)) <= kTolGap);
    CHECK(nf.generators.size() == 1);

    // already-resonant input passes through untouched
    SparsePolynomial resonant(ctx);
    resonant.add_term({{1, 0}, {1, 0}}, 0.5);
    resonant = resonant * resonant;  // |x1|^4, resonant degree 4
    const auto nf2 = birkhoff(resonant, 2);
    CHECK(nf2.generators[0].empty());
    CHECK(nf2.generators[1].empty());
    CHECK((nf2.Z0 - resonant).max_abs_coeff() < 1e-12);
}

TEST_CASE("birkhoff raises the non-normal degree by two per step") {
    FrequencySpec f;
    f.m = 1.0;
    f.omegas = {0.45, 0.25};
    const auto quartic = build_quartic_hamiltonian(stock_tensor2(), f);
    for (int r = 1; r <= 3; ++r) {
        const auto nf = birkhoff(quartic, r);
        CHECK(nf.remainder.min_degree() == 2 * r + 4);
        CHECK(nf.Z0.is_real(1e-8));
        // the non-normal residual is exactly the remainder: all lower shells resonant
        for (const auto& [k, c] : nf.Z0.terms()) CHECK(std::abs(nf.Z0.omega_dot(k)) <= kTolGap);
    }
}

TEST_CASE("pseudo-1d cancellation for resonant polynomials") {
    FrequencySpec f;
    f.m = 1.0;
    f.omegas = {0.45, 0.25};

    // |x1|^2 |x2|^2 commutes with both mode actions
    SparsePolynomial Z0(ctx);
    Z0.add_term({{1, 1}, {1, 1}}, 1.0);
    CHECK(check_pseudo_1d(Z0, f).ok);

    // degenerate case: internal transfer within the omega_1 eigenspace
    FrequencySpec fd;
    fd.m = 1.0;
    fd.omegas = {0.45, 0.25};
    fd.multiplicities = {2, 1};
    // resonant internal transfer: x11 conj(x12) |x21|^2 + conj
    SparsePolynomial Zd(fd.slot_omegas());
    Zd.add_term({{1, 0, 1}, {0, 1, 1}}, {0.3, 0.1});
    Zd.add_term({{0, 1, 1}, {1, 0, 1}}, {0.3, -0.1});
    CHECK(Zd.is_real());
    const auto rep = check_pseudo_1d(Zd, fd);
    CHECK(rep.ok);

    // zero polynomial trivially passes
    CHECK(check_pseudo_1d(SparsePolynomial(fd.slot_omegas()), fd).ok);

    // a non-conservative monomial pair fails for its mode
    SparsePolynomial bad(ctx);
    bad.add_term({{2, 0}, {1, 0}}, 1.0);
    bad.add_term({{1, 0}, {2, 0}}, 1.0);
    CHECK_FALSE(check_pseudo_1d(bad, f).ok);
}

TEST_CASE("birkhoff preserves reality on the stock quartic") {
    FrequencySpec fd;
    fd.m = 1.0;
    fd.omegas = {0.45, 0.25};
    fd.multiplicities = {2, 1};
    std::vector<double> I(81, 0.0);
    auto at = [&](size_t a, size_t b, size_t c, size_t d) -> double& {
        return I[((a * 3 + b) * 3 + c) * 3 + d];
    };
    for (size_t a = 0; a < 3; ++a)
        for (size_t b = 0; b < 3; ++b)
            for (size_t c = 0; c < 3; ++c)
                for (size_t d = 0; d < 3; ++d)
                    at(a, b, c, d) = 1.0 / (1.0 + static_cast<double>(a + b + c + d));
    const auto quartic = build_quartic_hamiltonian(I, fd);
    REQUIRE(quartic.is_real());
    const auto nf = birkhoff(quartic, 1, 6);
    CHECK(nf.Z0.is_real(1e-9));
    CHECK(nf.remainder.is_real(1e-9));
    CHECK(check_pseudo_1d(nf.Z0, fd).ok);
}
