#include <random>

#include "doctest.h"
#include "kgflow/polynomial.hpp"

using namespace kgflow;

namespace {

const std::vector<double> ctx{0.45, 0.25};

MonomialKey key(std::vector<int> mu, std::vector<int> nu) { return {std::move(mu), std::move(nu)}; }

SparsePolynomial random_poly(int max_deg, std::mt19937& rng, const std::vector<double>& omegas) {
    std::uniform_int_distribution<int> exp_dist(0, max_deg);
    std::uniform_real_distribution<double> coeff(-1.0, 1.0);
    SparsePolynomial p(omegas);
    const size_t L = omegas.size();
    for (int t = 0; t < 12; ++t) {
        MonomialKey k;
        k.mu.resize(L);
        k.nu.resize(L);
        int budget = max_deg;
        for (size_t a = 0; a < L; ++a) {
            k.mu[a] = exp_dist(rng) % (budget + 1);
            budget -= k.mu[a];
            k.nu[a] = exp_dist(rng) % (budget + 1);
            budget -= k.nu[a];
        }
        p.add_term(k, {coeff(rng), coeff(rng)});
    }
    return p;
}

}  // namespace

TEST_CASE("graded-lex ordering is total degree first") {
    GradedLex less;
    CHECK(less(key({1, 0}, {0, 0}), key({1, 1}, {1, 0})));
    CHECK(less(key({0, 1}, {1, 0}), key({1, 0}, {0, 1})));
    CHECK_FALSE(less(key({1, 0}, {0, 0}), key({1, 0}, {0, 0})));
}

TEST_CASE("arithmetic prunes zeros and respects the context") {
    auto p = SparsePolynomial::monomial(ctx, key({1, 0}, {0, 0}), 1.0);
    auto q = SparsePolynomial::monomial(ctx, key({1, 0}, {0, 0}), -1.0);
    CHECK((p + q).empty());
    CHECK((p * Complex{0.0, 0.0}).empty());
    SparsePolynomial other(std::vector<double>{0.3});
    CHECK_THROWS(p + other);
}

TEST_CASE("product adds exponents") {
    auto p = SparsePolynomial::monomial(ctx, key({1, 0}, {0, 1}), 2.0);
    auto q = SparsePolynomial::monomial(ctx, key({0, 2}, {1, 0}), {0.0, 3.0});
    auto r = p * q;
    REQUIRE(r.size() == 1);
    CHECK(r.coefficient(key({1, 2}, {1, 1})) == Complex{0.0, 6.0});
    CHECK(r.min_degree() == 5);
}

TEST_CASE("derivatives bring down exponents") {
    auto p = SparsePolynomial::monomial(ctx, key({3, 0}, {0, 2}), 1.0);
    CHECK(p.diff_xi(0).coefficient(key({2, 0}, {0, 2})) == Complex{3.0, 0.0});
    CHECK(p.diff_xibar(1).coefficient(key({3, 0}, {0, 1})) == Complex{2.0, 0.0});
    CHECK(p.diff_xi(1).empty());
}

TEST_CASE("reality test mirrors conjugate pairs") {
    SparsePolynomial p(ctx);
    p.add_term(key({1, 0}, {0, 1}), {0.5, 0.25});
    CHECK_FALSE(p.is_real());
    p.add_term(key({0, 1}, {1, 0}), {0.5, -0.25});
    CHECK(p.is_real());
    CHECK(quadratic_action(ctx).is_real());
}

TEST_CASE("omega dot and degree bookkeeping") {
    SparsePolynomial p(ctx);
    const auto k = key({2, 0}, {0, 1});
    p.add_term(k, 1.0);
    CHECK(p.omega_dot(k) == doctest::Approx(0.65));
    CHECK(p.min_degree() == 3);
    CHECK(SparsePolynomial(ctx).min_degree() == SparsePolynomial::kEmptyDegree);
}

TEST_CASE("evaluation agrees with a hand expansion") {
    SparsePolynomial p(ctx);
    p.add_term(key({2, 0}, {0, 1}), {1.0, 0.0});
    const std::vector<Complex> xi{{0.3, 0.4}, {-0.2, 0.1}};
    const Complex expect = xi[0] * xi[0] * std::conj(xi[1]);
    CHECK(std::abs(evaluate(p, xi) - expect) < 1e-15);
}

TEST_CASE("conjugate swaps exponent roles") {
    std::mt19937 rng(11);
    const auto p = random_poly(4, rng, ctx);
    const auto pc = p.conjugate();
    const std::vector<Complex> xi{{0.2, -0.7}, {0.5, 0.3}};
    CHECK(std::abs(evaluate(pc, xi) - std::conj(evaluate(p, xi))) < 1e-12);
}
