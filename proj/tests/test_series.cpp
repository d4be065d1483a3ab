#include "doctest.h"

#include <cmath>
#include <random>
#include <stdexcept>

#include "kam/series.hpp"
#include "support.hpp"

using namespace kam;
using namespace testing_support;

namespace {

const double kAlpha = (std::sqrt(5.0) - 1.0) / 2.0;

double eval1(const Series& a, double theta, double r) {
    const double th[1] = {theta};
    const double rr[1] = {r};
    return evaluate(a, th, rr);
}

}  // namespace

TEST_SUITE("series") {

TEST_CASE("scale and add on small literals") {
    const Series c = trig1(4, 2, 1, 1.0, 0.0);
    CHECK(scale(c, 0.0).empty());
    const Series one_plus_r = add(monomial1(4, 2, 1, 1.0), Series::constant(1, 4, 2, 1.0));
    CHECK(one_plus_r.size() == 2);
    CHECK(one_plus_r.coeff(mode1(0, 0)) == cplx{1.0, 0.0});
    CHECK(one_plus_r.coeff(mode1(0, 1)) == cplx{1.0, 0.0});
}

TEST_CASE("mul: cos^2 = 1/2 + cos(4 pi theta)/2, r * r = r^2, x * 0 = 0") {
    const Series c = trig1(4, 2, 1, 1.0, 0.0);
    const Series sq = mul(c, c).value;
    CHECK(max_coeff_diff(sq, add_constant(trig1(4, 2, 2, 0.5, 0.0), 0.5)) < 1e-16);
    const Series r = monomial1(4, 2, 1, 1.0);
    CHECK(max_coeff_diff(mul(r, r).value, monomial1(4, 2, 2, 1.0)) == 0.0);
    CHECK(mul(c, Series(1, 4, 2)).value.empty());
}

TEST_CASE("mul reports the discarded tail") {
    const Series c = trig1(2, 2, 2, 1.0, 0.0);
    const Product p = mul(c, c, 0.1);
    // cos^2(4 pi theta) = 1/2 + cos(8 pi theta)/2; the k = +-4 pair falls outside kmax = 2
    CHECK(p.tail_norm == doctest::Approx(0.5 * std::exp(kTwoPi * 0.1 * 4)).epsilon(1e-14));
    CHECK(p.value.coeff(Mode{}) == cplx{0.5, 0.0});
}

TEST_CASE("derivatives") {
    const Series c = trig1(4, 2, 1, 1.0, 0.0);
    CHECK(max_coeff_diff(deriv_theta(c, 0), trig1(4, 2, 1, 0.0, -kTwoPi)) < 1e-15);
    CHECK(max_coeff_diff(deriv_r(monomial1(4, 2, 2, 1.0), 0), monomial1(4, 2, 1, 2.0)) == 0.0);
    CHECK(deriv_theta(Series::constant(1, 4, 2, 3.0), 0).empty());
}

TEST_CASE("jet, remainder, theta_average") {
    const Series a = add(add(Series::constant(1, 4, 2, 1.0), monomial1(4, 2, 1, kAlpha)), monomial1(4, 2, 2, 1.0));
    CHECK(max_coeff_diff(jet(a, 1), add(Series::constant(1, 4, 2, 1.0), monomial1(4, 2, 1, kAlpha))) == 0.0);
    CHECK(max_coeff_diff(remainder(a, 1), monomial1(4, 2, 2, 1.0)) == 0.0);
    CHECK(theta_average(trig1(4, 2, 1, 1.0, 0.0)).empty());
}

TEST_CASE("evaluate") {
    const Series c = trig1(4, 2, 1, 1.0, 0.0);
    CHECK(std::abs(eval1(c, 0.25, 0.0)) < 1e-15);
    CHECK(eval1(c, 0.0, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
    const Series k = add(monomial1(4, 2, 1, 0.618034), monomial1(4, 2, 2, 1.0));
    CHECK(eval1(k, 0.3, 0.1) == doctest::Approx(0.0718034).epsilon(1e-14));
}

TEST_CASE("majorant norm") {
    const Series c = trig1(4, 2, 1, 1.0, 0.0);
    // two coefficients of 1/2, each weighted e^{2 pi s}
    CHECK(majorant_norm(c, 0.1) == doctest::Approx(std::exp(0.2 * M_PI)).epsilon(1e-14));
    CHECK(majorant_norm(Series::constant(1, 4, 2, 1.0), 0.37) == 1.0);
    CHECK(majorant_norm(monomial1(4, 2, 2, 1.0), 0.5) == 0.25);
}

TEST_CASE("make projects onto real functions; from_terms rejects corrupted input") {
    const Series a = Series::make(1, 4, 0, {{mode1(1), cplx{1.0, 0.0}}});
    CHECK(a.coeff(mode1(1)) == cplx{0.5, 0.0});
    CHECK(a.coeff(mode1(-1)) == cplx{0.5, 0.0});
    CHECK(reality_drift(a) == 0.0);
    std::vector<Term> bad{{pack(mode1(1)), cplx{1.0, 0.0}}, {pack(mode1(-1)), cplx{0.0, 1.0}}};
    CHECK_THROWS_AS(Series::from_terms(1, 4, 0, bad), std::runtime_error);
}

TEST_CASE("truncation bounds are enforced") {
    CHECK_THROWS_AS(Series::make(1, 2, 1, {{mode1(3), cplx{1.0, 0.0}}}), std::invalid_argument);
    CHECK_THROWS_AS(Series::make(1, 2, 1, {{mode1(1, 2), cplx{1.0, 0.0}}}), std::invalid_argument);
    const Series b = trig1(8, 3, 5, 1.0, 0.5, 2).retruncate(4, 3);
    CHECK(b.empty());
}

TEST_CASE("property: reality preserved by arithmetic") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const int dim = 1 + trial % 2;
        const Series a = random_series(rng, dim, 6, 2);
        const Series b = random_series(rng, dim, 6, 2);
        for (const Series& x : {add(a, b), sub(a, b), scale(a, -0.3), mul(a, b).value, deriv_theta(a, dim - 1),
                                deriv_r(b, 0), jet(a, 1), remainder(b, 1), theta_average(a)})
            CHECK(reality_drift(x) <= 1e-12 * (1.0 + majorant_norm(x, 0.0)));
    }
}

TEST_CASE("property: submultiplicativity with tail") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 30; ++trial) {
        const int dim = 1 + trial % 2;
        const double s = 0.05 + 0.01 * (trial % 10);
        const Series a = random_series(rng, dim, 8 - 4 * (dim - 1), 3);
        const Series b = random_series(rng, dim, 8 - 4 * (dim - 1), 3);
        const Product p = mul(a, b, s);
        CHECK(majorant_norm(p.value, s) <= majorant_norm(a, s) * majorant_norm(b, s) + p.tail_norm + 1e-12);
    }
}

TEST_CASE("property: majorant norm dominates point values") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
        const int dim = 1 + trial % 2;
        const double s = 0.2;
        const Series a = random_series(rng, dim, 6, 3);
        const double bound = majorant_norm(a, s);
        for (int p = 0; p < 100; ++p) {
            double th[2], r[2];
            for (int j = 0; j < dim; ++j) {
                th[j] = u(rng);
                r[j] = s * (2.0 * u(rng) - 1.0);
            }
            CHECK(std::abs(evaluate(a, {th, std::size_t(dim)}, {r, std::size_t(dim)})) <= bound);
        }
    }
}

TEST_CASE("property: Cauchy-type loss of width for derivatives") {
    std::mt19937_64 rng(14);
    for (int trial = 0; trial < 20; ++trial) {
        const int kmax = 10;
        const double s = 0.1;
        const Series a = random_series(rng, 1, kmax, 0, 1.0, 0.3);
        const double d = majorant_norm(deriv_theta(a, 0), s);
        CHECK(d <= kTwoPi * kmax * majorant_norm(a, s));
        // |k| e^{-2 pi delta |k|} <= 1/(2 pi e delta): the derivative costs a strip of width delta
        for (double delta : {0.02, 0.05, 0.1})
            CHECK(d <= majorant_norm(a, s + delta) / (std::exp(1.0) * delta) * (1.0 + 1e-12));
    }
}

TEST_CASE("property: jet and remainder partition exactly") {
    std::mt19937_64 rng(15);
    for (int trial = 0; trial < 10; ++trial) {
        const Series a = random_series(rng, 2, 4, 4);
        for (int d = 0; d <= 4; ++d) CHECK(max_coeff_diff(add(jet(a, d), remainder(a, d)), a) == 0.0);
    }
}

TEST_CASE("prune returns the removed mass") {
    const Series a = add(trig1(8, 0, 1, 1.0, 0.0), trig1(8, 0, 7, 1e-20, 0.0));
    const auto [kept, removed] = prune(a, 1e-18, 0.0);
    CHECK(kept.size() == 2);
    CHECK(removed == doctest::Approx(1e-20));
}

}  // TEST_SUITE
