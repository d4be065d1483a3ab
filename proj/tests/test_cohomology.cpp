#include "doctest.h"

#include <cmath>
#include <random>

#include "kam/cohomology.hpp"
#include "kam/errors.hpp"
#include "support.hpp"

using namespace kam;
using namespace testing_support;

namespace {

const double kGolden = (std::sqrt(5.0) - 1.0) / 2.0;

Frequency freq1(double a) {
    Frequency f;
    f.alpha = {a};
    return f;
}

}  // namespace

TEST_SUITE("cohomology") {

TEST_CASE("golden mean scan") {
    const auto scan = check_diophantine({kGolden}, 1.0, 8);
    // min over k <= 8 of dist(k alpha) k is attained at k = 1: 1 - alpha = (3 - sqrt 5)/2
    CHECK(scan.min_margin == doctest::Approx(0.3819660112501051).epsilon(1e-13));
    CHECK(std::abs(scan.argmin_k[0]) == 1);
    CHECK(scan.admissible_gamma == doctest::Approx(scan.min_margin));
}

TEST_CASE("rational frequencies are resonant") {
    CHECK_THROWS_AS(check_diophantine({0.5}, 1.0, 8), ResonanceError);
    // dist(k.alpha, Z) vanishes at k = (1, 0) whenever some alpha_j is an integer
    CHECK_THROWS_AS(check_diophantine({1.0, (1.0 + std::sqrt(5.0)) / 2.0}, 1.2, 16), ResonanceError);
    CHECK_NOTHROW(check_diophantine({0.7548776662, 0.5698402910}, 2.0, 32));
}

TEST_CASE("spectrum ordering and values") {
    const auto sp = small_divisor_spectrum(freq1(kGolden), 3);
    REQUIRE(sp.size() == 3);
    CHECK(std::abs(sp[0].k[0]) == 3);
    CHECK(sp[0].divisor == doctest::Approx(0.1458980337503155).epsilon(1e-12));
    CHECK(sp[0].amplification == doctest::Approx(1.0 / (kTwoPi * 0.1458980337503155)).epsilon(1e-12));
    for (std::size_t i = 1; i < sp.size(); ++i) CHECK(sp[i - 1].amplification >= sp[i].amplification);
    CHECK(small_divisor_spectrum(freq1(kGolden), 0).empty());
    const auto res = small_divisor_spectrum(freq1(0.5), 4);
    CHECK(res.front().resonant);
    CHECK(std::isinf(res.front().amplification));
}

TEST_CASE("homological equation: cosine data") {
    const Frequency f = freq1(kGolden);
    const Series g = trig1(8, 0, 1, 1.0, 0.0);
    const Series sol = solve_homological(g, f);
    // f = sin(2 pi theta) / (2 pi alpha)
    CHECK(max_coeff_diff(sol, trig1(8, 0, 1, 0.0, 1.0 / (kTwoPi * kGolden))) < 1e-16);
    CHECK(1.0 / (kTwoPi * kGolden) == doctest::Approx(0.257518).epsilon(1e-5));
    CHECK(solve_homological(Series(1, 8, 0), f).empty());
    CHECK_THROWS_AS(solve_homological(Series::constant(1, 8, 0, 1.0), f), PreconditionError);
    CHECK_THROWS_AS(solve_homological(monomial1(8, 1, 1, 1.0), f), std::invalid_argument);
}

TEST_CASE("homological equation: divisor floor") {
    // the solver divides by k.alpha itself, so only near-zero k.alpha is refused
    Frequency f = freq1(1e-12);
    const Series g = trig1(4, 0, 2, 1.0, 0.0);
    CHECK_THROWS_AS(solve_homological(g, f), ResonanceError);
    f.divisor_floor = 0.0;
    CHECK_NOTHROW(solve_homological(g, f));
    CHECK_NOTHROW(solve_homological(g, freq1(0.5)));
}

TEST_CASE("property: solve and Lie derivative are mutually inverse") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 40; ++trial) {
        const int dim = 1 + trial % 2;
        Frequency f;
        f.alpha = dim == 1 ? std::vector<double>{kGolden} : std::vector<double>{0.7548776662, 0.5698402910};
        const Series g = random_series(rng, dim, dim == 1 ? 24 : 10, 0, 1.0, 0.6, true);
        const Series sol = solve_homological(g, f);
        CHECK(theta_average(sol).empty());
        CHECK(max_coeff_diff(lie_derivative_alpha(sol, f), g) <= 1e-14 * (1.0 + majorant_norm(g, 0.0)));
        CHECK(max_coeff_diff(solve_homological(lie_derivative_alpha(sol, f), f), sol) <=
              1e-13 * (1.0 + majorant_norm(sol, 0.0)));
    }
}

TEST_CASE("property: scan margin is the true minimum over the ball") {
    std::mt19937_64 rng(32);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const std::vector<double> alpha{u(rng), u(rng)};
        const double tau = 1.5;
        const auto scan = check_diophantine(alpha, tau, 12);
        double brute = 1e300;
        for (const auto& k : fourier_indices(2, 12)) {
            const int l1 = std::abs(k[0]) + std::abs(k[1]);
            if (l1 == 0) continue;
            brute = std::min(brute, dist_to_integer(k[0] * alpha[0] + k[1] * alpha[1]) * std::pow(l1, tau));
        }
        CHECK(scan.min_margin == doctest::Approx(brute).epsilon(1e-14));
    }
}

}  // TEST_SUITE
