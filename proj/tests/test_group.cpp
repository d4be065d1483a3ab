#include "doctest.h"

#include <cmath>
#include <random>

#include "kam/errors.hpp"
#include "kam/group.hpp"
#include "support.hpp"

using namespace kam;
using namespace testing_support;

namespace {

GridOptions grid_opts(int kmax, int mmax = 4) {
    GridOptions o;
    o.kmax = kmax;
    o.mmax = mmax;
    return o;
}

LieElement sine_field(double delta, int kmax) {
    LieElement g = LieElement::zero(1, kmax);
    g.phi_dot[0] = trig1(kmax, 0, 1, 0.0, delta);
    return g;
}

// theta(1) for theta' = delta sin(2 pi theta): tan(pi theta_1) = tan(pi theta_0) e^{2 pi delta}
double sine_flow(double theta0, double delta) {
    return std::atan(std::tan(M_PI * theta0) * std::exp(kTwoPi * delta)) / M_PI;
}

GroupElement random_group(std::mt19937_64& rng, int dim, int kmax, double amp) {
    GroupElement g = GroupElement::identity(dim, kmax);
    std::normal_distribution<double> normal;
    for (int j = 0; j < dim; ++j) {
        g.v[j] = random_series(rng, dim, kmax, 0, amp, 0.05, true);
        g.R[j] = amp * normal(rng);
    }
    g.S = random_series(rng, dim, kmax, 0, amp, 0.05, true);
    return g;
}

LieElement random_lie(std::mt19937_64& rng, int dim, int kmax, double amp) {
    LieElement g = LieElement::zero(dim, kmax);
    std::normal_distribution<double> normal;
    for (int j = 0; j < dim; ++j) {
        g.phi_dot[j] = random_series(rng, dim, kmax, 0, amp, 0.05, true);
        g.R_dot[j] = amp * normal(rng);
    }
    g.S_dot = random_series(rng, dim, kmax, 0, amp, 0.05, true);
    return g;
}

double group_diff(const GroupElement& a, const GroupElement& b) {
    double d = max_coeff_diff(a.S, b.S);
    for (int j = 0; j < a.dim(); ++j) {
        d = std::max(d, max_coeff_diff(a.v[j], b.v[j]));
        d = std::max(d, std::abs(a.R[j] - b.R[j]));
    }
    return d;
}

}  // namespace

TEST_SUITE("group") {

TEST_CASE("exp of a sine field matches the closed-form flow") {
    const double delta = 1e-4;
    const auto res = exponential(sine_field(delta, 32), {0.05, 0.2}, grid_opts(32));
    CHECK(res.gate_ratio < 1.0);
    CHECK(res.lipschitz < 0.5);
    const PointMap pm(res.element);
    for (double th : {0.0, 0.1, 0.25, 0.3, 0.45, 0.5, 0.71}) {
        double out_th, out_r;
        const double r = 0.0;
        pm.apply(&th, &r, &out_th, &out_r);
        CHECK(out_th - std::round(out_th - sine_flow(th, delta)) == doctest::Approx(sine_flow(th, delta)).epsilon(1e-13));
        CHECK(std::abs(out_r) < 1e-16);
    }
    CHECK(res.displacement <= res.bound);
}

TEST_CASE("exp outside the smallness gate") {
    const double delta = 0.01;
    CHECK_THROWS_AS(exponential(sine_field(delta, 64), {0.05, 0.2}, grid_opts(64)), PreconditionError);
    const auto res = exponential(sine_field(delta, 64), {0.05, 0.2}, grid_opts(64), ExpGate::monitor);
    CHECK(res.gate_ratio > 1.0);
    const PointMap pm(res.element);
    for (double th : {0.1, 0.2, 0.35, 0.8}) {
        double out_th, out_r;
        const double r = 0.05;
        pm.apply(&th, &r, &out_th, &out_r);
        CHECK(out_th == doctest::Approx(sine_flow(th, delta) + (th > 0.5 ? 1.0 : 0.0)).epsilon(1e-12));
        // r' = -r phi_dot'(theta) integrates to r / (d theta_1 / d theta_0)
        const double h = 1e-6;
        const double slope = (sine_flow(th + h, delta) - sine_flow(th - h, delta)) / (2 * h);
        CHECK(out_r == doctest::Approx(r / slope).epsilon(1e-8));
    }
}

TEST_CASE("exp refuses a field that breaks Picard contraction") {
    CHECK_THROWS_AS(exponential(sine_field(0.2, 16), {0.05, 0.2}, grid_opts(16), ExpGate::monitor),
                    PreconditionError);
}

TEST_CASE("fiber translations and the pullback of r^2") {
    const double eps = 1e-3;
    const Series S = trig1(8, 0, 1, 0.0, eps / kTwoPi);
    const GroupElement g = fiber_translation({0.0}, S, 8);
    // rho = eps cos(2 pi theta): r^2 -> (r + eps cos)^2
    const Series r2 = monomial1(8, 2, 2, 1.0);
    const Series expect = add(add(add_constant(trig1(8, 2, 2, 0.5 * eps * eps, 0.0), 0.5 * eps * eps),
                                  trig1(8, 2, 1, 2.0 * eps, 0.0, 1)),
                              r2);
    CHECK(max_coeff_diff(pullback(r2, g, grid_opts(8, 2)), expect) < 1e-17);

    const GroupElement h = fiber_translation({0.1}, trig1(8, 0, 2, 0.02, 0.0), 8);
    const GroupElement gh = compose(g, h, grid_opts(8));
    CHECK(gh.R[0] == doctest::Approx(0.1));
    CHECK(max_coeff_diff(gh.S, add(S, h.S)) < 1e-17);
    for (const auto& v : gh.v) CHECK(v.empty());
}

TEST_CASE("apply_point on a translation") {
    const GroupElement g = fiber_translation({0.1}, trig1(8, 0, 1, 0.0, 0.01 / kTwoPi), 8);
    const std::vector<double> th0{0.0}, r0{0.0}, th1{0.25}, r1{0.02};
    const auto [to0, ro0] = apply_point(g, th0, r0);
    const auto [to1, ro1] = apply_point(g, th1, r1);
    CHECK(to0[0] == 0.0);
    CHECK(to1[0] == 0.25);
    CHECK(ro0[0] == doctest::Approx(0.11).epsilon(1e-15));
    CHECK(ro1[0] == doctest::Approx(0.12).epsilon(1e-12));
}

TEST_CASE("identity and inverse") {
    std::mt19937_64 rng(51);
    const auto opts = grid_opts(16);
    const GroupElement id = GroupElement::identity(1, 16);
    const GroupElement g = random_group(rng, 1, 16, 1e-3);
    CHECK(group_diff(compose(g, id, opts), g) < 1e-18);
    CHECK(group_diff(compose(id, g, opts), g) < 1e-18);
    const GroupElement gi = inverse(g, opts);
    CHECK(group_diff(compose(g, gi, opts), id) < 1e-15);
    CHECK(group_diff(compose(gi, g, opts), id) < 1e-15);
    CHECK(min_jacobian_det(g) > 0.9);
    CHECK(distance_from_identity(id, 0.1, opts) == 0.0);
}

TEST_CASE("property: group laws on random elements") {
    std::mt19937_64 rng(52);
    for (int trial = 0; trial < 10; ++trial) {
        const int dim = 1 + trial % 2;
        const int kmax = dim == 1 ? 24 : 8;
        const auto opts = grid_opts(kmax, 3);
        const GroupElement a = random_group(rng, dim, kmax, 1e-3);
        const GroupElement b = random_group(rng, dim, kmax, 1e-3);
        const GroupElement c = random_group(rng, dim, kmax, 1e-3);
        CHECK(group_diff(compose(compose(a, b, opts), c, opts), compose(a, compose(b, c, opts), opts)) < 1e-13);
        CHECK(group_diff(compose(a, inverse(a, opts), opts), GroupElement::identity(dim, kmax)) < 1e-13);
        // action law: (H o a) o b = H o (a o b)
        const Series H = random_series(rng, dim, kmax, 3, 1.0, 0.05);
        const Series lhs = pullback(pullback(H, a, opts), b, opts);
        const Series rhs = pullback(H, compose(a, b, opts), opts);
        CHECK(max_coeff_diff(lhs, rhs) < 1e-12);
        CHECK(symplectic_defect(a, 50, trial) < 1e-7);
        CHECK(symplectic_defect(compose(a, b, opts), 50, trial) < 1e-7);
    }
}

TEST_CASE("property: exp estimates and the one-parameter law") {
    std::mt19937_64 rng(53);
    const StripParams strips{0.05, 0.2};
    for (int trial = 0; trial < 8; ++trial) {
        const int dim = 1 + trial % 2;
        const int kmax = dim == 1 ? 24 : 8;
        const auto opts = grid_opts(kmax, 3);
        LieElement g = random_lie(rng, dim, kmax, 1.0);
        const double target = 0.5 * exp_gamma0(dim) * strips.sigma * strips.sigma;
        g = g.scaled(target / g.norm(strips.s + strips.sigma));
        const auto full = exponential(g, strips, opts);
        CHECK(full.displacement <= full.bound);
        CHECK(full.bound == doctest::Approx(exp_c0(dim) / strips.sigma * full.lie_norm));
        const auto half = exponential(g.scaled(0.5), strips, opts);
        CHECK(group_diff(compose(half.element, half.element, opts), full.element) < 1e-13);
        const auto back = exponential(g.scaled(-1.0), strips, opts);
        CHECK(group_diff(compose(full.element, back.element, opts), GroupElement::identity(dim, kmax)) < 1e-13);
        CHECK(symplectic_defect(full.element, 40, trial) < 1e-7);
        // the grid exp agrees with the Lie series on observables
        const Series H = random_series(rng, dim, kmax, 3, 1.0, 0.05);
        CHECK(max_coeff_diff(pullback(H, full.element, opts), lie_transform(H, g, 1.0, strips.s)) < 1e-12);
    }
}

TEST_CASE("exp converges to first order as the field shrinks") {
    std::mt19937_64 rng(54);
    const auto opts = grid_opts(16, 3);
    LieElement g = random_lie(rng, 1, 16, 1.0);
    g = g.scaled(1e-3 / g.norm(0.25));
    // |exp(t g) - id - t g| = O(t^2): the first-order remainder drops by four when t halves
    auto remainder = [&](double t) {
        const auto e = exponential(g.scaled(t), {0.05, 0.2}, opts);
        return max_coeff_diff(e.element.v[0], scale(g.phi_dot[0], t));
    };
    const double r1 = remainder(1.0), r2 = remainder(0.5), r4 = remainder(0.25);
    CHECK(r1 / r2 == doctest::Approx(4.0).epsilon(0.05));
    CHECK(r2 / r4 == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("a fiber map with a non-closed 1-form is not symplectic") {
    const double amp = 0.01;
    const PhaseMap bad = [amp](const double* th, const double* r, double* to, double* ro) {
        to[0] = th[0];
        to[1] = th[1];
        ro[0] = r[0] + amp * std::sin(kTwoPi * th[1]);
        ro[1] = r[1];
    };
    CHECK(symplectic_defect(bad, 2, 50) > 1e-3);
    const PhaseMap good = [amp](const double* th, const double* r, double* to, double* ro) {
        to[0] = th[0];
        to[1] = th[1];
        ro[0] = r[0] + amp * std::sin(kTwoPi * th[0]);
        ro[1] = r[1] + amp * std::cos(kTwoPi * th[1]);
    };
    CHECK(symplectic_defect(good, 2, 50) < 1e-7);
}

TEST_CASE("Lie series") {
    const LieElement g = sine_field(1e-3, 16);
    const Series H = trig1(16, 2, 1, 1.0, 0.0);
    CHECK(max_coeff_diff(lie_transform_delta(H, g, 0.0, 0.1), Series(1, 16, 2)) == 0.0);
    CHECK(max_coeff_diff(add(H, lie_transform_delta(H, g, 1.0, 0.1)), lie_transform(H, g, 1.0, 0.1)) < 1e-17);
    // there and back
    const Series there = lie_transform(H, g, 1.0, 0.1);
    CHECK(max_coeff_diff(lie_transform(there, g, -1.0, 0.1), H) < 1e-14);
}

}  // TEST_SUITE
