#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "epiwave/error.hpp"
#include "epiwave/fields.hpp"
#include "oracles.hpp"

using namespace epiwave;

namespace {

StateField filled(const Mesh& m, double (*f)(double, double), std::size_t n = 1) {
    StateField y = StateField::zeros(n, m);
    for (std::size_t c = 0; c < n; ++c)
        for (std::size_t j = 0; j < y.ages(); ++j)
            for (std::size_t i = 0; i < m.nx; ++i) y.value(c, j, i) = f(m.age(j), m.x(i));
    return y;
}

}  // namespace

TEST(Norms, ZeroField) {
    const Mesh m = build_mesh(1.0, 1.0, 10, 11);
    const StateField y = StateField::zeros(2, m);
    EXPECT_EQ(norm_H(y, m), 0.0);
    EXPECT_EQ(norm_V(y, m), 0.0);
    EXPECT_EQ(norm_H_slope(y, m), 0.0);
}

TEST(Norms, UnitConstant) {
    const Mesh m = build_mesh(1.0, 1.0, 10, 11);
    const StateField y = filled(m, [](double, double) { return 1.0; });
    EXPECT_NEAR(norm_H(y, m), 1.0, 1e-14);
}

TEST(Norms, LinearInAgeConvergesToOneOverRootThree) {
    double prev = 0.0;
    for (std::size_t na : {10u, 20u, 40u}) {
        const Mesh m = build_mesh(1.0, 1.0, na, 5);
        const double err = std::abs(norm_H(filled(m, [](double a, double) { return a; }), m) - 1.0 / std::sqrt(3.0));
        EXPECT_LT(err, 1.0 / static_cast<double>(na * na));
        if (prev > 0.0) EXPECT_NEAR(prev / err, 4.0, 0.2);
        prev = err;
    }
}

TEST(Norms, ConstantHasNoGradientContribution) {
    const Mesh m = build_mesh(1.0, 2.0, 8, 9);
    const StateField y = filled(m, [](double, double) { return -3.0; });
    EXPECT_NEAR(norm_V(y, m), 3.0 * std::sqrt(2.0), 1e-13);
}

TEST(Norms, LinearInSpace) {
    const Mesh m = build_mesh(1.0, 1.0, 10, 11);
    const StateField y = filled(m, [](double, double x) { return x; });
    // The trapezoid is not exact for x^2; the gradient of x is exact.
    EXPECT_NEAR(norm_V(y, m), std::sqrt(1.0 / 3.0 + 1.0), 2e-3);
    const Mesh fine = build_mesh(1.0, 1.0, 10, 101);
    EXPECT_NEAR(norm_V(filled(fine, [](double, double x) { return x; }), fine), std::sqrt(4.0 / 3.0), 2e-5);
}

TEST(Norms, SecondOrderQuadrature) {
    auto f = [](double a, double x) { return std::cos(a) * std::sin(2.0 * x) + a * x; };
    // int_0^1 int_0^1 f^2 by fine reference
    const Mesh ref = build_mesh(1.0, 1.0, 1280, 1281);
    StateField yr = StateField::zeros(1, ref, false);
    for (std::size_t j = 0; j <= ref.na; ++j)
        for (std::size_t i = 0; i < ref.nx; ++i) yr.value(0, j, i) = f(ref.age(j), ref.x(i));
    const double exact = norm_H(yr, ref);
    double prev = 0.0;
    for (std::size_t na : {10u, 20u, 40u}) {
        const Mesh m = build_mesh(1.0, 1.0, na, na + 1);
        StateField y = StateField::zeros(1, m, false);
        for (std::size_t j = 0; j <= m.na; ++j)
            for (std::size_t i = 0; i < m.nx; ++i) y.value(0, j, i) = f(m.age(j), m.x(i));
        const double err = std::abs(norm_H(y, m) - exact);
        if (prev > 0.0) EXPECT_NEAR(prev / err, 4.0, 0.3);
        prev = err;
    }
}

TEST(Norms, HomogeneityAndTriangle) {
    const Mesh m = build_mesh(1.0, 1.0, 6, 7);
    std::mt19937 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const StateField a = oracle::random_field(2, m, rng);
        const StateField b = oracle::random_field(2, m, rng);
        for (double c : {-2.5, 0.0, 0.5, 3.0}) {
            StateField s = a;
            for (double& v : s.values()) v *= c;
            EXPECT_NEAR(norm_H(s, m), std::abs(c) * norm_H(a, m), 1e-13);
            EXPECT_NEAR(norm_V(s, m), std::abs(c) * norm_V(a, m), 1e-12);
        }
        StateField sum = a;
        for (std::size_t q = 0; q < sum.size(); ++q) sum.values()[q] += b.values()[q];
        EXPECT_LE(norm_H(sum, m), norm_H(a, m) + norm_H(b, m) + 1e-14);
        EXPECT_LE(norm_V(sum, m), norm_V(a, m) + norm_V(b, m) + 1e-14);
        EXPECT_GE(norm_V(a, m), norm_H(a, m));
    }
}

TEST(Norms, ShapeMismatch) {
    const Mesh m = build_mesh(1.0, 1.0, 6, 7);
    const Mesh other = build_mesh(1.0, 1.0, 6, 9);
    const StateField y = StateField::zeros(1, other);
    EXPECT_THROW(norm_H(y, m), Error);
    EXPECT_THROW(norm_V(y, m), Error);
    const StateField no_slope = StateField::zeros(1, m, false);
    try {
        norm_H_slope(no_slope, m);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::MissingSlope);
    }
}

TEST(Gradient, ExactForQuadratics) {
    const std::size_t nx = 9;
    const double dx = 1.0 / 8.0;
    std::vector<double> u(nx), g(nx);
    for (std::size_t i = 0; i < nx; ++i) u[i] = 3.0 * i * dx * i * dx - i * dx;
    gradient_x(u, dx, g);
    for (std::size_t i = 0; i < nx; ++i) EXPECT_NEAR(g[i], 6.0 * i * dx - 1.0, 1e-12);
}

TEST(DiffNorms, IdenticalRuns) {
    const Mesh m = build_mesh(1.0, 1.0, 4, 5);
    std::mt19937 rng(1);
    std::vector<StateField> run = {oracle::random_field(1, m, rng), oracle::random_field(1, m, rng)};
    const NormReport r = diff_norms(run, run, m);
    EXPECT_EQ(r.l2_H, 0.0);
    EXPECT_EQ(r.h1_V, 0.0);
    EXPECT_EQ(r.sup_t_V, 0.0);
    EXPECT_EQ(r.sup_t_H_slope, 0.0);
    EXPECT_EQ(r.sup_abs, 0.0);
}

TEST(DiffNorms, ConstantOffset) {
    const Mesh m = build_mesh(1.0, 1.0, 4, 5);
    std::mt19937 rng(2);
    std::vector<StateField> a = {oracle::random_field(1, m, rng), oracle::random_field(1, m, rng)};
    std::vector<StateField> b = a;
    for (auto& s : b)
        for (double& v : s.values()) v += 1.0;
    const NormReport r = diff_norms(a, b, m);
    EXPECT_NEAR(r.sup_t_V, 1.0, 1e-14);
    EXPECT_NEAR(r.sup_abs, 1.0, 1e-14);
    EXPECT_EQ(r.sup_t_H_slope, 0.0);
}

TEST(DiffNorms, MatchesBruteForce) {
    const Mesh m = build_mesh(1.0, 1.0, 5, 6);
    std::mt19937 rng(3);
    std::vector<StateField> a, b;
    for (int s = 0; s < 4; ++s) {
        a.push_back(oracle::random_field(2, m, rng));
        b.push_back(oracle::random_field(2, m, rng));
    }
    const NormReport r = diff_norms(a, b, m);
    double sup_v = 0.0, sup_h = 0.0, sup_abs = 0.0;
    const auto wa = oracle::trapezoid(m.na, m.da);
    const auto wx = oracle::trapezoid(m.nx - 1, m.dx);
    for (std::size_t s = 0; s < a.size(); ++s) {
        double v2 = 0.0, h2 = 0.0;
        for (std::size_t c = 0; c < 2; ++c)
            for (std::size_t j = 0; j <= m.na; ++j) {
                std::vector<double> d(m.nx), g(m.nx);
                for (std::size_t i = 0; i < m.nx; ++i) {
                    d[i] = a[s].value(c, j, i) - b[s].value(c, j, i);
                    sup_abs = std::max(sup_abs, std::abs(d[i]));
                    const double ds = a[s].slope(c, j, i) - b[s].slope(c, j, i);
                    h2 += wa[j] * wx[i] * ds * ds;
                }
                // central inside, second-order one-sided at the ends
                for (std::size_t i = 1; i + 1 < m.nx; ++i) g[i] = (d[i + 1] - d[i - 1]) / (2.0 * m.dx);
                g[0] = (-3.0 * d[0] + 4.0 * d[1] - d[2]) / (2.0 * m.dx);
                const std::size_t e = m.nx - 1;
                g[e] = (3.0 * d[e] - 4.0 * d[e - 1] + d[e - 2]) / (2.0 * m.dx);
                for (std::size_t i = 0; i < m.nx; ++i) v2 += wa[j] * wx[i] * (d[i] * d[i] + g[i] * g[i]);
            }
        sup_v = std::max(sup_v, std::sqrt(v2));
        sup_h = std::max(sup_h, std::sqrt(h2));
    }
    EXPECT_NEAR(r.sup_t_V, sup_v, 1e-12);
    EXPECT_NEAR(r.sup_t_H_slope, sup_h, 1e-12);
    EXPECT_EQ(r.sup_abs, sup_abs);
    EXPECT_GE(r.h1_V, r.l2_H);
    EXPECT_NEAR(r.energy(0.5), std::sqrt(sup_v * sup_v + 0.5 * sup_h * sup_h), 1e-12);
}

TEST(DiffNorms, Errors) {
    const Mesh m = build_mesh(1.0, 1.0, 4, 5);
    std::vector<StateField> one = {StateField::zeros(1, m)};
    std::vector<StateField> two = {StateField::zeros(1, m), StateField::zeros(1, m)};
    std::vector<StateField> other = {StateField::zeros(2, m)};
    try {
        diff_norms(one, two, m);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::LengthMismatch);
    }
    try {
        diff_norms(one, other, m);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ShapeMismatch);
    }
}

TEST(StateField, SlicesAndFiniteness) {
    const Mesh m = build_mesh(1.0, 1.0, 4, 5);
    StateField y = StateField::zeros(2, m);
    Slice s(2, m.nx, 3.0);
    y.set_value_slice(2, s);
    EXPECT_EQ(y.value_slice(2), s);
    EXPECT_EQ(y.value(1, 2, 4), 3.0);
    EXPECT_TRUE(y.all_finite());
    y.slope(0, 0, 0) = std::nan("");
    EXPECT_FALSE(y.all_finite());
    EXPECT_THROW(y.set_value_slice(1, Slice(1, m.nx)), Error);
}
