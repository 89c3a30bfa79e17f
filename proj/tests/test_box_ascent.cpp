#include "plnet/box_ascent.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace plnet;

namespace {

const double kFree = -std::numeric_limits<double>::infinity();

// Bound-constrained maximizer of -x'Qx/2 + b'x by enumerating active sets.
Vector quadratic_oracle(const Matrix& Q, const Vector& b, const Vector& lower) {
    const Index dim = b.size();
    double best = -std::numeric_limits<double>::infinity();
    Vector best_x;
    for (int mask = 0; mask < (1 << dim); ++mask) {
        std::vector<Index> fixed, free;
        for (Index k = 0; k < dim; ++k) {
            if ((mask >> k) & 1) {
                if (!std::isfinite(lower(k))) goto next;
                fixed.push_back(k);
            } else {
                free.push_back(k);
            }
        }
        {
            Vector x = Vector::Zero(dim);
            for (Index k : fixed) x(k) = lower(k);
            if (!free.empty()) {
                Matrix Qff(free.size(), free.size());
                Vector rhs(free.size());
                for (std::size_t a = 0; a < free.size(); ++a) {
                    rhs(a) = b(free[a]);
                    for (Index k : fixed) rhs(a) -= Q(free[a], k) * lower(k);
                    for (std::size_t c = 0; c < free.size(); ++c) Qff(a, c) = Q(free[a], free[c]);
                }
                const Vector xf = Qff.ldlt().solve(rhs);
                for (std::size_t a = 0; a < free.size(); ++a) x(free[a]) = xf(a);
            }
            bool feasible = true;
            for (Index k = 0; k < dim; ++k) feasible = feasible && x(k) >= lower(k) - 1e-12;
            const double value = -0.5 * x.dot(Q * x) + b.dot(x);
            if (feasible && value > best) {
                best = value;
                best_x = x;
            }
        }
    next:;
    }
    return best_x;
}

} // namespace

TEST_CASE("bound-constrained concave quadratic") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> z(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        const Index dim = 5;
        Matrix A(dim, dim);
        for (Index i = 0; i < dim; ++i)
            for (Index j = 0; j < dim; ++j) A(i, j) = z(rng);
        const Matrix Q = A * A.transpose() + 0.5 * Matrix::Identity(dim, dim);
        Vector b(dim), lower(dim);
        for (Index k = 0; k < dim; ++k) {
            b(k) = 2.0 * z(rng);
            lower(k) = k % 2 == 0 ? 0.0 : kFree;
        }
        const AscentObjective f = [&](const Vector& x, Vector& g) {
            g = b - Q * x;
            return -0.5 * x.dot(Q * x) + b.dot(x);
        };
        Vector x = Vector::Constant(dim, 1.0);
        const auto res = maximize_box(f, x, lower, {1e-10, 1e-16, 1000});
        CHECK(res.converged);
        CHECK((x - quadratic_oracle(Q, b, lower)).cwiseAbs().maxCoeff() < 1e-7);
        for (Index k = 0; k < dim; ++k) CHECK(x(k) >= lower(k));
    }
}

TEST_CASE("negated Rosenbrock") {
    const AscentObjective f = [](const Vector& x, Vector& g) {
        const double a = 1.0 - x(0), b = x(1) - x(0) * x(0);
        g(0) = 2.0 * a + 400.0 * x(0) * b;
        g(1) = -200.0 * b;
        return -(a * a + 100.0 * b * b);
    };
    Vector x(2);
    x << -1.2, 1.0;
    const auto res = maximize_box(f, x, Vector::Constant(2, kFree), {1e-9, 1e-18, 2000});
    CHECK(res.converged);
    CHECK(x(0) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(x(1) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("backs off outside the domain and never decreases") {
    std::vector<double> accepted;
    const AscentObjective f = [&](const Vector& x, Vector& g) {
        if (x(0) <= 0.0) return -std::numeric_limits<double>::infinity();
        g(0) = 1.0 / x(0) - 0.01;
        return std::log(x(0)) - 0.01 * x(0);
    };
    Vector x = Vector::Constant(1, 0.001);
    const auto res = maximize_box(f, x, Vector::Constant(1, kFree), {1e-10, 1e-18, 500});
    CHECK(res.converged);
    CHECK(x(0) == doctest::Approx(100.0).epsilon(1e-6));
}

TEST_CASE("stationary start is returned unchanged") {
    const AscentObjective f = [](const Vector& x, Vector& g) {
        g = -x;
        g(1) = -(x(1) - 2.0);
        return -0.5 * x(0) * x(0) - 0.5 * (x(1) - 2.0) * (x(1) - 2.0);
    };
    Vector x(2);
    x << 0.0, 2.0;
    const auto res = maximize_box(f, x, Vector::Constant(2, kFree), {});
    CHECK(res.iterations == 0);
    CHECK(res.converged);
    CHECK(x(0) == 0.0);
    CHECK(x(1) == 2.0);
}

TEST_CASE("start outside the box is projected") {
    const AscentObjective f = [](const Vector& x, Vector& g) {
        g = -2.0 * (x.array() + 1.0).matrix();
        return -(x.array() + 1.0).square().sum();
    };
    Vector x = Vector::Constant(3, -5.0);
    maximize_box(f, x, Vector::Zero(3), {1e-12, 1e-18, 100});
    CHECK(x.cwiseAbs().maxCoeff() == 0.0);
}
