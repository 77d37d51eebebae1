/*
 Copyright 2026 The decopt authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#include <doctest.h>

#include <random>

#include "decopt/sdp.hpp"
#include "test_helpers.hpp"

using namespace decopt;

namespace {

/// Pure discrete Lyapunov feasibility problem: A'PA - tau^2 P <= -margin.
LmiFeasibilityProblem lyapunov_problem(const Matrix& A, double tau) {
    const Index p = A.rows();
    LmiFeasibilityProblem prob;
    prob.p = p;
    prob.m = p;
    prob.F0 = Matrix::Zero(p, p);
    prob.FP.resize(static_cast<size_t>(vech_size(p)));
    for_each_vech(p, [&](Index i, Index j, Index k) {
        Matrix term = A.row(i).transpose() * A.row(j);
        Matrix e = Matrix::Zero(p, p);
        e(i, j) = 1.0;
        term -= tau * tau * e;
        term += term.transpose().eval();
        if (i == j) term *= 0.5;
        prob.FP[static_cast<size_t>(k)] = term;
    });
    return prob;
}

double power_iteration_max_eig(const Matrix& S, int iters = 3000) {
    // Shifted power iteration on S + cI so the dominant eigenvalue of the
    // shifted matrix is the maximum eigenvalue of S.
    const double shift = S.cwiseAbs().rowwise().sum().maxCoeff() + 1.0;
    const Matrix M = S + shift * Matrix::Identity(S.rows(), S.rows());
    Vector v = Vector::Ones(S.rows()).normalized();
    double lambda = 0.0;
    for (int k = 0; k < iters; ++k) {
        Vector w = M * v;
        lambda = v.dot(w);
        v = w.normalized();
    }
    return lambda - shift;
}

Matrix random_with_radius(Index p, double radius, std::mt19937_64& rng) {
    Matrix A = decopt::testing::random_matrix(p, p, rng);
    Eigen::EigenSolver<Matrix> es(A);
    const double rho = es.eigenvalues().cwiseAbs().maxCoeff();
    return A * (radius / rho);
}

}  // namespace

TEST_CASE("max_eigenvalue") {
    SUBCASE("diagonal") {
        Matrix S = Matrix::Zero(3, 3);
        S.diagonal() << 1, 2, 3;
        CHECK(max_eigenvalue(S) == doctest::Approx(3.0));
    }
    SUBCASE("off-diagonal") {
        Matrix S(2, 2);
        S << 0, 1, 1, 0;
        CHECK(max_eigenvalue(S) == doctest::Approx(1.0));
    }
    SUBCASE("agrees with power iteration on random symmetric matrices") {
        std::mt19937_64 rng(41);
        for (int trial = 0; trial < 20; ++trial) {
            Matrix S = decopt::testing::random_matrix(6, 6, rng);
            S = 0.5 * (S + S.transpose()).eval();
            CHECK(max_eigenvalue(S) ==
                  doctest::Approx(power_iteration_max_eig(S)).epsilon(1e-8));
        }
    }
    SUBCASE("non-finite entries rejected") {
        Matrix S = Matrix::Zero(2, 2);
        S(0, 0) = std::numeric_limits<double>::infinity();
        CHECK_THROWS_AS(max_eigenvalue(S), std::invalid_argument);
    }
}

TEST_CASE("solve: scalar Lyapunov sanity") {
    SUBCASE("a=0.5 at tau=0.9 is feasible with any positive P") {
        const auto prob = lyapunov_problem(Matrix::Constant(1, 1, 0.5), 0.9);
        const auto res = solve(prob);
        CHECK(res.status == FeasibilityStatus::feasible);
        CHECK(res.P(0, 0) > 0.0);
        CHECK(max_eigenvalue(prob.evaluate(res.P, res.lambda)) <= -prob.margin_tol);
    }
    SUBCASE("a=1.0 at tau=0.9 is infeasible") {
        const auto res = solve(lyapunov_problem(Matrix::Constant(1, 1, 1.0), 0.9));
        CHECK(res.status == FeasibilityStatus::infeasible_at_tolerance);
    }
}

TEST_CASE("solve: classification matches the spectral-radius rule") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> size_dist(2, 6);
    // Radii sampled away from the probed taus so the analytic verdict is
    // unambiguous.
    const std::vector<double> radii = {0.3, 0.45, 0.6, 0.8, 0.9, 1.1, 1.3, 1.5};
    int idx = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const Index p = size_dist(rng);
        const double radius = radii[static_cast<size_t>(idx++ % radii.size())];
        const Matrix A = random_with_radius(p, radius, rng);
        for (double tau : {0.7, 1.0}) {
            const auto prob = lyapunov_problem(A, tau);
            const auto res = solve(prob);
            const bool analytic = radius < tau;
            CHECK(res.status != FeasibilityStatus::solver_failure);
            CHECK((res.status == FeasibilityStatus::feasible) == analytic);
            if (res.status == FeasibilityStatus::feasible) {
                // Independent witness re-check.
                CHECK(max_eigenvalue(prob.evaluate(res.P, res.lambda)) <= -prob.margin_tol);
                CHECK(min_eigenvalue(res.P) >= prob.eps_P);
            }
        }
    }
}

TEST_CASE("solve: multiplier path") {
    // F = F0 + lambda * Flam with F0 = diag(1), Flam = diag(-1): feasible only
    // through a strictly positive multiplier.
    LmiFeasibilityProblem prob;
    prob.p = 1;
    prob.m = 1;
    prob.F0 = Matrix::Constant(1, 1, 1.0);
    prob.FP = {Matrix::Zero(1, 1)};
    prob.Flam = {Matrix::Constant(1, 1, -1.0)};
    const auto res = solve(prob);
    CHECK(res.status == FeasibilityStatus::feasible);
    CHECK(res.lambda(0) > 1.0);
}

TEST_CASE("solve: scale invariance and monotone margins") {
    std::mt19937_64 rng(8);
    const Matrix A = random_with_radius(4, 0.8, rng);
    auto prob = lyapunov_problem(A, 0.9);
    const auto base = solve(prob);
    CHECK(base.status == FeasibilityStatus::feasible);

    SUBCASE("scaling F by a positive constant keeps the verdict") {
        auto scaled = prob;
        for (auto& M : scaled.FP) M *= 37.0;
        scaled.F0 *= 37.0;
        CHECK(solve(scaled).status == FeasibilityStatus::feasible);
    }
    SUBCASE("feasible witnesses nest across margins") {
        // The witness at the default margin also certifies any smaller margin.
        const double slack = base.slack;
        CHECK(slack > 1e-6);
        CHECK(max_eigenvalue(prob.evaluate(base.P, base.lambda)) <= -1e-12);
    }
}

TEST_CASE("LmiFeasibilityProblem affinity") {
    std::mt19937_64 rng(9);
    const Matrix A = random_with_radius(3, 0.7, rng);
    const auto prob = lyapunov_problem(A, 0.8);
    // F(alpha X + beta Y) = alpha F(X) + beta F(Y) when F0 = 0.
    Matrix P1 = decopt::testing::random_matrix(3, 3, rng);
    P1 = (0.5 * (P1 + P1.transpose())).eval();
    Matrix P2 = decopt::testing::random_matrix(3, 3, rng);
    P2 = (0.5 * (P2 + P2.transpose())).eval();
    const Vector none = Vector::Zero(0);
    const Matrix lhs = prob.evaluate(2.0 * P1 - 0.5 * P2, none);
    const Matrix rhs = 2.0 * prob.evaluate(P1, none) - 0.5 * prob.evaluate(P2, none);
    CHECK((lhs - rhs).norm() < 1e-12);
}
