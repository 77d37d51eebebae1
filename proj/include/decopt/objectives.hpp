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
#ifndef DECOPT_OBJECTIVES_HPP
#define DECOPT_OBJECTIVES_HPP

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "decopt/state_space.hpp"

namespace decopt {

/**
 * Family of n node-local quadratic objectives
 *
 *   f_i(x) = 1/2 (x - a_i)^T Q_i (x - a_i),   grad f_i(x) = Q_i (x - a_i),
 *
 * with global sector bounds mu <= eig(Q_i) <= beta shared by all nodes.
 * Quadratics give a closed-form proximal map and an exact central optimum,
 * while exercising the full (mu, beta) gradient sector.
 */
struct ObjectiveFamily {
    std::vector<Matrix> Q;  ///< d x d symmetric, eigenvalues in [mu, beta]
    std::vector<Vector> a;  ///< per-node minimizers
    double mu = 1.0;
    double beta = 1.0;

    Index n() const { return static_cast<Index>(Q.size()); }
    Index d() const { return Q.empty() ? 0 : Q.front().rows(); }
    double kappa() const { return beta / mu; }

    /// Eigendecomposition-based validity check for the sector invariant.
    void validate() const {
        if (Q.size() < 2) throw std::invalid_argument("ObjectiveFamily: need n >= 2");
        if (Q.size() != a.size())
            throw std::invalid_argument("ObjectiveFamily: Q/a size mismatch");
        if (!(mu > 0.0) || !(beta >= mu))
            throw std::invalid_argument("ObjectiveFamily: need 0 < mu <= beta");
        for (size_t i = 0; i < Q.size(); ++i) {
            const Matrix& Qi = Q[i];
            if (Qi.rows() != d() || Qi.cols() != d())
                throw std::invalid_argument("ObjectiveFamily: Q[" + std::to_string(i) +
                                            "] has inconsistent shape");
            if ((Qi - Qi.transpose()).norm() > 1e-12 * (1.0 + Qi.norm()))
                throw std::invalid_argument("ObjectiveFamily: Q[" + std::to_string(i) +
                                            "] not symmetric");
            Eigen::SelfAdjointEigenSolver<Matrix> es(Qi);
            const double lo = es.eigenvalues().minCoeff();
            const double hi = es.eigenvalues().maxCoeff();
            const double slack = 1e-9 * beta;
            if (lo < mu - slack || hi > beta + slack)
                throw std::invalid_argument("ObjectiveFamily: Q[" + std::to_string(i) +
                                            "] eigenvalues outside [mu, beta]");
        }
    }
};

/// Stacked local gradients: row i of the result is grad f_i(x_i).
inline Matrix grad(const ObjectiveFamily& fam, const Matrix& x) {
    if (x.rows() != fam.n() || x.cols() != fam.d()) {
        throw std::invalid_argument("grad: x must be n x d = " + std::to_string(fam.n()) +
                                    " x " + std::to_string(fam.d()));
    }
    Matrix g(x.rows(), x.cols());
    for (Index i = 0; i < fam.n(); ++i) {
        g.row(i) =
            (fam.Q[static_cast<size_t>(i)] * (x.row(i).transpose() - fam.a[static_cast<size_t>(i)]))
                .transpose();
    }
    return g;
}

/// Value of the global objective f0(x0) = (1/n) sum_i f_i(x0).
inline double objective_value(const ObjectiveFamily& fam, const Vector& x0) {
    double total = 0.0;
    for (Index i = 0; i < fam.n(); ++i) {
        const Vector dlt = x0 - fam.a[static_cast<size_t>(i)];
        total += 0.5 * dlt.dot(fam.Q[static_cast<size_t>(i)] * dlt);
    }
    return total / static_cast<double>(fam.n());
}

/// Solves rho (v - x) = grad f_i(x) for x; for quadratics this is the linear
/// solve x = (Q_i + rho I)^{-1} (Q_i a_i + rho v).
inline Vector prox(const ObjectiveFamily& fam, Index i, const Vector& v, double rho) {
    if (!(rho > 0.0)) throw std::invalid_argument("prox: rho must be positive");
    if (i < 0 || i >= fam.n()) throw std::invalid_argument("prox: node index out of range");
    if (v.size() != fam.d()) throw std::invalid_argument("prox: v must have d entries");
    const Matrix& Qi = fam.Q[static_cast<size_t>(i)];
    const Matrix lhs = Qi + rho * Matrix::Identity(fam.d(), fam.d());
    return lhs.ldlt().solve(Qi * fam.a[static_cast<size_t>(i)] + rho * v);
}

/// Minimizer of f0: x* = (sum Q_i)^{-1} sum Q_i a_i.
inline Vector central_optimum(const ObjectiveFamily& fam) {
    Matrix qsum = Matrix::Zero(fam.d(), fam.d());
    Vector rhs = Vector::Zero(fam.d());
    for (Index i = 0; i < fam.n(); ++i) {
        qsum += fam.Q[static_cast<size_t>(i)];
        rhs += fam.Q[static_cast<size_t>(i)] * fam.a[static_cast<size_t>(i)];
    }
    return qsum.ldlt().solve(rhs);
}

/**
 * Deterministic random family with mu = 1, beta = kappa. Eigenvalues of each
 * Q_i are drawn in [mu, beta] and both sector endpoints are attained within
 * the family; the a_i are pairwise distinct so the objectives are genuinely
 * heterogeneous.
 */
inline ObjectiveFamily random_family(Index n, Index d, double kappa, unsigned seed) {
    if (n < 2) throw std::invalid_argument("random_family: need n >= 2");
    if (d < 1) throw std::invalid_argument("random_family: need d >= 1");
    if (!(kappa >= 1.0)) throw std::invalid_argument("random_family: need kappa >= 1");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    ObjectiveFamily fam;
    fam.mu = 1.0;
    fam.beta = kappa;
    for (Index i = 0; i < n; ++i) {
        Vector eigs(d);
        for (Index j = 0; j < d; ++j) eigs(j) = fam.mu + (fam.beta - fam.mu) * unif(rng);
        // Pin the endpoints: node 0 attains mu, node 1 attains beta.
        if (i == 0) eigs(0) = fam.mu;
        if (i == 1) eigs(d - 1) = fam.beta;
        Matrix Qi;
        if (d == 1) {
            Qi = eigs.asDiagonal();
        } else {
            Matrix g(d, d);
            for (Index r = 0; r < d; ++r)
                for (Index c = 0; c < d; ++c) g(r, c) = gauss(rng);
            const Matrix orth = Eigen::HouseholderQR<Matrix>(g).householderQ();
            Qi = orth * eigs.asDiagonal() * orth.transpose();
            Qi = 0.5 * (Qi + Qi.transpose());
        }
        fam.Q.push_back(Qi);
        Vector ai(d);
        for (Index j = 0; j < d; ++j) ai(j) = 2.0 * gauss(rng);
        // Deterministic offset keeps the minimizers pairwise distinct.
        ai(0) += static_cast<double>(i);
        fam.a.push_back(ai);
    }
    fam.validate();
    return fam;
}

}  // namespace decopt

#endif  // DECOPT_OBJECTIVES_HPP
