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
#ifndef DECOPT_BASE_ALGORITHMS_HPP
#define DECOPT_BASE_ALGORITHMS_HPP

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "decopt/state_space.hpp"

namespace decopt {

/// How one block of the feedback signal u is produced from one block of v.
enum class PhiKind {
    gradient,  ///< u_i = grad f_i(v_i)
    identity   ///< u_i = v_i (a linear channel routed through the feedback)
};

/// How an algebraic loop through the nonlinearity is resolved at runtime.
enum class LoopClosure {
    explicit_eval,  ///< v block does not depend on its own u block
    prox            ///< v = c - u/rho with u = grad f(v): proximal solve
};

/// One channel of the nonlinear feedback: u block `u_channel` is computed
/// by applying `kind` to v block `v_channel`.
struct PhiChannel {
    Index u_channel = 0;
    PhiKind kind = PhiKind::gradient;
    Index v_channel = 0;
    LoopClosure closure = LoopClosure::explicit_eval;
};

namespace detail {

inline void check_phi_channels(const std::vector<PhiChannel>& phi, Index u_blocks,
                               Index v_blocks) {
    std::vector<char> covered(static_cast<size_t>(u_blocks), 0);
    for (const auto& ch : phi) {
        if (ch.u_channel < 0 || ch.u_channel >= u_blocks)
            throw std::invalid_argument("phi: u channel out of range");
        if (ch.v_channel < 0 || ch.v_channel >= v_blocks)
            throw std::invalid_argument("phi: v channel out of range");
        if (covered[static_cast<size_t>(ch.u_channel)])
            throw std::invalid_argument("phi: u channel mapped twice");
        covered[static_cast<size_t>(ch.u_channel)] = 1;
    }
    for (char c : covered)
        if (!c) throw std::invalid_argument("phi: u channel left unmapped");
}

}  // namespace detail

/**
 * Centralized algorithm
 *
 *   xi0[k+1] = A0 xi0[k] + B0 ave(u[k])
 *   v0[k]    = C0 xi0[k] + D0 ave(u[k])
 *   u_i[k]   = phi_i(v0[k])
 *
 * sys0 holds the per-coordinate matrices; its channels count signal blocks
 * (each block is one R^d signal, stacked over nodes downstream).
 */
struct CentralizedAlgorithm {
    StateSpace sys0;
    std::vector<PhiChannel> phi;
    std::string name;
    double step_param = 0.0;  ///< eta for gradient descent

    CentralizedAlgorithm(StateSpace sys, std::vector<PhiChannel> phi_, std::string name_,
                         double param)
        : sys0(std::move(sys)), phi(std::move(phi_)), name(std::move(name_)),
          step_param(param) {
        detail::check_phi_channels(phi, sys0.input_dim(), sys0.output_dim());
    }
};

/**
 * Distributed algorithm: per node i,
 *
 *   xi_i[k+1] = A xi_i[k] + B_loc u_i[k] + B_ave ave(u[k])
 *   v_i[k]    = C xi_i[k] + D_loc u_i[k] + D_ave ave(u[k])
 *   u_i[k]    = phi_i(v_i[k])
 *
 * The local and averaged input channels partition the same u blocks.
 */
struct DistributedAlgorithm {
    Matrix A, B_loc, B_ave, C, D_loc, D_ave;
    std::vector<PhiChannel> phi;
    std::string name;
    double step_param = 0.0;  ///< rho for ADMM

    Index state_blocks() const { return A.rows(); }
    Index u_blocks() const { return B_loc.cols(); }
    Index v_blocks() const { return C.rows(); }

    void validate() const {
        if (A.rows() != A.cols()) throw std::invalid_argument("DistributedAlgorithm: A not square");
        if (B_loc.rows() != A.rows() || B_ave.rows() != A.rows() ||
            B_ave.cols() != B_loc.cols())
            throw std::invalid_argument("DistributedAlgorithm: B blocks inconsistent");
        if (C.cols() != A.cols() || D_loc.rows() != C.rows() || D_ave.rows() != C.rows() ||
            D_loc.cols() != B_loc.cols() || D_ave.cols() != B_loc.cols())
            throw std::invalid_argument("DistributedAlgorithm: C/D blocks inconsistent");
        detail::check_phi_channels(phi, u_blocks(), v_blocks());
    }
};

/// Gradient descent as a centralized algorithm:
///   xi0[k+1] = xi0[k] - eta * ave(u[k]),  v0 = xi0,  u_i = grad f_i(v0).
inline CentralizedAlgorithm build_gradient_descent(double eta) {
    if (!(eta > 0.0)) throw std::invalid_argument("build_gradient_descent: eta must be > 0");
    StateSpace sys(Matrix::Identity(1, 1), Matrix::Constant(1, 1, -eta),
                   Matrix::Identity(1, 1), Matrix::Zero(1, 1));
    return CentralizedAlgorithm(std::move(sys),
                                {PhiChannel{0, PhiKind::gradient, 0, LoopClosure::explicit_eval}},
                                "gd", eta);
}

/**
 * Consensus ADMM as a distributed algorithm. Per node, with w = grad f:
 *
 *   x_i[k+1] = ave(x[k]) - (y_i[k] + w_i[k]) / rho
 *   y_i[k+1] = ave(w[k]) - w_i[k]
 *
 * written with state xi_i = (x_i, y_i), outputs v_i = (x_i, x_i[k+1]) and
 * feedback u_i = (v_i^1, grad f_i(v_i^2)). The second v block depends on its
 * own u block through -1/rho, an algebraic loop closed by the proximal map.
 */
inline DistributedAlgorithm build_admm(double rho) {
    if (!(rho > 0.0)) throw std::invalid_argument("build_admm: rho must be > 0");
    DistributedAlgorithm alg;
    const double r = 1.0 / rho;
    alg.A = Matrix{{0.0, -r}, {0.0, 0.0}};
    alg.B_loc = Matrix{{0.0, -r}, {0.0, -1.0}};
    alg.B_ave = Matrix::Identity(2, 2);
    alg.C = Matrix{{1.0, 0.0}, {0.0, -r}};
    alg.D_loc = Matrix{{0.0, 0.0}, {0.0, -r}};
    alg.D_ave = Matrix{{0.0, 0.0}, {1.0, 0.0}};
    alg.phi = {PhiChannel{0, PhiKind::identity, 0, LoopClosure::explicit_eval},
               PhiChannel{1, PhiKind::gradient, 1, LoopClosure::prox}};
    alg.name = "admm";
    alg.step_param = rho;
    alg.validate();
    return alg;
}

/// rho = rho0 * sqrt(mu * beta): the penalty normalization that makes the
/// ADMM rate depend on the condition number only.
inline double normalize_rho(double rho0, double mu, double beta) {
    if (!(rho0 > 0.0)) throw std::invalid_argument("normalize_rho: rho0 must be > 0");
    if (!(mu > 0.0) || !(beta >= mu))
        throw std::invalid_argument("normalize_rho: need 0 < mu <= beta");
    return rho0 * std::sqrt(mu * beta);
}

/// Classical optimal fixed step for (mu, beta)-sector gradients.
inline double default_gd_step(double mu, double beta) { return 2.0 / (mu + beta); }

}  // namespace decopt

#endif  // DECOPT_BASE_ALGORITHMS_HPP
