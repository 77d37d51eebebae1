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
#ifndef DECOPT_DECENTRALIZER_HPP
#define DECOPT_DECENTRALIZER_HPP

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "decopt/base_algorithms.hpp"
#include "decopt/consensus.hpp"
#include "decopt/interconnect.hpp"
#include "decopt/objectives.hpp"
#include "decopt/state_space.hpp"

namespace decopt {

/// Which consensus tracker replaces the ave operator. `exact` substitutes the
/// static averaging projector J itself; it is the reference point every
/// tracker-based composition must reproduce in the limit.
enum class TrackerKind { v1, v2, exact };

inline std::string tracker_name(TrackerKind t) {
    switch (t) {
        case TrackerKind::v1: return "v1";
        case TrackerKind::v2: return "v2";
        default: return "exact";
    }
}

/// One nonlinearity channel of a composed system: u block `u_block` is
/// produced by applying `kind` rowwise to block `v_block` of output span
/// `v_span`. Blocks are n rows each.
struct PhiBinding {
    std::string v_span;
    Index v_block = 0;
    Index u_block = 0;
    PhiKind kind = PhiKind::gradient;
    LoopClosure closure = LoopClosure::explicit_eval;
};

/**
 * A decentralized algorithm: node-stacked linear dynamics (base replicas
 * plus consensus-tracker states, tracker initial states zero) closed by the
 * per-node nonlinearities described in `phi`.
 *
 * State ordering is (base states, v-tracker states, u-tracker states); the
 * output spans always include "v" and, where they exist, "vhat" and "uhat".
 */
struct DecentralizedAlgorithm {
    LabeledSystem linear;
    std::vector<PhiBinding> phi;
    std::string base;  ///< "gd" | "admm" | "broken-gd"
    TrackerKind tracker = TrackerKind::v1;
    Matrix W;
    Index n = 0;
    double step_param = 0.0;  ///< eta (gd) or rho (admm)
    std::string primary_span = "v";  ///< span carrying the per-node estimates
    Index primary_block = 0;
    Index base_state_width = 0;  ///< rows of the replicated base-state block
};

namespace detail {

struct TrackerMatrices {
    Matrix A;      ///< tracker state transition (blocks x W)
    Matrix drive;  ///< input drive
    Matrix feed;   ///< output feedthrough: w = zeta + feed * input
};

inline TrackerMatrices tracker_matrices(TrackerKind kind, const Matrix& W, Index blocks) {
    const Index n = W.rows();
    const Matrix id = Matrix::Identity(n, n);
    Matrix a, drive, feed;
    switch (kind) {
        case TrackerKind::v1:
            a = W;
            drive = W - id;
            feed = id;
            break;
        case TrackerKind::v2:
            a = W;
            drive = W * W - W;
            feed = W;
            break;
        default:
            throw std::invalid_argument("tracker_matrices: exact tracker has no state");
    }
    const Matrix ib = Matrix::Identity(blocks, blocks);
    return TrackerMatrices{kron(ib, a), kron(ib, drive), kron(ib, feed)};
}

inline Matrix block_projector(const Matrix& J, Index blocks) {
    return kron(Matrix::Identity(blocks, blocks), J);
}

}  // namespace detail

/**
 * Theorem-style conversion of a centralized algorithm: n replicas of sys0,
 * with u routed through one consensus tracker (uhat) and the replicas'
 * outputs v routed through a second, independent tracker (vhat) that the
 * nonlinearities read. With gradient descent and the v1 tracker this
 * reproduces the gradient-tracking (DIGing) dynamics.
 */
inline DecentralizedAlgorithm decentralize_centralized(const CentralizedAlgorithm& alg,
                                                       TrackerKind tracker,
                                                       const GossipMatrix& g) {
    const Index n = g.n();
    const Index s = alg.sys0.state_dim();
    const Index q = alg.sys0.input_dim();
    const Index p = alg.sys0.output_dim();
    const Matrix In = Matrix::Identity(n, n);
    const Matrix A0n = kron(alg.sys0.A, In);
    const Matrix B0n = kron(alg.sys0.B, In);
    const Matrix C0n = kron(alg.sys0.C, In);
    const Matrix D0n = kron(alg.sys0.D, In);

    DecentralizedAlgorithm out;
    out.base = alg.name;
    out.tracker = tracker;
    out.W = g.W;
    out.n = n;
    out.step_param = alg.step_param;
    out.base_state_width = s * n;

    if (tracker == TrackerKind::exact) {
        const Matrix Jq = detail::block_projector(averaging_projector(n), q);
        const Matrix Jp = detail::block_projector(averaging_projector(n), p);
        Matrix A = A0n;
        Matrix B = B0n * Jq;
        Matrix C(2 * p * n + q * n, s * n), D(2 * p * n + q * n, q * n);
        C << C0n, Jp * C0n, Matrix::Zero(q * n, s * n);
        D << D0n * Jq, Jp * D0n * Jq, Jq;
        out.linear = LabeledSystem{StateSpace(A, B, C, D), {}, {}, {}};
        out.linear.states.add("xi", s * n);
        out.linear.inputs.add("u", q * n);
        out.linear.outputs.add("v", p * n);
        out.linear.outputs.add("vhat", p * n);
        out.linear.outputs.add("uhat", q * n);
    } else {
        const auto tu = detail::tracker_matrices(tracker, g.W, q);
        const auto tv = detail::tracker_matrices(tracker, g.W, p);
        const Index nx = s * n + p * n + q * n;
        Matrix A = Matrix::Zero(nx, nx), B = Matrix::Zero(nx, q * n);
        const Index ox = 0, ov = s * n, ou = s * n + p * n;
        // xi' = A0n xi + B0n (zeta_u + Tu u)
        A.block(ox, ox, s * n, s * n) = A0n;
        A.block(ox, ou, s * n, q * n) = B0n;
        B.middleRows(ox, s * n) = B0n * tu.feed;
        // zeta_v' = Av zeta_v + drive_v * v,  v = C0n xi + D0n (zeta_u + Tu u)
        A.block(ov, ox, p * n, s * n) = tv.drive * C0n;
        A.block(ov, ov, p * n, p * n) = tv.A;
        A.block(ov, ou, p * n, q * n) = tv.drive * D0n;
        B.middleRows(ov, p * n) = tv.drive * D0n * tu.feed;
        // zeta_u' = Au zeta_u + drive_u * u
        A.block(ou, ou, q * n, q * n) = tu.A;
        B.middleRows(ou, q * n) = tu.drive;

        Matrix C = Matrix::Zero(2 * p * n + q * n, nx), D = Matrix::Zero(2 * p * n + q * n, q * n);
        // v
        C.block(0, ox, p * n, s * n) = C0n;
        C.block(0, ou, p * n, q * n) = D0n;
        D.middleRows(0, p * n) = D0n * tu.feed;
        // vhat = zeta_v + Tv v
        C.block(p * n, ox, p * n, s * n) = tv.feed * C0n;
        C.block(p * n, ov, p * n, p * n) = Matrix::Identity(p * n, p * n);
        C.block(p * n, ou, p * n, q * n) = tv.feed * D0n;
        D.middleRows(p * n, p * n) = tv.feed * D0n * tu.feed;
        // uhat = zeta_u + Tu u
        C.block(2 * p * n, ou, q * n, q * n) = Matrix::Identity(q * n, q * n);
        D.middleRows(2 * p * n, q * n) = tu.feed;

        out.linear = LabeledSystem{StateSpace(A, B, C, D), {}, {}, {}};
        out.linear.states.add("xi", s * n);
        out.linear.states.add("zeta_v", p * n);
        out.linear.states.add("zeta_u", q * n);
        out.linear.inputs.add("u", q * n);
        out.linear.outputs.add("v", p * n);
        out.linear.outputs.add("vhat", p * n);
        out.linear.outputs.add("uhat", q * n);
    }

    for (const auto& ch : alg.phi) {
        out.phi.push_back(PhiBinding{"vhat", ch.v_channel, ch.u_channel, ch.kind, ch.closure});
    }
    // The per-node estimate is the tracked signal the nonlinearity reads:
    // the raw replicas only agree in average (their mean is pinned to the
    // optimum), while vhat reaches consensus at it.
    out.primary_span = "vhat";
    out.primary_block = alg.phi.empty() ? 0 : alg.phi.front().v_channel;
    return out;
}

/**
 * Remark-style conversion of a distributed algorithm: only the averaged
 * channel needs tracking, the local channels stay untouched. With ADMM and
 * the v2 tracker this yields the decentralized ADMM recursion.
 */
inline DecentralizedAlgorithm decentralize_distributed(const DistributedAlgorithm& alg,
                                                       TrackerKind tracker,
                                                       const GossipMatrix& g) {
    alg.validate();
    const Index n = g.n();
    const Index s = alg.state_blocks();
    const Index q = alg.u_blocks();
    const Index p = alg.v_blocks();
    const Matrix In = Matrix::Identity(n, n);
    const Matrix An = kron(alg.A, In);
    const Matrix Bloc = kron(alg.B_loc, In);
    const Matrix Bave = kron(alg.B_ave, In);
    const Matrix Cn = kron(alg.C, In);
    const Matrix Dloc = kron(alg.D_loc, In);
    const Matrix Dave = kron(alg.D_ave, In);

    DecentralizedAlgorithm out;
    out.base = alg.name;
    out.tracker = tracker;
    out.W = g.W;
    out.n = n;
    out.step_param = alg.step_param;
    out.base_state_width = s * n;

    if (tracker == TrackerKind::exact) {
        const Matrix Jq = detail::block_projector(averaging_projector(n), q);
        Matrix C(p * n + q * n, s * n), D(p * n + q * n, q * n);
        C << Cn, Matrix::Zero(q * n, s * n);
        D << Dloc + Dave * Jq, Jq;
        out.linear = LabeledSystem{StateSpace(An, Bloc + Bave * Jq, C, D), {}, {}, {}};
        out.linear.states.add("xi", s * n);
    } else {
        const auto tu = detail::tracker_matrices(tracker, g.W, q);
        const Index nx = s * n + q * n;
        Matrix A = Matrix::Zero(nx, nx), B = Matrix::Zero(nx, q * n);
        A.block(0, 0, s * n, s * n) = An;
        A.block(0, s * n, s * n, q * n) = Bave;
        B.middleRows(0, s * n) = Bloc + Bave * tu.feed;
        A.block(s * n, s * n, q * n, q * n) = tu.A;
        B.middleRows(s * n, q * n) = tu.drive;

        Matrix C = Matrix::Zero(p * n + q * n, nx), D = Matrix::Zero(p * n + q * n, q * n);
        C.block(0, 0, p * n, s * n) = Cn;
        C.block(0, s * n, p * n, q * n) = Dave;
        D.middleRows(0, p * n) = Dloc + Dave * tu.feed;
        C.block(p * n, s * n, q * n, q * n) = Matrix::Identity(q * n, q * n);
        D.middleRows(p * n, q * n) = tu.feed;
        out.linear = LabeledSystem{StateSpace(A, B, C, D), {}, {}, {}};
        out.linear.states.add("xi", s * n);
        out.linear.states.add("zeta_u", q * n);
    }
    out.linear.inputs.add("u", q * n);
    out.linear.outputs.add("v", p * n);
    out.linear.outputs.add("uhat", q * n);

    for (const auto& ch : alg.phi) {
        out.phi.push_back(PhiBinding{"v", ch.v_channel, ch.u_channel, ch.kind, ch.closure});
    }
    // Per-node estimate: the v block feeding the gradient channel.
    out.primary_span = "v";
    out.primary_block = 0;
    for (const auto& ch : alg.phi) {
        if (ch.kind == PhiKind::gradient) out.primary_block = ch.v_channel;
    }
    return out;
}

/**
 * The deliberately defective decentralized gradient descent: the gradient
 * channel is tracked but the nonlinearity reads each node's raw v instead of
 * a tracked vhat. Its fixed points only satisfy 1^T grad f(v*) = 0, so
 * heterogeneous objectives may settle without consensus. Kept to demonstrate
 * that failure mode.
 */
inline DecentralizedAlgorithm build_broken_gd(double eta, const GossipMatrix& g) {
    if (!(eta > 0.0)) throw std::invalid_argument("build_broken_gd: eta must be > 0");
    const Index n = g.n();
    const Matrix In = Matrix::Identity(n, n);
    const auto tu = detail::tracker_matrices(TrackerKind::v1, g.W, 1);

    Matrix A = Matrix::Zero(2 * n, 2 * n), B = Matrix::Zero(2 * n, n);
    A.block(0, 0, n, n) = In;
    A.block(0, n, n, n) = -eta * In;
    B.middleRows(0, n) = -eta * tu.feed;
    A.block(n, n, n, n) = tu.A;
    B.middleRows(n, n) = tu.drive;

    Matrix C = Matrix::Zero(2 * n, 2 * n), D = Matrix::Zero(2 * n, n);
    C.block(0, 0, n, n) = In;
    C.block(n, n, n, n) = In;
    D.middleRows(n, n) = tu.feed;

    DecentralizedAlgorithm out;
    out.linear = LabeledSystem{StateSpace(A, B, C, D), {}, {}, {}};
    out.linear.states.add("xi", n);
    out.linear.states.add("zeta_u", n);
    out.linear.inputs.add("u", n);
    out.linear.outputs.add("v", n);
    out.linear.outputs.add("uhat", n);
    out.phi = {PhiBinding{"v", 0, 0, PhiKind::gradient, LoopClosure::explicit_eval}};
    out.base = "broken-gd";
    out.tracker = TrackerKind::v1;
    out.W = g.W;
    out.n = n;
    out.step_param = eta;
    out.primary_span = "v";
    out.primary_block = 0;
    out.base_state_width = n;
    return out;
}

/// Conservative default step for tracker-based decentralized gradient
/// descent. Gradient tracking is only stable well below the centralized
/// 2/(mu+beta) step; the (1-sigma2)^2/beta ceiling with a 1/4 safety factor
/// keeps the closed loop contractive on all tested graph/kappa combinations
/// (the centralized-optimal step diverges already at sigma2 = 0.2, kappa = 10).
inline double decentralized_gd_step(double mu, double beta, double sigma2_value) {
    if (!(mu > 0.0) || !(beta >= mu))
        throw std::invalid_argument("decentralized_gd_step: need 0 < mu <= beta");
    if (!(sigma2_value >= 0.0) || !(sigma2_value < 1.0))
        throw std::invalid_argument("decentralized_gd_step: sigma2 must be in [0, 1)");
    const double gap = 1.0 - sigma2_value;
    return 0.25 * std::min(2.0 / (mu + beta), gap * gap / beta);
}

/// Max over k of || vhat[k+2] - 2 W vhat[k+1] + W^2 vhat[k] + eta (u[k+1] - u[k]) ||_F.
/// Vanishes identically along v1-tracker decentralized gradient descent runs
/// (the gradient-tracking identity); stays large for the v2 variant.
inline double diging_residual(const Trajectory& traj_vhat, const Trajectory& traj_u,
                              const Matrix& W, double eta) {
    if (traj_vhat.size() < 3 || traj_u.size() < 3)
        throw std::invalid_argument("diging_residual: need at least 3 iterations");
    double worst = 0.0;
    const Matrix W2 = W * W;
    for (size_t k = 0; k + 2 < traj_vhat.size() && k + 1 < traj_u.size(); ++k) {
        const Matrix res = traj_vhat[k + 2] - 2.0 * W * traj_vhat[k + 1] + W2 * traj_vhat[k] +
                           eta * (traj_u[k + 1] - traj_u[k]);
        worst = std::max(worst, res.norm());
    }
    return worst;
}

/// Full steady state of a composed system at the centralized fixed point:
/// base states replicated, tracker states at their (zero column-sum) steady
/// values. Returns the state matrix and the matching steady input u*.
struct AlgorithmFixedPoint {
    Matrix state;
    Matrix input;
};

inline AlgorithmFixedPoint decentralized_fixed_point(const DecentralizedAlgorithm& alg,
                                                     const ObjectiveFamily& fam) {
    if (fam.n() != alg.n)
        throw std::invalid_argument("decentralized_fixed_point: node count mismatch");
    const Index n = alg.n;
    const Index d = fam.d();
    const Vector xstar = central_optimum(fam);
    Matrix xrep(n, d);
    for (Index i = 0; i < n; ++i) xrep.row(i) = xstar.transpose();

    Matrix xi_star, u_star, v_star;
    if (alg.base == "gd" || alg.base == "broken-gd") {
        xi_star = xrep;
        v_star = xrep;
        u_star = grad(fam, xrep);
    } else if (alg.base == "admm") {
        const Matrix wstar = grad(fam, xrep);
        const Matrix ystar = -disagreement_projector(n) * wstar;
        xi_star.resize(2 * n, d);
        xi_star << xrep, ystar;
        v_star.resize(2 * n, d);
        v_star << xrep, xrep;
        u_star.resize(2 * n, d);
        u_star << xrep, wstar;
    } else {
        throw std::invalid_argument("decentralized_fixed_point: unknown base '" + alg.base +
                                    "'");
    }

    const Matrix Jperp = disagreement_projector(n);
    auto tracker_fp = [&](const Matrix& drive_signal) {
        const Index blocks = drive_signal.rows() / n;
        const Matrix Jp_blk = detail::block_projector(Jperp, blocks);
        if (alg.tracker == TrackerKind::v1) return Matrix(-Jp_blk * drive_signal);
        const Matrix Wblk = detail::block_projector(alg.W, blocks);
        return Matrix(-Jp_blk * Wblk * drive_signal);
    };

    Matrix state(alg.linear.sys.state_dim(), d);
    for (const auto& [name, span] : alg.linear.states.entries()) {
        if (name == "xi") {
            state.middleRows(span.offset, span.width) = xi_star;
        } else if (name == "zeta_v") {
            state.middleRows(span.offset, span.width) = tracker_fp(v_star);
        } else if (name == "zeta_u") {
            state.middleRows(span.offset, span.width) = tracker_fp(u_star);
        } else {
            throw std::logic_error("decentralized_fixed_point: unexpected state span " + name);
        }
    }
    return AlgorithmFixedPoint{state, u_star};
}

}  // namespace decopt

#endif  // DECOPT_DECENTRALIZER_HPP
