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
#ifndef DECOPT_CONSENSUS_HPP
#define DECOPT_CONSENSUS_HPP

#include <algorithm>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "decopt/state_space.hpp"

namespace decopt {

/// J = 11^T/n, the row-averaging projector.
inline Matrix averaging_projector(Index n) {
    return Matrix::Constant(n, n, 1.0 / static_cast<double>(n));
}

/// J_perp = I - J, the disagreement projector.
inline Matrix disagreement_projector(Index n) {
    return Matrix::Identity(n, n) - averaging_projector(n);
}

namespace detail {

inline bool support_connected(const Matrix& W) {
    const Index n = W.rows();
    std::vector<char> seen(static_cast<size_t>(n), 0);
    std::vector<Index> stack = {0};
    seen[0] = 1;
    while (!stack.empty()) {
        const Index i = stack.back();
        stack.pop_back();
        for (Index j = 0; j < n; ++j) {
            if (j != i && !seen[static_cast<size_t>(j)] && W(i, j) > 0.0) {
                seen[static_cast<size_t>(j)] = 1;
                stack.push_back(j);
            }
        }
    }
    for (char s : seen)
        if (!s) return false;
    return true;
}

}  // namespace detail

/// Second-largest singular value sigma_max(J - W); the spectral gap of the
/// gossip step and the only information kept about W in the robust analysis.
inline double sigma2(const Matrix& W) {
    const Index n = W.rows();
    Eigen::SelfAdjointEigenSolver<Matrix> es(averaging_projector(n) - W);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

/**
 * Symmetric irreducible doubly stochastic gossip matrix with its cached
 * spectral gap. Validation also requires sigma2 < 1 so that consensus
 * tracking converges (periodic gossip, eigenvalue -1, is rejected).
 */
struct GossipMatrix {
    Matrix W;
    double sigma2_value = 0.0;

    explicit GossipMatrix(Matrix W_) : W(std::move(W_)) {
        const Index n = W.rows();
        if (n < 2 || W.cols() != n)
            throw std::invalid_argument("GossipMatrix: W must be square with n >= 2");
        if (!W.allFinite()) throw std::invalid_argument("GossipMatrix: non-finite entries");
        if ((W - W.transpose()).norm() > 1e-12 * (1.0 + W.norm()))
            throw std::invalid_argument("GossipMatrix: W must be symmetric");
        if (W.minCoeff() < -1e-12)
            throw std::invalid_argument("GossipMatrix: W must be entrywise nonnegative");
        const Vector ones = Vector::Ones(n);
        if ((W * ones - ones).norm() > 1e-10)
            throw std::invalid_argument("GossipMatrix: rows must sum to 1");
        if (!detail::support_connected(W))
            throw std::invalid_argument("GossipMatrix: support graph is disconnected");
        sigma2_value = decopt::sigma2(W);
        if (!(sigma2_value < 1.0 - 1e-12))
            throw std::invalid_argument("GossipMatrix: sigma2 must be < 1");
    }

    Index n() const { return W.rows(); }
};

/// Metropolis weights on an undirected graph: W_ij = 1/(1 + max(deg_i, deg_j))
/// for edges, diagonal absorbs the rest. Connected input gives a valid
/// gossip matrix with sigma2 < 1.
inline GossipMatrix metropolis_gossip(const Matrix& adjacency) {
    const Index n = adjacency.rows();
    if (n < 2 || adjacency.cols() != n)
        throw std::invalid_argument("metropolis_gossip: adjacency must be square, n >= 2");
    for (Index i = 0; i < n; ++i) {
        if (adjacency(i, i) != 0.0)
            throw std::invalid_argument("metropolis_gossip: nonzero diagonal");
        for (Index j = 0; j < n; ++j) {
            if (adjacency(i, j) != adjacency(j, i))
                throw std::invalid_argument("metropolis_gossip: adjacency not symmetric");
            if (adjacency(i, j) != 0.0 && adjacency(i, j) != 1.0)
                throw std::invalid_argument("metropolis_gossip: entries must be 0/1");
        }
    }
    Vector deg = adjacency.rowwise().sum();
    Matrix W = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) {
            if (j != i && adjacency(i, j) != 0.0)
                W(i, j) = 1.0 / (1.0 + std::max(deg(i), deg(j)));
        }
        W(i, i) = 1.0 - W.row(i).sum();
    }
    return GossipMatrix(W);  // validation rejects disconnected graphs
}

// ---------------------------------------------------------------------------
// Built-in graphs and edge-list parsing (the CLI's graph sources).
// ---------------------------------------------------------------------------

inline Matrix ring_adjacency(Index n) {
    if (n < 3) throw std::invalid_argument("ring_adjacency: need n >= 3");
    Matrix a = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
        a(i, (i + 1) % n) = 1.0;
        a((i + 1) % n, i) = 1.0;
    }
    return a;
}

inline Matrix path_adjacency(Index n) {
    if (n < 2) throw std::invalid_argument("path_adjacency: need n >= 2");
    Matrix a = Matrix::Zero(n, n);
    for (Index i = 0; i + 1 < n; ++i) {
        a(i, i + 1) = 1.0;
        a(i + 1, i) = 1.0;
    }
    return a;
}

inline Matrix complete_adjacency(Index n) {
    if (n < 2) throw std::invalid_argument("complete_adjacency: need n >= 2");
    Matrix a = Matrix::Constant(n, n, 1.0);
    a.diagonal().setZero();
    return a;
}

/// Parses "i j" pairs (0-indexed, whitespace separated, one edge per line;
/// blank lines and lines starting with '#' are skipped). Node count is
/// max index + 1.
inline Matrix adjacency_from_edge_list(std::istream& in) {
    std::vector<std::pair<Index, Index>> edges;
    Index n = 0;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first) || first[0] == '#') continue;
        long long i = 0, j = 0;
        try {
            i = std::stoll(first);
        } catch (const std::exception&) {
            throw std::invalid_argument("edge list: bad token '" + first + "'");
        }
        if (!(ls >> j)) throw std::invalid_argument("edge list: missing second index in '" + line + "'");
        if (i < 0 || j < 0) throw std::invalid_argument("edge list: negative node index");
        if (i == j) throw std::invalid_argument("edge list: self-loop not allowed");
        edges.emplace_back(static_cast<Index>(i), static_cast<Index>(j));
        n = std::max(n, static_cast<Index>(std::max(i, j) + 1));
    }
    if (edges.empty()) throw std::invalid_argument("edge list: no edges");
    Matrix a = Matrix::Zero(n, n);
    for (auto [i, j] : edges) {
        a(i, j) = 1.0;
        a(j, i) = 1.0;
    }
    return a;
}

// ---------------------------------------------------------------------------
// Consensus-tracking systems. Both map an input sequence v to an output w
// that converges to J v* whenever v converges to v*; both conserve column
// sums (1^T w = 1^T v), so their internal state always satisfies
// 1^T zeta = 0 under the prescribed zero initial state.
// ---------------------------------------------------------------------------

/// Variant 1:  w[k+1] = W w[k] + (v[k+1] - v[k]),  w[0] = v[0].
/// Realized as  zeta[k+1] = W zeta[k] + (W - I) v[k],  w[k] = zeta[k] + v[k]
/// with zeta[0] = 0.
inline StateSpace gcon_v1(const GossipMatrix& g) {
    const Index n = g.n();
    const Matrix id = Matrix::Identity(n, n);
    return StateSpace(g.W, g.W - id, id, id);
}

/// Variant 2:  w[k+1] = W (w[k] + v[k+1] - v[k]),  w[0] = W v[0].
/// Realized as  zeta[k+1] = W zeta[k] + (W^2 - W) v[k],  w[k] = zeta[k] + W v[k]
/// with zeta[0] = 0; the feedthrough W makes the input-output map match the
/// recursion exactly from k = 0.
inline StateSpace gcon_v2(const GossipMatrix& g) {
    const Index n = g.n();
    return StateSpace(g.W, g.W * g.W - g.W, Matrix::Identity(n, n), g.W);
}

/// Output trajectory of a consensus tracker driven by v from its prescribed
/// zero initial state.
inline Trajectory track(const StateSpace& gcon, const Trajectory& v) {
    if (v.empty()) throw std::invalid_argument("track: empty input trajectory");
    const Index cols = v.front().cols();
    for (const Matrix& vk : v) {
        if (vk.rows() != gcon.input_dim() || vk.cols() != cols)
            throw std::invalid_argument("track: inconsistent input shapes");
        if (!vk.allFinite()) throw std::invalid_argument("track: non-finite input");
    }
    return simulate(gcon, Matrix::Zero(gcon.state_dim(), cols), v).outputs;
}

}  // namespace decopt

#endif  // DECOPT_CONSENSUS_HPP
