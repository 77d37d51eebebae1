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
#ifndef DECOPT_TESTS_HELPERS_HPP
#define DECOPT_TESTS_HELPERS_HPP

#include <random>

#include "decopt/consensus.hpp"
#include "decopt/state_space.hpp"

namespace decopt::testing {

/// The heterogeneous two-node gossip matrix used across the demos (sigma2 = 0.2).
inline GossipMatrix two_node_gossip() {
    Matrix W(2, 2);
    W << 0.6, 0.4, 0.4, 0.6;
    return GossipMatrix(W);
}

inline Matrix random_matrix(Index rows, Index cols, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> gauss(0.0, scale);
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) m(i, j) = gauss(rng);
    return m;
}

inline Trajectory random_trajectory(Index len, Index rows, Index cols, std::mt19937_64& rng) {
    Trajectory t;
    t.reserve(static_cast<size_t>(len));
    for (Index k = 0; k < len; ++k) t.push_back(random_matrix(rows, cols, rng));
    return t;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace decopt::testing

#endif  // DECOPT_TESTS_HELPERS_HPP
