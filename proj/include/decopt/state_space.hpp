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
#ifndef DECOPT_STATE_SPACE_HPP
#define DECOPT_STATE_SPACE_HPP

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace decopt {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Node-stacked signal values, one matrix per iteration. Rows index nodes
/// (or stacked signal blocks), columns index coordinates of the local
/// variable, so a scalar-per-node signal has a single column.
using Trajectory = std::vector<Matrix>;

/// Thrown when a feedthrough loop of an interconnection is (numerically)
/// singular, i.e. the algebraic loop has no unique solution.
struct WellPosednessError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Thrown for structurally invalid wiring (dangling or doubly wired inputs,
/// width mismatches, unknown ports).
struct WiringError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/**
 * Discrete-time linear system
 *
 *   x[k+1] = A x[k] + B u[k]
 *   y[k]   = C x[k] + D u[k]
 *
 * The carrier for every linear object in this library: base optimization
 * algorithms, consensus trackers, IQC filters and their interconnections.
 * Signals may be matrix-valued (columns are treated as independent
 * coordinates), which is what makes the d=1 analysis transfer to general d.
 */
struct StateSpace {
    Matrix A, B, C, D;

    /// Empty system (0 states, 0 channels); a placeholder for containers.
    StateSpace()
        : A(Matrix::Zero(0, 0)), B(Matrix::Zero(0, 0)), C(Matrix::Zero(0, 0)),
          D(Matrix::Zero(0, 0)) {}

    StateSpace(Matrix A_, Matrix B_, Matrix C_, Matrix D_)
        : A(std::move(A_)), B(std::move(B_)), C(std::move(C_)), D(std::move(D_)) {
        if (A.rows() != A.cols()) {
            throw std::invalid_argument("StateSpace: A must be square, got " +
                                        shape_str(A));
        }
        if (B.rows() != A.rows()) {
            throw std::invalid_argument("StateSpace: B has " + std::to_string(B.rows()) +
                                        " rows, expected " + std::to_string(A.rows()) +
                                        " (rows of A)");
        }
        if (C.cols() != A.cols()) {
            throw std::invalid_argument("StateSpace: C has " + std::to_string(C.cols()) +
                                        " cols, expected " + std::to_string(A.cols()) +
                                        " (cols of A)");
        }
        if (D.rows() != C.rows() || D.cols() != B.cols()) {
            throw std::invalid_argument("StateSpace: D is " + shape_str(D) +
                                        ", expected " + std::to_string(C.rows()) + "x" +
                                        std::to_string(B.cols()));
        }
        if (!A.allFinite() || !B.allFinite() || !C.allFinite() || !D.allFinite()) {
            throw std::invalid_argument("StateSpace: matrices must be finite");
        }
    }

    Index state_dim() const { return A.rows(); }
    Index input_dim() const { return B.cols(); }
    Index output_dim() const { return C.rows(); }

  private:
    static std::string shape_str(const Matrix& m) {
        return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
    }
};

/// Memoryless system y = D u.
inline StateSpace static_gain(const Matrix& D) {
    return StateSpace(Matrix::Zero(0, 0), Matrix::Zero(0, D.cols()),
                      Matrix::Zero(D.rows(), 0), D);
}

inline StateSpace make_state_space(Matrix A, Matrix B, Matrix C, Matrix D) {
    return StateSpace(std::move(A), std::move(B), std::move(C), std::move(D));
}

/// One step of the recursion: returns (next_state, output). State and input
/// may carry d columns; all columns advance independently.
inline std::pair<Matrix, Matrix> step(const StateSpace& ss, const Matrix& state,
                                      const Matrix& input) {
    if (state.rows() != ss.state_dim()) {
        throw std::invalid_argument("step: state has " + std::to_string(state.rows()) +
                                    " rows, expected " + std::to_string(ss.state_dim()));
    }
    if (input.rows() != ss.input_dim()) {
        throw std::invalid_argument("step: input has " + std::to_string(input.rows()) +
                                    " rows, expected " + std::to_string(ss.input_dim()));
    }
    if (state.cols() != input.cols()) {
        throw std::invalid_argument("step: state and input must have the same column count");
    }
    return {ss.A * state + ss.B * input, ss.C * state + ss.D * input};
}

struct SimulationResult {
    Trajectory states;   ///< length K+1, includes the initial state
    Trajectory outputs;  ///< length K
};

/// Drives the system with the given input trajectory from state x0.
inline SimulationResult simulate(const StateSpace& ss, const Matrix& x0,
                                 const Trajectory& inputs) {
    SimulationResult result;
    result.states.reserve(inputs.size() + 1);
    result.outputs.reserve(inputs.size());
    result.states.push_back(x0);
    Matrix x = x0;
    for (const Matrix& u : inputs) {
        auto [next, y] = step(ss, x, u);
        result.outputs.push_back(std::move(y));
        x = std::move(next);
        result.states.push_back(x);
    }
    return result;
}

/// Kronecker product (dense, both factors small in this library).
inline Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index i = 0; i < a.rows(); ++i) {
        for (Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

/// Replaces every matrix M of the system by M (x) I_d, turning each scalar
/// channel into d consecutive channels. With d=1 the system is unchanged.
inline StateSpace lift_dimension(const StateSpace& ss, Index d) {
    if (d < 1) {
        throw std::invalid_argument("lift_dimension: d must be >= 1, got " +
                                    std::to_string(d));
    }
    if (d == 1) return ss;
    const Matrix id = Matrix::Identity(d, d);
    return StateSpace(kron(ss.A, id), kron(ss.B, id), kron(ss.C, id), kron(ss.D, id));
}

/// True iff (state, input) is a fixed point of the state recursion:
/// ||A*state + B*input - state||_F <= tol.
inline bool is_steady_state(const StateSpace& ss, const Matrix& state,
                            const Matrix& input, double tol) {
    if (state.rows() != ss.state_dim() || input.rows() != ss.input_dim() ||
        state.cols() != input.cols()) {
        throw std::invalid_argument("is_steady_state: dimension mismatch");
    }
    return (ss.A * state + ss.B * input - state).norm() <= tol;
}

}  // namespace decopt

#endif  // DECOPT_STATE_SPACE_HPP
