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
#ifndef DECOPT_SIMULATOR_HPP
#define DECOPT_SIMULATOR_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "decopt/decentralizer.hpp"
#include "decopt/objectives.hpp"

namespace decopt {

/// Raised when a run produces non-finite values or trips the norm guard;
/// carries the first bad iteration.
struct DivergenceError : std::runtime_error {
    Index iteration;
    explicit DivergenceError(Index k)
        : std::runtime_error("simulation diverged at iteration " + std::to_string(k)),
          iteration(k) {}
};

struct RunOptions {
    Index iterations = 1000;
    double stop_tol = 0.0;           ///< early stop when both metrics fall below (0 = off)
    double divergence_guard = 1e12;  ///< abort when any signal norm exceeds this
    double tail_fraction = 0.5;      ///< tail used for the empirical rate fit
};

struct RunResult {
    std::map<std::string, Trajectory> signals;  ///< states, outputs and "u", per name
    std::vector<double> gap;              ///< max_i ||v_i[k] - x*|| per iteration
    std::vector<double> consensus_error;  ///< ||Jperp v[k]||_F per iteration
    Index iterations = 0;
    bool stopped_early = false;
    std::optional<double> tau_emp;  ///< fitted tail rate; empty when the fit is
                                    ///< impossible or convergence was exact
    Vector x_star;
};

/**
 * Least-squares geometric rate of a positive, eventually decreasing error
 * sequence: slope of log(e_k) over the trailing `tail_fraction` of the
 * samples (at least 50 when available), exponentiated and clipped at 1.
 *
 * Returns an empty optional as the exact-convergence marker when the tail
 * contains non-positive entries. Throws when fewer than 10 tail points are
 * available.
 */
inline std::optional<double> empirical_rate(const std::vector<double>& errors,
                                            double tail_fraction = 0.5) {
    if (!(tail_fraction > 0.0) || tail_fraction > 1.0)
        throw std::invalid_argument("empirical_rate: tail_fraction must be in (0, 1]");
    const Index len = static_cast<Index>(errors.size());
    Index tail = std::max<Index>(static_cast<Index>(std::ceil(tail_fraction * static_cast<double>(len))),
                                 std::min<Index>(50, len));
    if (tail < 10) throw std::invalid_argument("empirical_rate: need at least 10 tail points");
    const Index start = len - tail;
    for (Index k = start; k < len; ++k) {
        if (!(errors[static_cast<size_t>(k)] > 0.0)) return std::nullopt;
    }
    // Fit log e = a + b k.
    double sk = 0, se = 0, skk = 0, ske = 0;
    for (Index k = start; k < len; ++k) {
        const double x = static_cast<double>(k);
        const double y = std::log(errors[static_cast<size_t>(k)]);
        sk += x;
        se += y;
        skk += x * x;
        ske += x * y;
    }
    const double m = static_cast<double>(tail);
    const double denom = m * skk - sk * sk;
    if (denom <= 0.0) return std::nullopt;
    const double slope = (m * ske - sk * se) / denom;
    return std::min(1.0, std::exp(slope));
}

namespace detail {

/// Truncates the trailing converged/noise-floor part of an error sequence so
/// that the geometric fit sees only the decaying portion.
inline std::vector<double> decaying_prefix(const std::vector<double>& errors) {
    if (errors.empty()) return errors;
    const double floor_tol = std::max(1e-13, 1e-14 * errors.front());
    size_t end = errors.size();
    while (end > 0 && errors[end - 1] <= floor_tol) --end;
    return std::vector<double>(errors.begin(), errors.begin() + static_cast<long>(end));
}

}  // namespace detail

/**
 * Runs a composed algorithm on an objective family. Per iteration the
 * nonlinearity channels are evaluated in declaration order (gradients
 * directly, algebraic loops through the proximal solve), then the linear
 * part steps. All named state/output spans plus the feedback u are recorded.
 *
 * `base_init` provides the replicated base states (base_state_width x d);
 * tracker states always start at zero, which is part of the tracker
 * contract.
 */
inline RunResult run(const DecentralizedAlgorithm& alg, const ObjectiveFamily& fam,
                     const Matrix& base_init, const RunOptions& opts = {}) {
    if (opts.iterations < 1) throw std::invalid_argument("run: need at least one iteration");
    if (fam.n() != alg.n) throw std::invalid_argument("run: node count mismatch");
    if (base_init.rows() != alg.base_state_width || base_init.cols() != fam.d())
        throw std::invalid_argument("run: base_init must be " +
                                    std::to_string(alg.base_state_width) + " x " +
                                    std::to_string(fam.d()));

    const StateSpace& sys = alg.linear.sys;
    const Index n = alg.n;
    const Index d = fam.d();

    // Validate the evaluation order: a channel's v rows may only see its own
    // u block (prox) or blocks of earlier channels through the feedthrough.
    {
        std::vector<char> ready(static_cast<size_t>(sys.input_dim() / n), 0);
        for (const auto& b : alg.phi) {
            const Span vs = alg.linear.outputs.at(b.v_span);
            const Matrix Drows = sys.D.middleRows(vs.offset + b.v_block * n, n);
            for (Index blk = 0; blk < sys.input_dim() / n; ++blk) {
                const double mass = Drows.middleCols(blk * n, n).norm();
                if (mass == 0.0 || ready[static_cast<size_t>(blk)]) continue;
                if (blk == b.u_block && b.closure == LoopClosure::prox) continue;
                throw std::invalid_argument(
                    "run: nonlinearity channel reads an unresolved feedback block");
            }
            ready[static_cast<size_t>(b.u_block)] = 1;
        }
    }

    RunResult result;
    result.x_star = central_optimum(fam);

    Matrix x = Matrix::Zero(sys.state_dim(), d);
    x.topRows(alg.base_state_width) = base_init;

    const Matrix Jperp = disagreement_projector(n);
    const Span primary = alg.linear.outputs.at(alg.primary_span);
    const double rho = alg.step_param;

    for (Index k = 0; k < opts.iterations; ++k) {
        Matrix u = Matrix::Zero(sys.input_dim(), d);
        for (const auto& b : alg.phi) {
            const Span vs = alg.linear.outputs.at(b.v_span);
            const Index vrow = vs.offset + b.v_block * n;
            Matrix vblk = sys.C.middleRows(vrow, n) * x + sys.D.middleRows(vrow, n) * u;
            if (b.closure == LoopClosure::prox) {
                // v = c - u/rho with u = grad f(v), solved rowwise by prox.
                const Matrix own = sys.D.block(vrow, b.u_block * n, n, n) +
                                   Matrix::Identity(n, n) / rho;
                if (own.norm() > 1e-12 * (1.0 + 1.0 / rho))
                    throw std::invalid_argument("run: prox channel coupling is not -I/rho");
                for (Index i = 0; i < n; ++i) {
                    vblk.row(i) = prox(fam, i, vblk.row(i).transpose(), rho).transpose();
                }
            }
            if (b.kind == PhiKind::gradient) {
                u.middleRows(b.u_block * n, n) = grad(fam, vblk);
            } else {
                u.middleRows(b.u_block * n, n) = vblk;
            }
        }

        const Matrix y = sys.C * x + sys.D * u;
        if (!x.allFinite() || !u.allFinite() || !y.allFinite()) throw DivergenceError(k);
        if (x.norm() > opts.divergence_guard || u.norm() > opts.divergence_guard)
            throw DivergenceError(k);

        for (const auto& [name, span] : alg.linear.states.entries())
            result.signals[name].push_back(x.middleRows(span.offset, span.width));
        for (const auto& [name, span] : alg.linear.outputs.entries())
            result.signals[name].push_back(y.middleRows(span.offset, span.width));
        result.signals["u"].push_back(u);

        const Matrix est = y.middleRows(primary.offset + alg.primary_block * n, n);
        double worst = 0.0;
        for (Index i = 0; i < n; ++i)
            worst = std::max(worst, (est.row(i).transpose() - result.x_star).norm());
        result.gap.push_back(worst);
        result.consensus_error.push_back((Jperp * est).norm());
        result.iterations = k + 1;

        if (opts.stop_tol > 0.0 && worst <= opts.stop_tol &&
            result.consensus_error.back() <= opts.stop_tol) {
            result.stopped_early = true;
            break;
        }

        x = sys.A * x + sys.B * u;
    }

    const std::vector<double> decaying = detail::decaying_prefix(result.gap);
    if (static_cast<Index>(decaying.size()) >= 10) {
        try {
            result.tau_emp = empirical_rate(decaying, opts.tail_fraction);
        } catch (const std::invalid_argument&) {
            result.tau_emp = std::nullopt;
        }
    }
    return result;
}

namespace detail {

/// Replicates a per-signal initial state (one row per signal block) across
/// all n nodes, matching the node-stacked block layout.
inline Matrix replicate_signal_init(const Matrix& x0_signal, Index n) {
    Matrix init(x0_signal.rows() * n, x0_signal.cols());
    for (Index blk = 0; blk < x0_signal.rows(); ++blk)
        for (Index i = 0; i < n; ++i) init.row(blk * n + i) = x0_signal.row(blk);
    return init;
}

}  // namespace detail

/// Centralized reference run: the same algorithm with the exact averaging
/// projector in place of the tracker, consensual-replicated initial state.
/// `x0_signal` has one row per base state signal block.
inline RunResult run_centralized(const CentralizedAlgorithm& alg, const ObjectiveFamily& fam,
                                 const Matrix& x0_signal, const RunOptions& opts = {}) {
    const GossipMatrix g(averaging_projector(fam.n()));
    DecentralizedAlgorithm exact = decentralize_centralized(alg, TrackerKind::exact, g);
    return run(exact, fam, detail::replicate_signal_init(x0_signal, fam.n()), opts);
}

/// Centralized reference run for distributed algorithms (exact averaging).
inline RunResult run_centralized(const DistributedAlgorithm& alg, const ObjectiveFamily& fam,
                                 const Matrix& x0_signal, const RunOptions& opts = {}) {
    const GossipMatrix g(averaging_projector(fam.n()));
    DecentralizedAlgorithm exact = decentralize_distributed(alg, TrackerKind::exact, g);
    return run(exact, fam, detail::replicate_signal_init(x0_signal, fam.n()), opts);
}

/// Per-iteration metrics as CSV: a single '#' metadata line, then
/// k,gap,consensus_error rows. Bodies are deterministic for identical runs.
inline void write_csv(const RunResult& result, std::ostream& os,
                      const std::string& config_echo) {
    os << "# " << config_echo << "\n";
    os << "k,gap,consensus_error\n";
    os.precision(17);
    for (Index k = 0; k < result.iterations; ++k) {
        os << k << ',' << result.gap[static_cast<size_t>(k)] << ','
           << result.consensus_error[static_cast<size_t>(k)] << "\n";
    }
}

}  // namespace decopt

#endif  // DECOPT_SIMULATOR_HPP
