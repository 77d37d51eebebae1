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
#ifndef DECOPT_SDP_HPP
#define DECOPT_SDP_HPP

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "decopt/state_space.hpp"

namespace decopt {

/// Largest eigenvalue of a symmetric matrix (the input is symmetrized).
inline double max_eigenvalue(const Matrix& S) {
    if (!S.allFinite()) throw std::invalid_argument("max_eigenvalue: non-finite entries");
    if (S.rows() != S.cols()) throw std::invalid_argument("max_eigenvalue: matrix not square");
    if (S.rows() == 0) throw std::invalid_argument("max_eigenvalue: empty matrix");
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (S + S.transpose()));
    return es.eigenvalues().maxCoeff();
}

inline double min_eigenvalue(const Matrix& S) { return -max_eigenvalue(-S); }

/// Visits the upper triangle of a p x p symmetric matrix in the fixed vech
/// order used throughout: k runs over columns j, rows i <= j.
template <typename Fn>
inline void for_each_vech(Index p, Fn&& fn) {
    Index k = 0;
    for (Index j = 0; j < p; ++j)
        for (Index i = 0; i <= j; ++i) fn(i, j, k++);
}

inline Index vech_size(Index p) { return p * (p + 1) / 2; }

/**
 * Feasibility problem for an LMI affine in a symmetric matrix P and
 * nonnegative scalars lambda:
 *
 *   F(P, lambda) = F0 + sum_k vech(P)_k * FP[k] + sum_j lambda_j * Flam[j]
 *
 * sought to satisfy F <= -margin, P >= eps_P I, lambda >= 0. FP[k] is the
 * derivative of F with respect to the vech entry k (the off-diagonal basis
 * element is e_i e_j^T + e_j e_i^T).
 */
struct LmiFeasibilityProblem {
    Index p = 0;              ///< side of P
    Index m = 0;              ///< side of F
    Matrix F0;                ///< m x m
    std::vector<Matrix> FP;   ///< vech_size(p) matrices, m x m each
    std::vector<Matrix> Flam; ///< one m x m matrix per multiplier
    double eps_P = 1e-8;
    double margin_tol = 1e-9;

    Index n_lambda() const { return static_cast<Index>(Flam.size()); }

    void validate() const {
        if (p < 1 || m < 1) throw std::invalid_argument("LmiFeasibilityProblem: empty");
        if (static_cast<Index>(FP.size()) != vech_size(p))
            throw std::invalid_argument("LmiFeasibilityProblem: FP size mismatch");
        auto check = [&](const Matrix& M, const char* what) {
            if (M.rows() != m || M.cols() != m)
                throw std::invalid_argument(std::string("LmiFeasibilityProblem: ") + what +
                                            " has wrong shape");
            if ((M - M.transpose()).norm() > 1e-10 * (1.0 + M.norm()))
                throw std::invalid_argument(std::string("LmiFeasibilityProblem: ") + what +
                                            " not symmetric");
        };
        check(F0, "F0");
        for (const auto& M : FP) check(M, "FP term");
        for (const auto& M : Flam) check(M, "Flam term");
    }

    Matrix evaluate(const Matrix& P, const Vector& lambda) const {
        Matrix F = F0;
        for_each_vech(p, [&](Index i, Index j, Index k) {
            F += P(i, j) * FP[static_cast<size_t>(k)];
        });
        for (Index j = 0; j < n_lambda(); ++j) F += lambda(j) * Flam[static_cast<size_t>(j)];
        return F;
    }
};

enum class FeasibilityStatus { feasible, infeasible_at_tolerance, solver_failure };

struct FeasibilityResult {
    FeasibilityStatus status = FeasibilityStatus::infeasible_at_tolerance;
    Matrix P;       ///< witness, normalized to trace(P) = p when feasible
    Vector lambda;
    double slack = 0.0;  ///< -max_eigenvalue(F) at the returned witness
};

namespace sdp_detail {

struct BarrierState {
    // Variable vector y = (vech(P), lambda, t).
    Vector y;
    Index p, np, nl;
    double trust_radius = 1e8;
    double trace_cap = 0.0;   ///< log barrier keeps trace(P) < trace_cap
    double eps_solve = 1e-8;  ///< P >= eps_solve * I during the solve

    Index n_vars() const { return np + nl + 1; }
    double t() const { return y(np + nl); }

    Matrix P_of() const {
        Matrix P(p, p);
        for_each_vech(p, [&](Index i, Index j, Index k) {
            P(i, j) = y(k);
            P(j, i) = y(k);
        });
        return P;
    }
    Vector lambda_of() const { return y.segment(np, nl); }
};

/// Barrier value at y, or empty if y is outside the domain.
inline std::optional<double> barrier_value(const LmiFeasibilityProblem& prob,
                                           const BarrierState& st, const Vector& y,
                                           double alpha) {
    const Index np = st.np, nl = st.nl;
    Matrix P(st.p, st.p);
    for_each_vech(st.p, [&](Index i, Index j, Index k) {
        P(i, j) = y(k);
        P(j, i) = y(k);
    });
    const Vector lam = y.segment(np, nl);
    const double t = y(np + nl);

    for (Index j = 0; j < nl; ++j)
        if (!(lam(j) > 0.0)) return std::nullopt;
    const double tr = P.trace();
    if (!(tr < st.trace_cap)) return std::nullopt;
    const double ynorm2 = y.head(np + nl).squaredNorm();
    if (!(ynorm2 < st.trust_radius * st.trust_radius)) return std::nullopt;

    const Matrix S2 = P - st.eps_solve * Matrix::Identity(st.p, st.p);
    Eigen::LLT<Matrix> llt2(S2);
    if (llt2.info() != Eigen::Success) return std::nullopt;

    Matrix F = prob.F0;
    for_each_vech(st.p, [&](Index, Index, Index k) {
        F += y(k) * prob.FP[static_cast<size_t>(k)];
    });
    for (Index j = 0; j < nl; ++j) F += lam(j) * prob.Flam[static_cast<size_t>(j)];
    const Matrix S1 = -F - t * Matrix::Identity(prob.m, prob.m);
    Eigen::LLT<Matrix> llt1(S1);
    if (llt1.info() != Eigen::Success) return std::nullopt;

    double logdet1 = 0.0, logdet2 = 0.0;
    for (Index i = 0; i < prob.m; ++i) logdet1 += std::log(llt1.matrixL()(i, i));
    for (Index i = 0; i < st.p; ++i) logdet2 += std::log(llt2.matrixL()(i, i));
    logdet1 *= 2.0;
    logdet2 *= 2.0;

    double val = -alpha * t - logdet1 - logdet2 - std::log(st.trace_cap - tr) -
                 std::log(st.trust_radius * st.trust_radius - ynorm2);
    for (Index j = 0; j < nl; ++j) val -= std::log(lam(j));
    return val;
}

}  // namespace sdp_detail

/**
 * Slack-maximizing log-det barrier interior-point solver for the tiny dense
 * LMIs this library produces (m up to a few dozen).
 *
 * Maximizes t subject to F(P, lambda) <= -t I, P >= eps I, lambda >= 0, a
 * trace cap on P that pins the scale of the (jointly homogeneous) witness,
 * and a large trust radius that bounds degenerate rays. A candidate witness
 * is extracted after every centering step and re-validated by an independent
 * eigenvalue check; the solver never trusts its own interior state for the
 * final verdict. Infeasibility is declared at tolerance after the barrier
 * path is exhausted, not proven by a dual certificate.
 */
inline FeasibilityResult solve(const LmiFeasibilityProblem& prob,
                               const Matrix* warm_P = nullptr,
                               const Vector* warm_lambda = nullptr) {
    prob.validate();
    using sdp_detail::BarrierState;

    BarrierState st;
    st.p = prob.p;
    st.np = vech_size(prob.p);
    st.nl = prob.n_lambda();
    st.trace_cap = static_cast<double>(prob.p) + 1.0;
    st.eps_solve = prob.eps_P;
    const Index N = st.n_vars();

    // Strictly interior start. Any (P, lambda) interior in its own right can
    // be completed by a sufficiently negative t.
    Matrix P0 = 0.5 * Matrix::Identity(prob.p, prob.p);
    Vector lam0 = Vector::Constant(std::max<Index>(st.nl, 0), 0.1);
    if (warm_P && warm_P->rows() == prob.p) {
        P0 = 0.5 * (*warm_P + warm_P->transpose());
        const double lo = min_eigenvalue(P0);
        if (lo < 2.0 * st.eps_solve) P0 += (2.0 * st.eps_solve - lo) * Matrix::Identity(prob.p, prob.p);
        const double tr = P0.trace();
        if (tr > 0.9 * st.trace_cap) P0 *= 0.9 * st.trace_cap / tr;
    }
    if (warm_lambda && warm_lambda->size() == st.nl) {
        lam0 = warm_lambda->cwiseMax(1e-6);
    }

    st.y = Vector::Zero(N);
    for_each_vech(prob.p, [&](Index i, Index j, Index k) { st.y(k) = P0(i, j); });
    st.y.segment(st.np, st.nl) = lam0;
    {
        const Matrix F = prob.evaluate(P0, lam0);
        st.y(N - 1) = -max_eigenvalue(F) - std::max(1.0, 0.1 * F.norm());
    }

    FeasibilityResult best;
    best.status = FeasibilityStatus::infeasible_at_tolerance;
    best.P = P0;
    best.lambda = lam0;
    best.slack = -std::numeric_limits<double>::infinity();

    auto consider_witness = [&](const Matrix& P, const Vector& lam) -> bool {
        // Normalize scale: the constraint set is jointly homogeneous in
        // (P, lambda), so pin trace(P) = p before judging margins.
        const double tr = P.trace();
        if (!(tr > 0.0)) return false;
        const double scale = static_cast<double>(prob.p) / tr;
        const Matrix Pn = scale * P;
        const Vector ln = scale * lam;
        const double slack = -max_eigenvalue(prob.evaluate(Pn, ln));
        if (slack > best.slack) {
            best.slack = slack;
            best.P = Pn;
            best.lambda = ln;
        }
        const bool lam_ok = (ln.size() == 0) || ln.minCoeff() >= 0.0;
        if (slack > prob.margin_tol && min_eigenvalue(Pn) >= prob.eps_P && lam_ok) {
            best.status = FeasibilityStatus::feasible;
            return true;
        }
        return false;
    };

    std::vector<Matrix> T1(static_cast<size_t>(N));
    Vector grad(N);
    Matrix hess(N, N);

    for (double alpha = 1.0; alpha <= 2e9; alpha *= 20.0) {
        for (int newton = 0; newton < 80; ++newton) {
            // Assemble gradient and Hessian of the barrier at st.y.
            const Matrix P = st.P_of();
            const Vector lam = st.lambda_of();
            const double t = st.t();

            Matrix F = prob.F0;
            for_each_vech(prob.p, [&](Index, Index, Index k) {
                F += st.y(k) * prob.FP[static_cast<size_t>(k)];
            });
            for (Index j = 0; j < st.nl; ++j) F += lam(j) * prob.Flam[static_cast<size_t>(j)];
            const Matrix S1 = -F - t * Matrix::Identity(prob.m, prob.m);
            Eigen::LLT<Matrix> llt1(S1);
            const Matrix S2 = P - st.eps_solve * Matrix::Identity(prob.p, prob.p);
            Eigen::LLT<Matrix> llt2(S2);
            if (llt1.info() != Eigen::Success || llt2.info() != Eigen::Success) {
                return FeasibilityResult{FeasibilityStatus::solver_failure, best.P, best.lambda,
                                         best.slack};
            }

            // T1[a] = L1^{-1} (dS1/dy_a) L1^{-T}; dS1/dy_a is -FP, -Flam or -I.
            const Matrix L1 = llt1.matrixL();
            auto whiten1 = [&](const Matrix& M) {
                Matrix X = L1.triangularView<Eigen::Lower>().solve(M);
                Matrix Y = L1.triangularView<Eigen::Lower>().solve(X.transpose());
                return Y;  // L^{-1} M L^{-T} for symmetric M
            };
            for (Index a = 0; a < st.np; ++a)
                T1[static_cast<size_t>(a)] = whiten1(-prob.FP[static_cast<size_t>(a)]);
            for (Index j = 0; j < st.nl; ++j)
                T1[static_cast<size_t>(st.np + j)] = whiten1(-prob.Flam[static_cast<size_t>(j)]);
            T1[static_cast<size_t>(N - 1)] = whiten1(-Matrix::Identity(prob.m, prob.m));

            grad.setZero();
            hess.setZero();
            for (Index a = 0; a < N; ++a) {
                grad(a) -= T1[static_cast<size_t>(a)].trace();
                for (Index b = a; b < N; ++b) {
                    const double h =
                        (T1[static_cast<size_t>(a)].cwiseProduct(T1[static_cast<size_t>(b)]))
                            .sum();
                    hess(a, b) += h;
                    hess(b, a) = hess(a, b);
                }
            }
            grad(N - 1) -= alpha;

            // S2 barrier touches only the P variables; the vech basis makes
            // T2 a symmetrized outer product of columns of L2^{-1}.
            const Matrix L2inv =
                Matrix(llt2.matrixL()).triangularView<Eigen::Lower>().solve(
                    Matrix::Identity(prob.p, prob.p));
            const Matrix Z2 = L2inv.transpose() * L2inv;  // S2^{-1}
            std::vector<Matrix> T2(static_cast<size_t>(st.np));
            for_each_vech(prob.p, [&](Index i, Index j, Index k) {
                const Vector ui = L2inv * Matrix::Identity(prob.p, prob.p).col(i);
                const Vector uj = L2inv * Matrix::Identity(prob.p, prob.p).col(j);
                Matrix T = ui * uj.transpose();
                if (i != j) T += uj * ui.transpose();
                else T = ui * ui.transpose();
                T2[static_cast<size_t>(k)] = T;
            });
            for (Index a = 0; a < st.np; ++a) {
                grad(a) -= T2[static_cast<size_t>(a)].trace();
                for (Index b = a; b < st.np; ++b) {
                    const double h =
                        (T2[static_cast<size_t>(a)].cwiseProduct(T2[static_cast<size_t>(b)]))
                            .sum();
                    hess(a, b) += h;
                    hess(b, a) = hess(a, b);
                }
            }

            // lambda barriers.
            for (Index j = 0; j < st.nl; ++j) {
                grad(st.np + j) -= 1.0 / lam(j);
                hess(st.np + j, st.np + j) += 1.0 / (lam(j) * lam(j));
            }

            // Trace cap barrier: affects diagonal vech entries.
            const double trgap = st.trace_cap - P.trace();
            for_each_vech(prob.p, [&](Index i, Index j, Index k) {
                if (i != j) return;
                grad(k) += 1.0 / trgap;
                for_each_vech(prob.p, [&](Index i2, Index j2, Index k2) {
                    if (i2 == j2) hess(k, k2) += 1.0 / (trgap * trgap);
                });
            });

            // Trust region barrier on (vech(P), lambda).
            const double s2n = st.y.head(st.np + st.nl).squaredNorm();
            const double gap = st.trust_radius * st.trust_radius - s2n;
            for (Index a = 0; a < st.np + st.nl; ++a) {
                grad(a) += 2.0 * st.y(a) / gap;
                hess(a, a) += 2.0 / gap;
                for (Index b = a; b < st.np + st.nl; ++b) {
                    hess(a, b) += 4.0 * st.y(a) * st.y(b) / (gap * gap);
                    hess(b, a) = hess(a, b);
                }
            }

            // Newton step with a tiny Levenberg fallback.
            Vector dy;
            {
                Eigen::LDLT<Matrix> ldlt(hess);
                dy = ldlt.solve(-grad);
                if (!dy.allFinite()) {
                    hess.diagonal().array() += 1e-10 * (1.0 + hess.diagonal().maxCoeff());
                    dy = Eigen::LDLT<Matrix>(hess).solve(-grad);
                    if (!dy.allFinite()) {
                        return FeasibilityResult{FeasibilityStatus::solver_failure, best.P,
                                                 best.lambda, best.slack};
                    }
                }
            }
            const double decrement2 = -grad.dot(dy);
            if (!(decrement2 > 2e-9)) break;  // centered

            const auto f0 = sdp_detail::barrier_value(prob, st, st.y, alpha);
            if (!f0) {
                return FeasibilityResult{FeasibilityStatus::solver_failure, best.P, best.lambda,
                                         best.slack};
            }
            double step = 1.0;
            bool moved = false;
            for (int ls = 0; ls < 60; ++ls) {
                const Vector cand = st.y + step * dy;
                const auto fc = sdp_detail::barrier_value(prob, st, cand, alpha);
                if (fc && *fc <= *f0 + 1e-4 * step * grad.dot(dy)) {
                    st.y = cand;
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
            if (!moved) break;  // no progress possible at this centering
        }

        if (consider_witness(st.P_of(), st.lambda_of())) {
            best.status = FeasibilityStatus::feasible;
            return best;
        }
    }

    return best;
}

}  // namespace decopt

#endif  // DECOPT_SDP_HPP
