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
#ifndef DECOPT_IQC_HPP
#define DECOPT_IQC_HPP

#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "decopt/consensus.hpp"
#include "decopt/interconnect.hpp"
#include "decopt/sdp.hpp"
#include "decopt/state_space.hpp"

namespace decopt {

/// Selects a signal of the analysis plant that feeds an IQC filter: a named
/// span of its outputs, inputs or states. An empty span name selects the
/// whole channel group.
struct SignalSelection {
    enum class From { output, input, state };
    From from = From::output;
    std::string span;
};

/// One quadratic form z[sel]^T M z[sel] on a slice of the filter output.
struct QuadraticForm {
    Matrix M;
    Index z_offset = 0;
    Index z_width = 0;
    std::string name;
};

/**
 * An IQC specification: a (possibly static) filter psi producing z from
 * selected plant signals, together with the quadratic forms that hold
 * pointwise along true trajectories, (z - z*)^T M (z - z*) >= 0.
 */
struct IqcSpec {
    StateSpace psi;
    std::vector<SignalSelection> inputs;
    std::vector<QuadraticForm> forms;
    std::string name;
};

/// Sector form for gradients of mu-strongly convex, beta-smooth functions on
/// z = (v, u), u = grad f(v), expanded to `width` parallel channels. This is
/// the co-coercivity form -2 (u - mu v)^T (u - beta v), tight on quadratics
/// at the sector endpoints.
inline IqcSpec sector_iqc(double mu, double beta, Index width = 1) {
    if (!(mu > 0.0) || !(beta >= mu))
        throw std::invalid_argument("sector_iqc: need 0 < mu <= beta");
    const Matrix iw = Matrix::Identity(width, width);
    Matrix M(2 * width, 2 * width);
    M << -2.0 * mu * beta * iw, (mu + beta) * iw, (mu + beta) * iw, -2.0 * iw;
    IqcSpec spec;
    spec.psi = static_gain(Matrix::Identity(2 * width, 2 * width));
    spec.inputs = {SignalSelection{SignalSelection::From::output, ""},
                   SignalSelection{SignalSelection::From::input, ""}};
    spec.forms = {QuadraticForm{M, 0, 2 * width, "sector"}};
    spec.name = "sector";
    return spec;
}

/// The rho-normalized gradient sector form on z = (v, u/rho) with
/// rho = rho0 sqrt(mu beta); depends on (rho0, kappa) only. Equals the plain
/// sector form up to the u rescaling and a positive factor.
inline IqcSpec normalized_sector_iqc(double rho0, double kappa, Index width = 1) {
    if (!(rho0 > 0.0)) throw std::invalid_argument("normalized_sector_iqc: rho0 must be > 0");
    if (!(kappa >= 1.0)) throw std::invalid_argument("normalized_sector_iqc: kappa must be >= 1");
    const Matrix iw = Matrix::Identity(width, width);
    const double cross = (std::sqrt(kappa) + 1.0 / std::sqrt(kappa)) / rho0;
    Matrix M(2 * width, 2 * width);
    M << (-2.0 / (rho0 * rho0)) * iw, cross * iw, cross * iw, -2.0 * iw;
    IqcSpec spec;
    spec.psi = static_gain(Matrix::Identity(2 * width, 2 * width));
    spec.inputs = {SignalSelection{SignalSelection::From::output, ""},
                   SignalSelection{SignalSelection::From::input, ""}};
    spec.forms = {QuadraticForm{M, 0, 2 * width, "normalized-sector"}};
    spec.name = "normalized-sector";
    return spec;
}

/// Equality-type form encoding 1^T zeta = 0 for a tracker-state block:
/// z = 1^T zeta with M = -1, which any feasible multiplier combination can
/// only satisfy with z = 0.
inline IqcSpec zero_sum_iqc(const std::string& state_span, Index n) {
    if (n < 1) throw std::invalid_argument("zero_sum_iqc: need n >= 1");
    IqcSpec spec;
    spec.psi = static_gain(Matrix::Ones(1, n));
    spec.inputs = {SignalSelection{SignalSelection::From::state, state_span}};
    spec.forms = {QuadraticForm{-Matrix::Identity(1, 1), 0, 1, "zero-sum " + state_span}};
    spec.name = "zero-sum " + state_span;
    return spec;
}

/**
 * IQC characterization of a consensus tracker known only through sigma2.
 * The filter takes (v, wbar) with wbar = w - Jv, holds the previous v and
 * wbar in two delay states, and outputs
 *
 *   z1 = ( wbar[k],  Jperp (wbar[k-1] + v[k] - v[k-1]) )   with
 *        M1 = diag(-I, sigma2^2 I), capturing the one-step contraction, and
 *   z2 = wbar[k]                                            with
 *        M2 = -J, encoding the conserved zero column sum of wbar.
 *
 * The consumer binds the two n-wide inputs.
 */
inline IqcSpec gcon_uncertain_iqc(double sigma2_bound, Index n) {
    if (!(sigma2_bound >= 0.0) || !(sigma2_bound < 1.0))
        throw std::invalid_argument("gcon_uncertain_iqc: sigma2 must be in [0, 1)");
    if (n < 2) throw std::invalid_argument("gcon_uncertain_iqc: need n >= 2");
    const Matrix In = Matrix::Identity(n, n);
    const Matrix Jp = disagreement_projector(n);
    const Matrix Z = Matrix::Zero(n, n);

    Matrix A = Matrix::Zero(2 * n, 2 * n);
    Matrix B = Matrix::Identity(2 * n, 2 * n);  // psi1' = v, psi2' = wbar
    Matrix C(3 * n, 2 * n), D(3 * n, 2 * n);
    C << Z, Z,    // z1a = wbar
        -Jp, Jp,  // z1b = Jperp(psi2 - psi1 + v)
        Z, Z;     // z2  = wbar
    D << Z, In,
        Jp, Z,
        Z, In;

    Matrix M1 = Matrix::Zero(2 * n, 2 * n);
    M1.topLeftCorner(n, n) = -In;
    M1.bottomRightCorner(n, n) = sigma2_bound * sigma2_bound * In;

    IqcSpec spec;
    spec.psi = StateSpace(A, B, C, D);
    spec.forms = {QuadraticForm{M1, 0, 2 * n, "gcon contraction"},
                  QuadraticForm{-averaging_projector(n), 2 * n, n, "gcon zero-sum"}};
    spec.name = "gcon uncertain";
    return spec;
}

/// A quadratic form bound to the assembled analysis system: z = C eta + D u.
struct AssembledForm {
    Matrix C, D, M;
    std::string name;
};

/**
 * Everything needed to pose the rate LMI at a target tau: the augmented
 * plant (G states plus filter states, inputs unchanged) and the bound
 * quadratic forms. Feasibility of
 *
 *   [A'PA - tau^2 P, A'PB; B'PA, B'PB] + sum_j lambda_j Z_j' M_j Z_j <= 0,
 *   P > 0, lambda >= 0,   with Z_j = [C_j D_j],
 *
 * certifies linear convergence with rate tau.
 */
struct AnalysisProblem {
    Matrix A, B;  ///< augmented plant
    std::vector<AssembledForm> forms;
    double tau = 1.0;
    std::string fingerprint;

    Index state_dim() const { return A.rows(); }
    Index input_dim() const { return B.cols(); }
};

namespace detail {

inline Span resolve_selection(const LabeledSystem& G, const SignalSelection& sel) {
    const SpanMap* map = nullptr;
    Index total = 0;
    switch (sel.from) {
        case SignalSelection::From::output:
            map = &G.outputs;
            total = G.sys.output_dim();
            break;
        case SignalSelection::From::input:
            map = &G.inputs;
            total = G.sys.input_dim();
            break;
        case SignalSelection::From::state:
            map = &G.states;
            total = G.sys.state_dim();
            break;
    }
    if (sel.span.empty()) return Span{0, total};
    return map->at(sel.span);
}

}  // namespace detail

/// Joins the filters of all IQC specs onto the plant G and produces the LMI
/// data for the target rate tau. Filters are feedforward, so the
/// interconnection is always well-posed; selection widths are checked.
inline AnalysisProblem assemble(const LabeledSystem& G, const std::vector<IqcSpec>& iqcs,
                                double tau, std::string fingerprint = "") {
    if (!(tau > 0.0) || tau > 1.0)
        throw std::invalid_argument("assemble: tau must be in (0, 1]");
    const Index nx = G.sys.state_dim();
    const Index nu = G.sys.input_dim();

    Index total_psi = 0;
    for (const auto& spec : iqcs) total_psi += spec.psi.state_dim();

    AnalysisProblem prob;
    prob.tau = tau;
    prob.fingerprint = std::move(fingerprint);
    prob.A = Matrix::Zero(nx + total_psi, nx + total_psi);
    prob.B = Matrix::Zero(nx + total_psi, nu);
    prob.A.topLeftCorner(nx, nx) = G.sys.A;
    prob.B.topRows(nx) = G.sys.B;

    Index psi_off = nx;
    for (const auto& spec : iqcs) {
        // Selection of the filter input: rows over (state, input) of G.
        Index sel_width = 0;
        for (const auto& sel : spec.inputs) sel_width += detail::resolve_selection(G, sel).width;
        if (sel_width != spec.psi.input_dim())
            throw std::invalid_argument("assemble: IQC '" + spec.name +
                                        "' selection width mismatch");
        Matrix Sx = Matrix::Zero(sel_width, nx), Su = Matrix::Zero(sel_width, nu);
        Index row = 0;
        for (const auto& sel : spec.inputs) {
            const Span s = detail::resolve_selection(G, sel);
            switch (sel.from) {
                case SignalSelection::From::output:
                    Sx.middleRows(row, s.width) = G.sys.C.middleRows(s.offset, s.width);
                    Su.middleRows(row, s.width) = G.sys.D.middleRows(s.offset, s.width);
                    break;
                case SignalSelection::From::input:
                    Su.block(row, s.offset, s.width, s.width) =
                        Matrix::Identity(s.width, s.width);
                    break;
                case SignalSelection::From::state:
                    Sx.block(row, s.offset, s.width, s.width) =
                        Matrix::Identity(s.width, s.width);
                    break;
            }
            row += s.width;
        }

        const Index npsi = spec.psi.state_dim();
        if (npsi > 0) {
            prob.A.block(psi_off, 0, npsi, nx) = spec.psi.B * Sx;
            prob.A.block(psi_off, psi_off, npsi, npsi) = spec.psi.A;
            prob.B.middleRows(psi_off, npsi) = spec.psi.B * Su;
        }
        for (const auto& form : spec.forms) {
            if (form.z_offset < 0 || form.z_offset + form.z_width > spec.psi.output_dim())
                throw std::invalid_argument("assemble: form slice out of range in '" +
                                            spec.name + "'");
            if (form.M.rows() != form.z_width || form.M.cols() != form.z_width)
                throw std::invalid_argument("assemble: form matrix size mismatch in '" +
                                            spec.name + "'");
            AssembledForm af;
            af.M = form.M;
            af.name = form.name;
            const Matrix Cz = spec.psi.C.middleRows(form.z_offset, form.z_width);
            const Matrix Dz = spec.psi.D.middleRows(form.z_offset, form.z_width);
            af.C = Matrix::Zero(form.z_width, nx + total_psi);
            af.C.leftCols(nx) = Dz * Sx;
            if (npsi > 0) af.C.middleCols(psi_off, npsi) = Cz;
            af.D = Dz * Su;
            prob.forms.push_back(std::move(af));
        }
        psi_off += npsi;
    }
    return prob;
}

/// Kronecker-lifts a d=1 analysis problem to d parallel coordinates; the
/// certified rate must not change (the dimensionality-reduction claim).
inline AnalysisProblem lift(const AnalysisProblem& prob, Index d) {
    if (d < 1) throw std::invalid_argument("lift: d must be >= 1");
    if (d == 1) return prob;
    const Matrix id = Matrix::Identity(d, d);
    AnalysisProblem out;
    out.A = kron(prob.A, id);
    out.B = kron(prob.B, id);
    out.tau = prob.tau;
    out.fingerprint = prob.fingerprint + " d=" + std::to_string(d);
    for (const auto& f : prob.forms)
        out.forms.push_back(AssembledForm{kron(f.C, id), kron(f.D, id), kron(f.M, id), f.name});
    return out;
}

/// Expands the analysis problem into the generic affine LMI feasibility form.
inline LmiFeasibilityProblem to_lmi(const AnalysisProblem& prob) {
    const Index p = prob.state_dim();
    const Index m = p + prob.input_dim();
    Matrix K(p, m), E(p, m);
    K << prob.A, prob.B;
    E << Matrix::Identity(p, p), Matrix::Zero(p, prob.input_dim());

    LmiFeasibilityProblem lmi;
    lmi.p = p;
    lmi.m = m;
    lmi.F0 = Matrix::Zero(m, m);
    lmi.FP.resize(static_cast<size_t>(vech_size(p)));
    const double t2 = prob.tau * prob.tau;
    for_each_vech(p, [&](Index i, Index j, Index k) {
        // Basis element e_i e_j^T + e_j e_i^T (single e_i e_i^T on the diagonal).
        Matrix term = K.row(i).transpose() * K.row(j) - t2 * E.row(i).transpose() * E.row(j);
        term += term.transpose().eval();
        if (i == j) term *= 0.5;
        lmi.FP[static_cast<size_t>(k)] = term;
    });
    for (const auto& f : prob.forms) {
        Matrix Z(f.M.rows(), m);
        Z << f.C, f.D;
        lmi.Flam.push_back(Z.transpose() * f.M * Z);
    }
    return lmi;
}

/**
 * A certified linear rate: tau with the LMI witness (P, lambda) and the
 * achieved margin (minus the most-positive eigenvalue of the closed LMI).
 */
struct RateCertificate {
    double tau = 1.0;
    Matrix P;
    Vector lambda;
    double margin = 0.0;
    std::string fingerprint;
};

/// Recomputes the closed LMI directly from the stored witness, independently
/// of the solver's internal representation, and checks margins.
inline bool verify_certificate(const AnalysisProblem& prob, const RateCertificate& cert,
                               double margin_tol = 1e-9, double eps_P_rel = 1e-8) {
    const Index p = prob.state_dim();
    if (cert.P.rows() != p || cert.P.cols() != p) return false;
    if (cert.lambda.size() != static_cast<Index>(prob.forms.size())) return false;
    if (cert.lambda.size() > 0 && cert.lambda.minCoeff() < 0.0) return false;

    const double t2 = cert.tau * cert.tau;
    Matrix F(p + prob.input_dim(), p + prob.input_dim());
    Matrix K(p, p + prob.input_dim());
    K << prob.A, prob.B;
    F = K.transpose() * cert.P * K;
    F.topLeftCorner(p, p) -= t2 * cert.P;
    for (size_t j = 0; j < prob.forms.size(); ++j) {
        const auto& f = prob.forms[j];
        Matrix Z(f.M.rows(), p + prob.input_dim());
        Z << f.C, f.D;
        F += cert.lambda(static_cast<Index>(j)) * Z.transpose() * f.M * Z;
    }
    const double eps_P = eps_P_rel * cert.P.trace() / static_cast<double>(p);
    return max_eigenvalue(F) <= -margin_tol && min_eigenvalue(cert.P) >= eps_P;
}

/**
 * Smallest certifiable tau on a bisection grid of resolution `tol`.
 * Requires feasibility at tau = 1 - tol; otherwise returns no certificate.
 * Witnesses are warm-started across bisection steps and re-verified through
 * the independent path before a certificate is accepted.
 */
inline std::optional<RateCertificate> bisect_rate(
    const std::function<AnalysisProblem(double)>& problem_at, double tol = 1e-3) {
    if (!(tol > 0.0) || tol >= 0.5) throw std::invalid_argument("bisect_rate: bad tolerance");

    std::optional<RateCertificate> incumbent;
    Matrix warm_P;
    Vector warm_lambda;

    auto probe = [&](double tau) -> bool {
        const AnalysisProblem prob = problem_at(tau);
        const LmiFeasibilityProblem lmi = to_lmi(prob);
        const FeasibilityResult res =
            warm_P.size() > 0 ? solve(lmi, &warm_P, &warm_lambda) : solve(lmi);
        if (res.status != FeasibilityStatus::feasible) return false;
        RateCertificate cert{tau, res.P, res.lambda, res.slack, prob.fingerprint};
        if (!verify_certificate(prob, cert)) return false;
        incumbent = std::move(cert);
        warm_P = res.P;
        warm_lambda = res.lambda;
        return true;
    };

    double hi = 1.0 - tol;
    if (!probe(hi)) return std::nullopt;
    double lo = tol;
    // One probe at the lower edge keeps the invariant "lo infeasible" honest.
    if (probe(lo)) return incumbent;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (probe(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return incumbent;
}

// ---------------------------------------------------------------------------
// The two decentralized-ADMM analysis pipelines.
// ---------------------------------------------------------------------------

/**
 * Known-gossip-matrix analysis. The decentralized ADMM recursion with the
 * v2 tracker, written in penalty-normalized coordinates (y and the gradient
 * channel scaled by 1/rho, rho = rho0 sqrt(mu beta)), has plant
 *
 *   state (x, y, zeta_x, zeta_w), input u = w/rho, output v:
 *
 *   [ W      -I  I  0 | -I     ]
 *   [ 0       0  0  I | W-I    ]
 *   [ W^2-W   0  W  0 | 0      ]
 *   [ 0       0  0  W | W^2-W  ]
 *   [ W      -I  I  0 | -I     ]
 *
 * The gradient sector enters through the normalized form on (v, u); the two
 * tracker states contribute the zero-column-sum equality forms.
 */
struct KnownWAdmmAnalysis {
    LabeledSystem G;
    double kappa = 1.0;
    double rho0 = 1.0;
    Index n = 0;
    Index d = 1;

    AnalysisProblem problem(double tau) const {
        std::vector<IqcSpec> iqcs = {normalized_sector_iqc(rho0, kappa, n),
                                     zero_sum_iqc("zeta_x", n), zero_sum_iqc("zeta_w", n)};
        std::ostringstream fp;
        fp << "known-w-admm n=" << n << " kappa=" << kappa << " rho0=" << rho0
           << " d=" << d << " tau=" << tau;
        AnalysisProblem prob = assemble(G, iqcs, tau, fp.str());
        return lift(prob, d);
    }

    std::function<AnalysisProblem(double)> builder() const {
        return [copy = *this](double tau) { return copy.problem(tau); };
    }
};

inline KnownWAdmmAnalysis known_w_admm(const GossipMatrix& g, double kappa, double rho0,
                                       Index d = 1) {
    if (!(kappa >= 1.0)) throw std::invalid_argument("known_w_admm: kappa must be >= 1");
    if (!(rho0 > 0.0)) throw std::invalid_argument("known_w_admm: rho0 must be > 0");
    const Index n = g.n();
    const Matrix& W = g.W;
    const Matrix In = Matrix::Identity(n, n);
    const Matrix Zn = Matrix::Zero(n, n);
    const Matrix W2W = W * W - W;

    Matrix A(4 * n, 4 * n), B(4 * n, n), C(n, 4 * n), D(n, n);
    A << W, -In, In, Zn,
        Zn, Zn, Zn, In,
        W2W, Zn, W, Zn,
        Zn, Zn, Zn, W;
    B << -In, W - In, Zn, W2W;
    C << W, -In, In, Zn;
    D = -In;

    KnownWAdmmAnalysis out;
    out.G = LabeledSystem{StateSpace(A, B, C, D), {}, {}, {}};
    out.G.states.add("x", n);
    out.G.states.add("y", n);
    out.G.states.add("zeta_x", n);
    out.G.states.add("zeta_w", n);
    out.G.inputs.add("u", n);
    out.G.outputs.add("v", n);
    out.kappa = kappa;
    out.rho0 = rho0;
    out.n = n;
    out.d = d;
    return out;
}

/**
 * Unknown-gossip-matrix analysis: the trackers are stripped from the plant
 * and treated as an uncertain system known only through sigma2. The plant is
 * the interconnection of four systems,
 *
 *   (v, x) = G_admm(w, xhat, what)   (the tracker-free ADMM core),
 *   z_grad = (v, w),
 *   z_x    = Psi(x, xhat - J x),
 *   z_w    = Psi(w, what - J w),
 *
 * with inputs (w, xhat, what) and outputs (z_grad, z_x, z_w); the gradient
 * sector constrains z_grad and each Psi copy contributes its contraction and
 * zero-sum forms.
 */
struct UnknownWAdmmAnalysis {
    LabeledSystem G;
    double sigma2_bound = 0.0;
    double kappa = 1.0;
    double rho0 = 1.0;
    Index n = 0;
    Index d = 1;
    Matrix M1_psi;  ///< contraction form of the tracker IQC
    Matrix M2_psi;  ///< zero-sum form (-J)

    AnalysisProblem problem(double tau) const {
        std::vector<IqcSpec> iqcs;
        {
            IqcSpec grad_spec = normalized_sector_iqc(rho0, kappa, n);
            grad_spec.inputs = {SignalSelection{SignalSelection::From::output, "z_grad"}};
            iqcs.push_back(std::move(grad_spec));
        }
        auto output_form = [&](const std::string& span, const Matrix& M,
                               const std::string& name) {
            IqcSpec spec;
            const Index w = M.rows();
            spec.psi = static_gain(Matrix::Identity(w, w));
            spec.inputs = {SignalSelection{SignalSelection::From::output, span}};
            spec.forms = {QuadraticForm{M, 0, w, name}};
            spec.name = name;
            return spec;
        };
        iqcs.push_back(output_form("psi_x.z1", M1_psi, "gcon contraction x"));
        iqcs.push_back(output_form("psi_x.z2", M2_psi, "gcon zero-sum x"));
        iqcs.push_back(output_form("psi_w.z1", M1_psi, "gcon contraction w"));
        iqcs.push_back(output_form("psi_w.z2", M2_psi, "gcon zero-sum w"));
        std::ostringstream fp;
        fp << "unknown-w-admm n=" << n << " sigma2=" << sigma2_bound << " kappa=" << kappa
           << " rho0=" << rho0 << " d=" << d << " tau=" << tau;
        AnalysisProblem prob = assemble(G, iqcs, tau, fp.str());
        return lift(prob, d);
    }

    std::function<AnalysisProblem(double)> builder() const {
        return [copy = *this](double tau) { return copy.problem(tau); };
    }
};

inline UnknownWAdmmAnalysis unknown_w_admm(double sigma2_bound, Index n, double kappa,
                                           double rho0, Index d = 1) {
    if (!(sigma2_bound >= 0.0) || !(sigma2_bound < 1.0))
        throw std::invalid_argument("unknown_w_admm: sigma2 must be in [0, 1)");
    if (n < 2) throw std::invalid_argument("unknown_w_admm: need n >= 2");
    if (!(kappa >= 1.0)) throw std::invalid_argument("unknown_w_admm: kappa must be >= 1");
    if (!(rho0 > 0.0)) throw std::invalid_argument("unknown_w_admm: rho0 must be > 0");

    const Matrix In = Matrix::Identity(n, n);
    const Matrix Zn = Matrix::Zero(n, n);
    const Matrix J = averaging_projector(n);

    // Tracker-free ADMM core in normalized coordinates:
    //   x' = -y - w + xhat,  y' = -w + what,  v = -y - w + xhat, second output x.
    Matrix Ag(2 * n, 2 * n), Bg(2 * n, 3 * n), Cg(2 * n, 2 * n), Dg(2 * n, 3 * n);
    Ag << Zn, -In, Zn, Zn;
    Bg << -In, In, Zn, -In, Zn, In;
    Cg << Zn, -In, In, Zn;
    Dg << -In, In, Zn, Zn, Zn, Zn;

    // Psi bound to raw (signal, tracked signal): feed (v, wbar) = T (src, hat)
    // with wbar = hat - J src.
    IqcSpec psi = gcon_uncertain_iqc(sigma2_bound, n);
    Matrix T(2 * n, 2 * n);
    T << In, Zn, -J, In;
    const StateSpace psi_bound(psi.psi.A, psi.psi.B * T, psi.psi.C, psi.psi.D * T);

    InterconnectionBuilder ib;
    ib.add_input("w", n).add_input("xhat", n).add_input("what", n);
    ib.add_block("gadmm", StateSpace(Ag, Bg, Cg, Dg),
                 {{"w", n}, {"xhat", n}, {"what", n}}, {{"v", n}, {"x", n}});
    Matrix sel = Matrix::Identity(2 * n, 2 * n);
    ib.add_block("znabla", static_gain(sel), {{"v", n}, {"w", n}}, {{"z", 2 * n}});
    ib.add_block("psi_x", psi_bound, {{"src", n}, {"hat", n}}, {{"z1", 2 * n}, {"z2", n}});
    ib.add_block("psi_w", psi_bound, {{"src", n}, {"hat", n}}, {{"z1", 2 * n}, {"z2", n}});

    ib.connect("gadmm", "w", ext("w"));
    ib.connect("gadmm", "xhat", ext("xhat"));
    ib.connect("gadmm", "what", ext("what"));
    ib.connect("znabla", "v", port("gadmm", "v"));
    ib.connect("znabla", "w", ext("w"));
    ib.connect("psi_x", "src", port("gadmm", "x"));
    ib.connect("psi_x", "hat", ext("xhat"));
    ib.connect("psi_w", "src", ext("w"));
    ib.connect("psi_w", "hat", ext("what"));

    ib.add_output(port("znabla", "z"), "z_grad");
    ib.add_output(port("psi_x", "z1"));
    ib.add_output(port("psi_x", "z2"));
    ib.add_output(port("psi_w", "z1"));
    ib.add_output(port("psi_w", "z2"));

    UnknownWAdmmAnalysis out;
    out.G = ib.build();
    out.sigma2_bound = sigma2_bound;
    out.kappa = kappa;
    out.rho0 = rho0;
    out.n = n;
    out.d = d;
    Matrix M1 = Matrix::Zero(2 * n, 2 * n);
    M1.topLeftCorner(n, n) = -In;
    M1.bottomRightCorner(n, n) = sigma2_bound * sigma2_bound * In;
    out.M1_psi = M1;
    out.M2_psi = -J;
    return out;
}

}  // namespace decopt

#endif  // DECOPT_IQC_HPP
