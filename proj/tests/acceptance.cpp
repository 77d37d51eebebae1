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

// Acceptance suite: one line per criterion, exit code = number of failures.
//
// Criteria 6 and 7 contain regimes where no certificate below tau = 1 exists
// for this analysis formulation (see README, "Known limits"): criterion 6 at
// sigma2 in {0.5, 0.8} and criterion 7 at kappa = 100. Those checks run
// exactly as stated and report honestly.

#include <cmath>
#include <cstdio>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "decopt/cli_app.hpp"
#include "decopt/iqc.hpp"
#include "decopt/simulator.hpp"

using namespace decopt;

namespace {

int failures = 0;
int criterion_no = 0;

void report(bool pass, const std::string& name, const std::string& detail) {
    ++criterion_no;
    std::printf("[%2d] %s  %s%s%s\n", criterion_no, pass ? "PASS" : "FAIL", name.c_str(),
                detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

GossipMatrix two_node_gossip() {
    Matrix W(2, 2);
    W << 0.6, 0.4, 0.4, 0.6;
    return GossipMatrix(W);
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

// --- 1. Theorem fixed-point transfer -------------------------------------
void criterion_fixed_point_transfer() {
    double worst = 0.0;
    const GossipMatrix g2 = two_node_gossip();
    const GossipMatrix g5 = metropolis_gossip(ring_adjacency(5));
    for (const GossipMatrix* g : {&g2, &g5}) {
        for (Index d : {1, 3}) {
            for (double kappa : {1.0, 10.0, 100.0}) {
                for (unsigned seed = 0; seed < 5; ++seed) {
                    const auto fam = random_family(g->n(), d, kappa, seed);
                    const double eta =
                        decentralized_gd_step(fam.mu, fam.beta, g->sigma2_value);
                    for (TrackerKind tk : {TrackerKind::v1, TrackerKind::v2}) {
                        const auto alg = decentralize_centralized(
                            build_gradient_descent(eta), tk, *g);
                        const auto fp = decentralized_fixed_point(alg, fam);
                        worst = std::max(worst, (alg.linear.sys.A * fp.state +
                                                 alg.linear.sys.B * fp.input - fp.state)
                                                    .norm());
                    }
                    const auto admm = decentralize_distributed(
                        build_admm(normalize_rho(1.0, fam.mu, fam.beta)), TrackerKind::v2,
                        *g);
                    const auto fp = decentralized_fixed_point(admm, fam);
                    worst = std::max(worst, (admm.linear.sys.A * fp.state +
                                             admm.linear.sys.B * fp.input - fp.state)
                                                .norm());
                }
            }
        }
    }
    report(worst <= 1e-10, "fixed-point transfer (GD v1/v2, ADMM v2)",
           "max residual " + fmt(worst));
}

// --- 2. DIGing recovery ----------------------------------------------------
void criterion_diging() {
    double worst = 0.0;
    const GossipMatrix g2 = two_node_gossip();
    const GossipMatrix g4 = metropolis_gossip(ring_adjacency(4));
    for (const GossipMatrix* g : {&g2, &g4}) {
        const auto fam = random_family(g->n(), 1, 10.0, 3);
        const double eta = decentralized_gd_step(fam.mu, fam.beta, g->sigma2_value);
        const auto alg =
            decentralize_centralized(build_gradient_descent(eta), TrackerKind::v1, *g);
        RunOptions opts;
        opts.iterations = 250;
        const auto res = run(alg, fam, Matrix::Zero(g->n(), 1), opts);
        worst = std::max(worst, diging_residual(res.signals.at("vhat"),
                                                res.signals.at("u"), g->W, eta));
    }
    report(worst <= 1e-10, "gradient-tracking identity on v1-tracker GD runs",
           "max residual " + fmt(worst));
}

// --- 3 & 4. ADMM convergence and certificate soundness ---------------------
void criteria_admm_convergence_and_soundness() {
    const GossipMatrix g = two_node_gossip();
    bool converged = true;
    bool sound = true;
    std::string detail3, detail4;
    for (double kappa : {1.0, 10.0, 100.0}) {
        const auto fam = random_family(2, 1, kappa, 13);
        const auto alg = decentralize_distributed(
            build_admm(normalize_rho(1.0, fam.mu, fam.beta)), TrackerKind::v2, g);
        RunOptions opts;
        opts.iterations = 5000;
        opts.stop_tol = 1e-10;
        const auto res = run(alg, fam, Matrix::Zero(4, 1), opts);
        const bool ok = res.gap.back() <= 1e-8 && res.consensus_error.back() <= 1e-8 &&
                        res.iterations <= 5000;
        converged = converged && ok;
        detail3 += "k=" + fmt(kappa) + ":" + std::to_string(res.iterations) + "it ";

        const auto cert = bisect_rate(known_w_admm(g, kappa, 1.0).builder(), 1e-3);
        if (!cert || !res.tau_emp) {
            sound = false;
            detail4 += "k=" + fmt(kappa) + ":missing ";
            continue;
        }
        sound = sound && (*res.tau_emp <= cert->tau + 0.02);
        detail4 += "k=" + fmt(kappa) + ":" + fmt(*res.tau_emp) + "<=" + fmt(cert->tau) +
                   "+0.02 ";
    }
    report(converged, "decentralized ADMM reaches 1e-8 within 5000 iterations", detail3);
    report(sound, "certified rate bounds the fitted empirical rate", detail4);
}

// --- 5. Known-W monotonicity ------------------------------------------------
void criterion_known_w_monotone() {
    const GossipMatrix g = two_node_gossip();
    bool ok = true;
    double prev = 0.0;
    std::string detail;
    for (double kappa : {1.0, 2.0, 5.0, 10.0, 50.0, 100.0}) {
        const auto cert = bisect_rate(known_w_admm(g, kappa, 1.0).builder(), 1e-3);
        if (!cert) {
            ok = false;
            detail += fmt(kappa) + ":none ";
            continue;
        }
        ok = ok && cert->tau < 1.0 && cert->tau >= prev - 1e-9;
        prev = cert->tau;
        detail += fmt(cert->tau) + " ";
    }
    report(ok, "known-W tau nondecreasing in kappa, all < 1", detail);
}

// --- 6. Unknown-W monotonicity ----------------------------------------------
void criterion_unknown_w_monotone() {
    bool ok = true;
    double prev = 0.0;
    std::string detail;
    for (double s2 : {0.0, 0.2, 0.5, 0.8}) {
        const auto cert = bisect_rate(unknown_w_admm(s2, 2, 10.0, 1.0).builder(), 1e-3);
        if (!cert) {
            ok = false;
            detail += "s2=" + fmt(s2) + ":no-certificate ";
            continue;
        }
        ok = ok && cert->tau >= prev - 1e-9;
        prev = cert->tau;
        detail += "s2=" + fmt(s2) + ":" + fmt(cert->tau) + " ";
    }
    report(ok, "unknown-W tau nondecreasing over sigma2 grid", detail);
    if (!ok) {
        std::printf("      note: no tau < 1 exists for this formulation at the failing\n"
                    "      points (a sigma2=0.8 instance of the algorithm itself diverges;\n"
                    "      at 0.5 the IQC class contains an unstable member), so the\n"
                    "      certified rates degrade monotonically into the uncertifiable\n"
                    "      regime. See README, \"Known limits\".\n");
    }
}

// --- 7. Conservatism ---------------------------------------------------------
void criterion_conservatism() {
    const GossipMatrix g = two_node_gossip();
    bool ok = true;
    std::string detail;
    for (double kappa : {1.0, 10.0, 100.0}) {
        const auto known = bisect_rate(known_w_admm(g, kappa, 1.0).builder(), 1e-3);
        const auto unknown = bisect_rate(unknown_w_admm(0.2, 2, kappa, 1.0).builder(), 1e-3);
        if (!known || !unknown) {
            ok = false;
            detail += "k=" + fmt(kappa) + (known ? "" : ":known-missing") +
                      (unknown ? " " : ":unknown-no-certificate ");
            continue;
        }
        ok = ok && unknown->tau >= known->tau - 1e-3;
        detail += "k=" + fmt(kappa) + ":" + fmt(unknown->tau) + ">=" + fmt(known->tau) + " ";
    }
    report(ok, "unknown-W at sigma2=0.2 at least as conservative as known-W", detail);
    if (!ok) {
        std::printf("      note: at kappa=100 the worst-case LMI is infeasible for every\n"
                    "      tau < 1 (verified through the exact equality-reduced problem),\n"
                    "      i.e. the robust analysis is more conservative than the known-W\n"
                    "      one in the strongest sense. See README, \"Known limits\".\n");
    }
}

// --- 8. Broken-variant failure ----------------------------------------------
void criterion_broken_variant() {
    const GossipMatrix g = two_node_gossip();
    ObjectiveFamily fam;
    fam.mu = 1.0;
    fam.beta = 3.0;
    fam.Q = {Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 3.0)};
    fam.a = {Vector::Constant(1, 0.0), Vector::Constant(1, 4.0)};
    fam.validate();
    Matrix init(2, 1);
    init << 0.0, 4.0;
    const double eta = decentralized_gd_step(fam.mu, fam.beta, g.sigma2_value);

    RunOptions opts;
    opts.iterations = 5000;
    const auto broken = run(build_broken_gd(eta, g), fam, init, opts);
    const double grad_sum = std::abs(grad(fam, broken.signals.at("v").back()).sum());
    const bool broken_ok =
        broken.consensus_error.back() > 1e-2 && grad_sum <= 1e-6;

    const auto fixed = run(
        decentralize_centralized(build_gradient_descent(eta), TrackerKind::v1, g), fam,
        init, opts);
    const bool fixed_ok = fixed.consensus_error.back() <= 1e-8;
    report(broken_ok && fixed_ok, "broken variant disagrees; tracked variant agrees",
           "broken cons=" + fmt(broken.consensus_error.back()) + " |sum grad|=" +
               fmt(grad_sum) + " tracked cons=" + fmt(fixed.consensus_error.back()));
}

// --- 9. SDP solver oracle equivalence ----------------------------------------
void criterion_sdp_oracle() {
    std::mt19937_64 rng(77);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_int_distribution<int> size_dist(2, 6);
    const std::vector<double> radii = {0.3, 0.45, 0.6, 0.8, 0.9, 1.1, 1.3, 1.5};
    bool ok = true;
    int checked = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const Index p = size_dist(rng);
        Matrix A(p, p);
        for (Index i = 0; i < p; ++i)
            for (Index j = 0; j < p; ++j) A(i, j) = gauss(rng);
        Eigen::EigenSolver<Matrix> es(A);
        const double radius = radii[static_cast<size_t>(trial % 8)];
        A *= radius / es.eigenvalues().cwiseAbs().maxCoeff();

        LabeledSystem G{StateSpace(A, Matrix::Zero(p, 0), Matrix::Zero(0, p),
                                   Matrix::Zero(0, 0)),
                        {}, {}, {}};
        G.states.add("x", p);
        for (double tau : {0.7, 1.0}) {
            const auto prob = assemble(G, {}, tau, "lyap");
            const auto lmi = to_lmi(prob);
            const auto res = solve(lmi);
            const bool analytic = radius < tau;
            const bool classified =
                (res.status == FeasibilityStatus::feasible) == analytic;
            bool witness_ok = true;
            if (res.status == FeasibilityStatus::feasible) {
                witness_ok = max_eigenvalue(lmi.evaluate(res.P, res.lambda)) <=
                                 -lmi.margin_tol &&
                             min_eigenvalue(res.P) >= lmi.eps_P;
            }
            ok = ok && classified && witness_ok;
            ++checked;
        }
    }
    report(ok, "SDP feasibility matches the spectral-radius rule",
           std::to_string(checked) + " cases, all witnesses re-checked");
}

// --- 10. Consensus tracking ---------------------------------------------------
void criterion_tracking() {
    std::mt19937_64 rng(99);
    std::normal_distribution<double> gauss(0.0, 1.0);
    bool ok = true;
    double worst_err = 0.0, worst_sum = 0.0;
    std::vector<GossipMatrix> graphs;
    graphs.push_back(metropolis_gossip(ring_adjacency(3)));
    graphs.push_back(metropolis_gossip(path_adjacency(3)));
    graphs.push_back(metropolis_gossip(ring_adjacency(5)));
    graphs.push_back(metropolis_gossip(complete_adjacency(5)));
    for (const auto& g : graphs) {
        if (!(g.sigma2_value <= 0.9)) {
            ok = false;
            continue;
        }
        const Index n = g.n();
        Matrix vstar(n, 1), R(n, 1);
        for (Index i = 0; i < n; ++i) {
            vstar(i, 0) = gauss(rng);
            R(i, 0) = gauss(rng);
        }
        Trajectory v;
        double decay = 1.0;
        for (int k = 0; k <= 100; ++k) {
            v.push_back(vstar + decay * R);
            decay *= 0.5;
        }
        const Matrix J = averaging_projector(n);
        for (const StateSpace& gcon : {gcon_v1(g), gcon_v2(g)}) {
            const Trajectory w = track(gcon, v);
            worst_err = std::max(worst_err, (w[100] - J * vstar).norm());
            for (size_t k = 0; k < v.size(); ++k) {
                worst_sum = std::max(
                    worst_sum,
                    (v[k].colwise().sum() - w[k].colwise().sum()).cwiseAbs().maxCoeff());
            }
        }
    }
    ok = ok && worst_err <= 1e-8 && worst_sum <= 1e-12;
    report(ok, "consensus tracking and column-sum conservation",
           "max |w100 - Jv*| " + fmt(worst_err) + ", max sum drift " + fmt(worst_sum));
}

// --- 11. Lossless dimensionality reduction -----------------------------------
void criterion_dimension_reduction() {
    const GossipMatrix g = two_node_gossip();
    bool ok = true;
    std::string detail;
    for (double kappa : {1.0, 10.0}) {
        const auto d1 = bisect_rate(known_w_admm(g, kappa, 1.0, 1).builder(), 1e-3);
        const auto d2 = bisect_rate(known_w_admm(g, kappa, 1.0, 2).builder(), 1e-3);
        if (!d1 || !d2) {
            ok = false;
            detail += "k=" + fmt(kappa) + ":missing ";
            continue;
        }
        ok = ok && std::abs(d1->tau - d2->tau) <= 1e-3 + 1e-9;
        detail += "k=" + fmt(kappa) + ":" + fmt(d1->tau) + "/" + fmt(d2->tau) + " ";
    }
    report(ok, "certified rate unchanged under d=2 lifting", detail);
}

}  // namespace

int main() {
    std::printf("decopt acceptance suite\n");
    criterion_fixed_point_transfer();
    criterion_diging();
    criteria_admm_convergence_and_soundness();
    criterion_known_w_monotone();
    criterion_unknown_w_monotone();
    criterion_conservatism();
    criterion_broken_variant();
    criterion_sdp_oracle();
    criterion_tracking();
    criterion_dimension_reduction();
    std::printf("%d of %d criteria passed\n", criterion_no - failures, criterion_no);
    return failures;
}
