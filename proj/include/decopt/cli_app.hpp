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
#ifndef DECOPT_CLI_APP_HPP
#define DECOPT_CLI_APP_HPP

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "decopt/iqc.hpp"
#include "decopt/simulator.hpp"

namespace decopt::cli {

// Exit codes: 0 success, 1 config error, 2 divergence, 3 no certificate.
constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitDivergence = 2;
constexpr int kExitNoCertificate = 3;

struct GraphOptions {
    std::string builtin = "complete";  // ring | path | complete
    Index n = 2;
    std::string edge_file;

    GossipMatrix build() const {
        if (!edge_file.empty()) {
            std::ifstream in(edge_file);
            if (!in) throw std::invalid_argument("graph-file: cannot open '" + edge_file + "'");
            return metropolis_gossip(adjacency_from_edge_list(in));
        }
        if (builtin == "ring") return metropolis_gossip(ring_adjacency(n));
        if (builtin == "path") return metropolis_gossip(path_adjacency(n));
        if (builtin == "complete") return metropolis_gossip(complete_adjacency(n));
        throw std::invalid_argument("graph: unknown builtin '" + builtin + "'");
    }
};

namespace detail {

inline std::ostream& open_sink(std::ofstream& file, const std::string& path) {
    if (path.empty()) return std::cout;
    file.open(path);
    if (!file) throw std::invalid_argument("out: cannot open '" + path + "'");
    return file;
}

inline nlohmann::json certificate_json(const RateCertificate& cert) {
    nlohmann::json j;
    j["tau"] = cert.tau;
    // Eigen stores column-major; emit row-major as documented.
    std::vector<double> p_rowmajor;
    p_rowmajor.reserve(static_cast<size_t>(cert.P.size()));
    for (Index i = 0; i < cert.P.rows(); ++i)
        for (Index j2 = 0; j2 < cert.P.cols(); ++j2) p_rowmajor.push_back(cert.P(i, j2));
    j["P"] = p_rowmajor;
    j["P_rows"] = cert.P.rows();
    j["lambda"] = std::vector<double>(cert.lambda.data(), cert.lambda.data() + cert.lambda.size());
    j["margin"] = cert.margin;
    j["problem"] = cert.fingerprint;
    return j;
}

inline std::vector<double> parse_grid(const std::string& csv) {
    std::vector<double> grid;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        grid.push_back(std::stod(tok));
    }
    return grid;
}

}  // namespace detail

struct SimulateConfig {
    std::string alg = "gd";      // gd | admm | broken-gd
    std::string tracker = "auto";  // v1 | v2 | auto
    GraphOptions graph;
    double kappa = 0.0;
    Index d = 1;
    double rho0 = 1.0;
    double eta = 0.0;  // 0 -> default step
    unsigned seed = 1;
    Index iters = 5000;
    double stop_tol = 0.0;
    std::string out;

    std::string echo() const {
        std::ostringstream os;
        os << "simulate alg=" << alg << " tracker=" << tracker << " graph="
           << (graph.edge_file.empty() ? graph.builtin : graph.edge_file) << " n=" << graph.n
           << " kappa=" << kappa << " d=" << d << " rho0=" << rho0 << " eta=" << eta
           << " seed=" << seed << " iters=" << iters;
        return os.str();
    }
};

inline int cmd_simulate(const SimulateConfig& cfg) {
    const GossipMatrix g = cfg.graph.build();
    const ObjectiveFamily fam = random_family(g.n(), cfg.d, cfg.kappa, cfg.seed);

    TrackerKind tracker = TrackerKind::v1;
    if (cfg.tracker == "v2") tracker = TrackerKind::v2;
    else if (cfg.tracker == "auto" && cfg.alg == "admm") tracker = TrackerKind::v2;
    else if (cfg.tracker != "v1" && cfg.tracker != "auto")
        throw std::invalid_argument("tracker: must be v1 or v2");

    DecentralizedAlgorithm alg;
    if (cfg.alg == "gd") {
        const double eta = cfg.eta > 0.0
                               ? cfg.eta
                               : decentralized_gd_step(fam.mu, fam.beta, g.sigma2_value);
        alg = decentralize_centralized(build_gradient_descent(eta), tracker, g);
    } else if (cfg.alg == "admm") {
        alg = decentralize_distributed(build_admm(normalize_rho(cfg.rho0, fam.mu, fam.beta)),
                                       tracker, g);
    } else if (cfg.alg == "broken-gd") {
        const double eta = cfg.eta > 0.0
                               ? cfg.eta
                               : decentralized_gd_step(fam.mu, fam.beta, g.sigma2_value);
        alg = build_broken_gd(eta, g);
    } else {
        throw std::invalid_argument("alg: must be gd, admm or broken-gd");
    }

    RunOptions opts;
    opts.iterations = cfg.iters;
    opts.stop_tol = cfg.stop_tol;
    const RunResult result =
        run(alg, fam, Matrix::Zero(alg.base_state_width, fam.d()), opts);

    std::ofstream file;
    std::ostream& os = detail::open_sink(file, cfg.out);
    write_csv(result, os, cfg.echo());

    const bool consensus_failed = result.consensus_error.back() > 1e-6;
    std::cerr << "iterations=" << result.iterations << " gap=" << result.gap.back()
              << " consensus_error=" << result.consensus_error.back() << " tau_emp="
              << (result.tau_emp ? std::to_string(*result.tau_emp) : std::string("exact"))
              << (consensus_failed ? " CONSENSUS-FAILED" : "") << "\n";
    return kExitOk;
}

struct CertifyConfig {
    std::string mode = "known-w";  // known-w | unknown-w
    GraphOptions graph;
    double sigma2 = -1.0;
    Index n = 2;
    double kappa = 0.0;
    double rho0 = 1.0;
    double tol = 1e-3;
    Index d = 1;
    std::string out;       // certificate JSON
    std::string csv_path;  // optional sweep-style CSV row append

    std::string echo() const {
        std::ostringstream os;
        os << "certify mode=" << mode;
        if (mode == "known-w")
            os << " graph=" << (graph.edge_file.empty() ? graph.builtin : graph.edge_file)
               << " n=" << graph.n;
        else
            os << " sigma2=" << sigma2 << " n=" << n;
        os << " kappa=" << kappa << " rho0=" << rho0 << " tol=" << tol << " d=" << d;
        return os.str();
    }
};

inline std::function<AnalysisProblem(double)> certify_builder(const CertifyConfig& cfg) {
    if (cfg.mode == "known-w") {
        const GossipMatrix g = cfg.graph.build();
        return known_w_admm(g, cfg.kappa, cfg.rho0, cfg.d).builder();
    }
    if (cfg.mode == "unknown-w") {
        if (cfg.sigma2 < 0.0)
            throw std::invalid_argument("sigma2: required for unknown-w mode");
        return unknown_w_admm(cfg.sigma2, cfg.n, cfg.kappa, cfg.rho0, cfg.d).builder();
    }
    throw std::invalid_argument("mode: must be known-w or unknown-w");
}

inline int cmd_certify(const CertifyConfig& cfg) {
    const auto builder = certify_builder(cfg);
    const std::optional<RateCertificate> cert = bisect_rate(builder, cfg.tol);
    if (!cert) {
        std::cerr << "no certificate below tau = 1 (" << cfg.echo() << ")\n";
        return kExitNoCertificate;
    }
    std::ofstream file;
    std::ostream& os = detail::open_sink(file, cfg.out);
    os << detail::certificate_json(*cert).dump(2) << "\n";
    if (!cfg.csv_path.empty()) {
        std::ofstream csv(cfg.csv_path, std::ios::app);
        if (!csv) throw std::invalid_argument("csv: cannot open '" + cfg.csv_path + "'");
        csv.precision(17);
        csv << (cfg.mode == "known-w" ? cfg.kappa : cfg.sigma2) << ',' << cert->tau << "\n";
    }
    std::cerr << "tau=" << cert->tau << " margin=" << cert->margin << "\n";
    return kExitOk;
}

struct SweepConfig {
    CertifyConfig base;
    std::string kappa_grid;
    std::string sigma2_grid;
    bool simulate = false;  // empirical cross-check (known-w only)
    unsigned seed = 1;
    Index iters = 5000;
    Index jobs = 1;
    std::string out;

    std::string echo() const {
        std::ostringstream os;
        os << "sweep mode=" << base.mode << " kappa=" << base.kappa << " rho0=" << base.rho0
           << " tol=" << base.tol;
        if (!kappa_grid.empty()) os << " kappa_grid=" << kappa_grid;
        if (!sigma2_grid.empty()) os << " sigma2_grid=" << sigma2_grid;
        if (base.mode == "known-w")
            os << " graph=" << (base.graph.edge_file.empty() ? base.graph.builtin
                                                             : base.graph.edge_file)
               << " n=" << base.graph.n;
        else
            os << " n=" << base.n;
        os << " simulate=" << (simulate ? 1 : 0) << " seed=" << seed;
        return os.str();
    }
};

inline int cmd_sweep(const SweepConfig& cfg) {
    const bool over_kappa = !cfg.kappa_grid.empty();
    if (over_kappa == !cfg.sigma2_grid.empty())
        throw std::invalid_argument("sweep: give exactly one of --kappa-grid / --sigma2-grid");
    std::vector<double> grid =
        detail::parse_grid(over_kappa ? cfg.kappa_grid : cfg.sigma2_grid);
    if (grid.empty()) throw std::invalid_argument("sweep: empty grid");
    std::sort(grid.begin(), grid.end());

    struct Row {
        double param = 0.0;
        std::optional<double> tau;
        std::optional<double> tau_emp;
        double wall_s = 0.0;
    };
    std::vector<Row> rows(grid.size());

    auto run_point = [&](size_t idx) {
        const auto t0 = std::chrono::steady_clock::now();
        Row row;
        row.param = grid[idx];
        CertifyConfig point = cfg.base;
        if (over_kappa) point.kappa = grid[idx];
        else point.sigma2 = grid[idx];
        const auto cert = bisect_rate(certify_builder(point), point.tol);
        if (cert) row.tau = cert->tau;
        if (cfg.simulate && point.mode == "known-w") {
            const GossipMatrix g = point.graph.build();
            const ObjectiveFamily fam = random_family(g.n(), 1, point.kappa, cfg.seed);
            auto alg = decentralize_distributed(
                build_admm(normalize_rho(point.rho0, fam.mu, fam.beta)), TrackerKind::v2, g);
            RunOptions opts;
            opts.iterations = cfg.iters;
            opts.stop_tol = 1e-10;
            const RunResult res =
                run(alg, fam, Matrix::Zero(alg.base_state_width, 1), opts);
            row.tau_emp = res.tau_emp;
        }
        row.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        rows[idx] = row;
    };

    const size_t jobs = std::max<Index>(1, cfg.jobs);
    if (jobs == 1) {
        for (size_t i = 0; i < grid.size(); ++i) run_point(i);
    } else {
        std::vector<std::thread> pool;
        std::atomic<size_t> next{0};
        for (size_t t = 0; t < std::min(jobs, grid.size()); ++t) {
            pool.emplace_back([&]() {
                for (size_t i = next.fetch_add(1); i < grid.size(); i = next.fetch_add(1))
                    run_point(i);
            });
        }
        for (auto& th : pool) th.join();
    }

    std::ofstream file;
    std::ostream& os = detail::open_sink(file, cfg.out);
    os << "# " << cfg.echo() << "\n";
    os << (over_kappa ? "kappa" : "sigma2") << ",tau,tau_emp,wall_s\n";
    os.precision(17);
    for (const Row& row : rows) {
        os << row.param << ',';
        if (row.tau) os << *row.tau;
        os << ',';
        if (row.tau_emp) os << *row.tau_emp;
        os << ',' << row.wall_s << "\n";
    }
    return kExitOk;
}

/// Full CLI; separated from main() so integration tests can invoke it
/// in-process with synthetic argv.
inline int run_cli(int argc, const char* const* argv) {
    CLI::App app{
        "decopt: build, simulate and certify decentralized consensus-optimization "
        "algorithms.\n"
        "CSV outputs start with one '#' config line; bodies are deterministic for\n"
        "identical configs (the sweep wall_s column is informative only).\n"
        "Exit codes: 0 ok, 1 config error, 2 divergence, 3 no certificate."};
    app.require_subcommand(1);

    SimulateConfig sim;
    CLI::App* s = app.add_subcommand("simulate", "run a composed algorithm on a random family");
    s->add_option("--alg", sim.alg, "gd | admm | broken-gd")->required();
    s->add_option("--tracker", sim.tracker, "v1 | v2 (default: v1, v2 for admm)");
    s->add_option("--graph", sim.graph.builtin, "ring | path | complete");
    s->add_option("--n", sim.graph.n, "node count for builtin graphs");
    s->add_option("--graph-file", sim.graph.edge_file, "edge list: one 'i j' pair per line, 0-indexed");
    s->add_option("--kappa", sim.kappa, "condition number (mu=1, beta=kappa)")->required();
    s->add_option("--d", sim.d, "local variable dimension");
    s->add_option("--rho0", sim.rho0, "ADMM penalty factor, rho = rho0 sqrt(mu beta)");
    s->add_option("--eta", sim.eta, "GD step (default: conservative stable step)");
    s->add_option("--seed", sim.seed, "family seed");
    s->add_option("--iters", sim.iters, "iteration budget");
    s->add_option("--stop-tol", sim.stop_tol, "early stop when gap and consensus error fall below");
    s->add_option("--out", sim.out, "CSV path (default stdout)");

    CertifyConfig cert;
    CLI::App* c = app.add_subcommand("certify", "certify a linear rate via IQC/LMI bisection");
    c->add_option("--mode", cert.mode, "known-w | unknown-w")->required();
    c->add_option("--graph", cert.graph.builtin, "ring | path | complete (known-w)");
    c->add_option("--n", cert.n, "node count");
    c->add_option("--graph-file", cert.graph.edge_file, "edge list path (known-w)");
    c->add_option("--sigma2", cert.sigma2, "spectral gap bound (unknown-w)")
        ->check(CLI::Range(0.0, 0.999999));
    c->add_option("--kappa", cert.kappa, "condition number")->required();
    c->add_option("--rho0", cert.rho0, "ADMM penalty factor");
    c->add_option("--tol", cert.tol, "bisection resolution");
    c->add_option("--d", cert.d, "certify the d-lifted problem");
    c->add_option("--out", cert.out, "certificate JSON path (default stdout)");
    c->add_option("--csv", cert.csv_path, "append a 'param,tau' row to this CSV");

    SweepConfig sweep;
    CLI::App* w = app.add_subcommand("sweep", "certify over a parameter grid, emit CSV");
    w->add_option("--mode", sweep.base.mode, "known-w | unknown-w")->required();
    w->add_option("--graph", sweep.base.graph.builtin, "ring | path | complete (known-w)");
    w->add_option("--n", sweep.base.n, "node count (unknown-w)");
    w->add_option("--graph-n", sweep.base.graph.n, "node count for builtin graphs (known-w)");
    w->add_option("--graph-file", sweep.base.graph.edge_file, "edge list path (known-w)");
    w->add_option("--kappa", sweep.base.kappa, "condition number (fixed when sweeping sigma2)");
    w->add_option("--rho0", sweep.base.rho0, "ADMM penalty factor");
    w->add_option("--tol", sweep.base.tol, "bisection resolution");
    w->add_option("--kappa-grid", sweep.kappa_grid, "comma-separated kappa values");
    w->add_option("--sigma2-grid", sweep.sigma2_grid, "comma-separated sigma2 values");
    w->add_flag("--simulate", sweep.simulate, "add empirical-rate cross-check column (known-w)");
    w->add_option("--seed", sweep.seed, "family seed for --simulate");
    w->add_option("--iters", sweep.iters, "simulation budget for --simulate");
    w->add_option("--jobs", sweep.jobs, "max concurrent grid points");
    w->add_option("--out", sweep.out, "CSV path (default stdout)");

    try {
        app.parse(argc, argv);
        if (s->parsed()) return cmd_simulate(sim);
        if (c->parsed()) {
            if (cert.mode == "unknown-w" && cert.sigma2 < 0.0)
                throw std::invalid_argument("sigma2: required for unknown-w mode");
            cert.graph.n = cert.n;  // one --n serves both modes
            return cmd_certify(cert);
        }
        if (w->parsed()) return cmd_sweep(sweep);
        return kExitConfig;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    } catch (const DivergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDivergence;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}

}  // namespace decopt::cli

#endif  // DECOPT_CLI_APP_HPP
