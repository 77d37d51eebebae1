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
#include <doctest.h>

#include "decopt/interconnect.hpp"
#include "decopt/state_space.hpp"
#include "test_helpers.hpp"

using namespace decopt;
using decopt::testing::max_abs_diff;

namespace {

StateSpace scalar_integrator() {
    return StateSpace(Matrix::Identity(1, 1), Matrix::Identity(1, 1),
                      Matrix::Identity(1, 1), Matrix::Zero(1, 1));
}

}  // namespace

TEST_CASE("StateSpace construction and validation") {
    SUBCASE("scalar integrator is valid") {
        StateSpace ss = scalar_integrator();
        CHECK(ss.state_dim() == 1);
        CHECK(ss.input_dim() == 1);
        CHECK(ss.output_dim() == 1);
    }
    SUBCASE("dimension mismatches name the offending block") {
        const Matrix A = Matrix::Identity(2, 2);
        CHECK_THROWS_WITH_AS(StateSpace(A, Matrix::Zero(1, 1), Matrix::Zero(1, 2),
                                        Matrix::Zero(1, 1)),
                             doctest::Contains("B has"), std::invalid_argument);
        CHECK_THROWS_WITH_AS(StateSpace(A, Matrix::Zero(2, 1), Matrix::Zero(1, 3),
                                        Matrix::Zero(1, 1)),
                             doctest::Contains("C has"), std::invalid_argument);
        CHECK_THROWS_WITH_AS(StateSpace(A, Matrix::Zero(2, 1), Matrix::Zero(1, 2),
                                        Matrix::Zero(2, 2)),
                             doctest::Contains("D is"), std::invalid_argument);
        Matrix bad = Matrix::Zero(2, 2);
        bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
        CHECK_THROWS_AS(StateSpace(bad, Matrix::Zero(2, 1), Matrix::Zero(1, 2),
                                   Matrix::Zero(1, 1)),
                        std::invalid_argument);
    }
}

TEST_CASE("step") {
    SUBCASE("identity feedthrough returns the input") {
        StateSpace ss(Matrix::Zero(1, 1), Matrix::Zero(1, 2), Matrix::Zero(2, 1),
                      Matrix::Identity(2, 2));
        Matrix u(2, 3);
        u << 1, 2, 3, 4, 5, 6;
        auto [x1, y] = step(ss, Matrix::Zero(1, 3), u);
        CHECK(max_abs_diff(y, u) == 0.0);
    }
    SUBCASE("scalar integrator accumulates 0,1,2,3") {
        StateSpace ss = scalar_integrator();
        Matrix x = Matrix::Zero(1, 1);
        std::vector<double> states = {x(0, 0)};
        for (int k = 0; k < 3; ++k) {
            auto [xn, y] = step(ss, x, Matrix::Identity(1, 1));
            x = xn;
            states.push_back(x(0, 0));
        }
        CHECK(states == std::vector<double>{0, 1, 2, 3});
    }
    SUBCASE("tracker realization driven by constant input gives W^k v") {
        const GossipMatrix g = testing::two_node_gossip();
        // zeta' = W zeta + (W - I) v, w = zeta + v  realizes w[k] = W^k v for
        // constant v; unrolled by hand for k <= 3.
        StateSpace gcon(g.W, g.W - Matrix::Identity(2, 2), Matrix::Identity(2, 2),
                        Matrix::Identity(2, 2));
        Matrix v(2, 1);
        v << 1.0, -2.0;
        Matrix zeta = Matrix::Zero(2, 1);
        Matrix expected = v;
        for (int k = 0; k <= 3; ++k) {
            auto [zn, w] = step(gcon, zeta, v);
            CHECK(max_abs_diff(w, expected) < 1e-14);
            zeta = zn;
            expected = g.W * expected;
        }
    }
    SUBCASE("shape mismatch throws") {
        StateSpace ss = scalar_integrator();
        CHECK_THROWS_AS(step(ss, Matrix::Zero(2, 1), Matrix::Zero(1, 1)),
                        std::invalid_argument);
        CHECK_THROWS_AS(step(ss, Matrix::Zero(1, 1), Matrix::Zero(1, 2)),
                        std::invalid_argument);
    }
}

TEST_CASE("interconnect") {
    SUBCASE("series of two scalar integrators matches the hand composition") {
        InterconnectionBuilder ib;
        ib.add_input("u", 1);
        ib.add_block("s1", scalar_integrator(), {{"in", 1}}, {{"out", 1}});
        ib.add_block("s2", scalar_integrator(), {{"in", 1}}, {{"out", 1}});
        ib.connect("s1", "in", ext("u"));
        ib.connect("s2", "in", port("s1", "out"));
        ib.add_output(port("s2", "out"));
        const LabeledSystem sys = ib.build();
        Matrix A(2, 2), B(2, 1), C(1, 2);
        A << 1, 0, 1, 1;
        B << 1, 0;
        C << 0, 1;
        CHECK(max_abs_diff(sys.sys.A, A) == 0.0);
        CHECK(max_abs_diff(sys.sys.B, B) == 0.0);
        CHECK(max_abs_diff(sys.sys.C, C) == 0.0);
        CHECK(sys.sys.D(0, 0) == 0.0);
    }

    SUBCASE("series with an identity-feedthrough block leaves matrices unchanged") {
        InterconnectionBuilder ib;
        ib.add_input("u", 1);
        ib.add_block("s1", scalar_integrator(), {{"in", 1}}, {{"out", 1}});
        ib.add_block("id", static_gain(Matrix::Identity(1, 1)), {{"in", 1}}, {{"out", 1}});
        ib.connect("s1", "in", ext("u"));
        ib.connect("id", "in", port("s1", "out"));
        ib.add_output(port("id", "out"));
        const LabeledSystem sys = ib.build();
        CHECK(max_abs_diff(sys.sys.A, Matrix::Identity(1, 1)) == 0.0);
        CHECK(max_abs_diff(sys.sys.B, Matrix::Identity(1, 1)) == 0.0);
        CHECK(max_abs_diff(sys.sys.C, Matrix::Identity(1, 1)) == 0.0);
        CHECK(sys.sys.D(0, 0) == 0.0);
    }

    SUBCASE("associative in effect on random trajectories") {
        std::mt19937_64 rng(11);
        auto rnd_sys = [&](Index nx, Index nu, Index ny) {
            Matrix A = testing::random_matrix(nx, nx, rng, 0.4);
            return StateSpace(A, testing::random_matrix(nx, nu, rng),
                              testing::random_matrix(ny, nx, rng),
                              testing::random_matrix(ny, nu, rng, 0.2));
        };
        const StateSpace s1 = rnd_sys(2, 1, 2);
        const StateSpace s2 = rnd_sys(3, 2, 1);
        const StateSpace s3 = rnd_sys(1, 1, 1);

        // Chain u -> s1 -> s2 -> s3, composed two ways.
        auto chain_all = [&]() {
            InterconnectionBuilder ib;
            ib.add_input("u", 1);
            ib.add_block("a", s1, {{"in", 1}}, {{"out", 2}});
            ib.add_block("b", s2, {{"in", 2}}, {{"out", 1}});
            ib.add_block("c", s3, {{"in", 1}}, {{"out", 1}});
            ib.connect("a", "in", ext("u"));
            ib.connect("b", "in", port("a", "out"));
            ib.connect("c", "in", port("b", "out"));
            ib.add_output(port("c", "out"));
            return ib.build().sys;
        };
        auto chain_nested = [&]() {
            InterconnectionBuilder inner;
            inner.add_input("u", 1);
            inner.add_block("a", s1, {{"in", 1}}, {{"out", 2}});
            inner.add_block("b", s2, {{"in", 2}}, {{"out", 1}});
            inner.connect("a", "in", ext("u"));
            inner.connect("b", "in", port("a", "out"));
            inner.add_output(port("b", "out"));
            const StateSpace ab = inner.build().sys;
            InterconnectionBuilder outer;
            outer.add_input("u", 1);
            outer.add_block("ab", ab, {{"in", 1}}, {{"out", 1}});
            outer.add_block("c", s3, {{"in", 1}}, {{"out", 1}});
            outer.connect("ab", "in", ext("u"));
            outer.connect("c", "in", port("ab", "out"));
            outer.add_output(port("c", "out"));
            return outer.build().sys;
        };
        const StateSpace all = chain_all();
        const StateSpace nested = chain_nested();
        const Trajectory inputs = testing::random_trajectory(25, 1, 1, rng);
        const auto ya = simulate(all, Matrix::Zero(all.state_dim(), 1), inputs).outputs;
        const auto yb = simulate(nested, Matrix::Zero(nested.state_dim(), 1), inputs).outputs;
        for (size_t k = 0; k < inputs.size(); ++k) CHECK(max_abs_diff(ya[k], yb[k]) < 1e-12);
    }

    SUBCASE("direct feedback of a D=1 block onto itself is ill-posed") {
        InterconnectionBuilder ib;
        ib.add_block("loop", static_gain(Matrix::Identity(1, 1)), {{"in", 1}}, {{"out", 1}});
        ib.connect("loop", "in", port("loop", "out"));
        ib.add_output(port("loop", "out"));
        CHECK_THROWS_AS(ib.build(), WellPosednessError);
    }

    SUBCASE("a solvable algebraic loop is closed exactly") {
        // y = 0.5 y + u  =>  y = 2u.
        InterconnectionBuilder ib;
        ib.add_input("u", 1);
        ib.add_block("gain", static_gain(Matrix::Constant(1, 2, 0.5)),
                     {{"fb", 1}, {"in", 1}}, {{"out", 1}});
        ib.connect("gain", "fb", port("gain", "out"));
        ib.connect("gain", "in", ext("u"));
        ib.add_output(port("gain", "out"));
        const LabeledSystem sys = ib.build();
        CHECK(sys.sys.D(0, 0) == doctest::Approx(2.0 * 0.5).epsilon(1e-12));
    }

    SUBCASE("dangling input is a wiring error") {
        InterconnectionBuilder ib;
        ib.add_input("u", 1);
        ib.add_block("s1", scalar_integrator(), {{"in", 1}}, {{"out", 1}});
        ib.add_output(port("s1", "out"));
        CHECK_THROWS_WITH_AS(ib.build(), doctest::Contains("dangling"), WiringError);
    }

    SUBCASE("double wiring is rejected") {
        InterconnectionBuilder ib;
        ib.add_input("u", 1);
        ib.add_block("s1", scalar_integrator(), {{"in", 1}}, {{"out", 1}});
        ib.connect("s1", "in", ext("u"));
        CHECK_THROWS_AS(ib.connect("s1", "in", ext("u")), WiringError);
    }

    SUBCASE("external inputs can pass through to outputs") {
        InterconnectionBuilder ib;
        ib.add_input("u", 2);
        ib.add_block("s1", static_gain(2.0 * Matrix::Identity(2, 2)), {{"in", 2}},
                     {{"out", 2}});
        ib.connect("s1", "in", ext("u"));
        ib.add_output(port("s1", "out"));
        ib.add_output(ext("u"));
        const LabeledSystem sys = ib.build();
        CHECK(sys.outputs.at("u").offset == 2);
        Matrix expected(4, 2);
        expected << 2, 0, 0, 2, 1, 0, 0, 1;
        CHECK(max_abs_diff(sys.sys.D, expected) == 0.0);
    }
}

TEST_CASE("lift_dimension") {
    std::mt19937_64 rng(5);
    const StateSpace ss(testing::random_matrix(2, 2, rng, 0.5), testing::random_matrix(2, 1, rng),
                        testing::random_matrix(1, 2, rng), testing::random_matrix(1, 1, rng));
    SUBCASE("d=1 returns identical matrices") {
        const StateSpace same = lift_dimension(ss, 1);
        CHECK(max_abs_diff(same.A, ss.A) == 0.0);
        CHECK(max_abs_diff(same.D, ss.D) == 0.0);
    }
    SUBCASE("scalar blocks become diagonal blocks") {
        StateSpace s(Matrix::Constant(1, 1, 3.0), Matrix::Constant(1, 1, -1.0),
                     Matrix::Constant(1, 1, 2.0), Matrix::Constant(1, 1, 0.5));
        const StateSpace lifted = lift_dimension(s, 2);
        CHECK(max_abs_diff(lifted.A, 3.0 * Matrix::Identity(2, 2)) == 0.0);
        CHECK(max_abs_diff(lifted.B, -1.0 * Matrix::Identity(2, 2)) == 0.0);
        CHECK(max_abs_diff(lifted.C, 2.0 * Matrix::Identity(2, 2)) == 0.0);
        CHECK(max_abs_diff(lifted.D, 0.5 * Matrix::Identity(2, 2)) == 0.0);
    }
    SUBCASE("lifted simulation equals per-column simulations") {
        const Index d = 3;
        const StateSpace lifted = lift_dimension(ss, d);
        const Trajectory cols = testing::random_trajectory(20, 1, d, rng);
        // Interleaved input for the lifted system: channel c coordinate j.
        Trajectory lifted_in;
        for (const Matrix& u : cols) {
            Matrix ul(d, 1);
            for (Index j = 0; j < d; ++j) ul(j, 0) = u(0, j);
            lifted_in.push_back(ul);
        }
        const auto ylift = simulate(lifted, Matrix::Zero(2 * d, 1), lifted_in).outputs;
        for (Index j = 0; j < d; ++j) {
            Trajectory column_in;
            for (const Matrix& u : cols) column_in.push_back(u.col(j));
            const auto ycol = simulate(ss, Matrix::Zero(2, 1), column_in).outputs;
            for (size_t k = 0; k < column_in.size(); ++k) {
                CHECK(std::abs(ylift[k](j, 0) - ycol[k](0, 0)) < 1e-14);
            }
        }
    }
    SUBCASE("d < 1 is rejected") { CHECK_THROWS_AS(lift_dimension(ss, 0), std::invalid_argument); }
}

TEST_CASE("is_steady_state") {
    StateSpace integ = scalar_integrator();
    CHECK(is_steady_state(integ, Matrix::Constant(1, 1, 5.0), Matrix::Zero(1, 1), 1e-12));
    CHECK_FALSE(is_steady_state(integ, Matrix::Constant(1, 1, 5.0),
                                Matrix::Constant(1, 1, 1.0), 1e-12));
}
