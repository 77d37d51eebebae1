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
#ifndef DECOPT_INTERCONNECT_HPP
#define DECOPT_INTERCONNECT_HPP

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "decopt/state_space.hpp"

namespace decopt {

/// Contiguous index range inside a flat channel vector.
struct Span {
    Index offset = 0;
    Index width = 0;
};

/// Ordered name -> span table. Channel bookkeeping is done by named spans
/// everywhere; indices are only resolved at build time.
class SpanMap {
  public:
    void add(const std::string& name, Index width) {
        if (width < 0) throw std::invalid_argument("SpanMap: negative width for " + name);
        if (contains(name)) throw std::invalid_argument("SpanMap: duplicate span " + name);
        entries_.push_back({name, Span{total_, width}});
        total_ += width;
    }

    bool contains(const std::string& name) const {
        for (const auto& [n, s] : entries_)
            if (n == name) return true;
        return false;
    }

    const Span& at(const std::string& name) const {
        for (const auto& [n, s] : entries_)
            if (n == name) return s;
        throw std::out_of_range("SpanMap: unknown span '" + name + "'");
    }

    Index total() const { return total_; }

    const std::vector<std::pair<std::string, Span>>& entries() const { return entries_; }

  private:
    std::vector<std::pair<std::string, Span>> entries_;
    Index total_ = 0;
};

/// A StateSpace plus named spans over its state, input and output channels.
struct LabeledSystem {
    StateSpace sys;
    SpanMap states;
    SpanMap inputs;
    SpanMap outputs;
};

/// Reference to a signal source: an external input span (block empty) or a
/// named output port of a block.
struct PortRef {
    std::string block;
    std::string port;
};

inline PortRef ext(std::string name) { return PortRef{"", std::move(name)}; }
inline PortRef port(std::string block, std::string p) {
    return PortRef{std::move(block), std::move(p)};
}

struct PortSpan {
    std::string name;
    Index width;
};

/**
 * Exact interconnection of discrete-time linear blocks.
 *
 * Blocks expose named input/output ports; every block input port must be
 * wired exactly once, either to an external input or to some block's output
 * port of the same width. Algebraic (feedthrough) loops are closed exactly
 * through the solve of (I - D_loop); a loop matrix with smallest singular
 * value below 1e-10 of its largest is rejected as ill-posed.
 *
 * The composed state is the concatenation of block states in insertion
 * order; the result's state span map carries one span per block.
 */
class InterconnectionBuilder {
  public:
    InterconnectionBuilder& add_input(const std::string& name, Index width) {
        externals_.add(name, width);
        return *this;
    }

    InterconnectionBuilder& add_block(const std::string& name, StateSpace sys,
                                      std::vector<PortSpan> in_ports,
                                      std::vector<PortSpan> out_ports) {
        for (const auto& b : blocks_) {
            if (b.name == name) throw WiringError("duplicate block '" + name + "'");
        }
        Block blk{name, std::move(sys), SpanMap{}, SpanMap{}};
        for (const auto& p : in_ports) blk.in.add(p.name, p.width);
        for (const auto& p : out_ports) blk.out.add(p.name, p.width);
        if (blk.in.total() != blk.sys.input_dim()) {
            throw WiringError("block '" + name + "': input ports cover " +
                              std::to_string(blk.in.total()) + " channels, system has " +
                              std::to_string(blk.sys.input_dim()));
        }
        if (blk.out.total() != blk.sys.output_dim()) {
            throw WiringError("block '" + name + "': output ports cover " +
                              std::to_string(blk.out.total()) + " channels, system has " +
                              std::to_string(blk.sys.output_dim()));
        }
        blocks_.push_back(std::move(blk));
        return *this;
    }

    InterconnectionBuilder& connect(const std::string& block, const std::string& in_port,
                                    PortRef src) {
        for (const auto& [dst, s] : wires_) {
            if (dst.block == block && dst.port == in_port) {
                throw WiringError("input '" + block + "." + in_port + "' wired twice");
            }
        }
        wires_.push_back({PortRef{block, in_port}, std::move(src)});
        return *this;
    }

    /// Appends an output channel group; by default named "block.port" (or
    /// the external span name for pass-through outputs).
    InterconnectionBuilder& add_output(PortRef src, std::string name = "") {
        if (name.empty()) name = src.block.empty() ? src.port : src.block + "." + src.port;
        outputs_.push_back({std::move(src), std::move(name)});
        return *this;
    }

    LabeledSystem build() const {
        // Flatten block states / inputs / outputs.
        SpanMap state_map, blk_in_map, blk_out_map;
        for (const auto& b : blocks_) {
            state_map.add(b.name, b.sys.state_dim());
            blk_in_map.add(b.name, b.sys.input_dim());
            blk_out_map.add(b.name, b.sys.output_dim());
        }
        const Index nx = state_map.total();
        const Index nub = blk_in_map.total();
        const Index nyb = blk_out_map.total();
        const Index ne = externals_.total();

        Matrix Ab = Matrix::Zero(nx, nx), Bb = Matrix::Zero(nx, nub);
        Matrix Cb = Matrix::Zero(nyb, nx), Db = Matrix::Zero(nyb, nub);
        for (const auto& b : blocks_) {
            const Span sx = state_map.at(b.name);
            const Span su = blk_in_map.at(b.name);
            const Span sy = blk_out_map.at(b.name);
            Ab.block(sx.offset, sx.offset, sx.width, sx.width) = b.sys.A;
            Bb.block(sx.offset, su.offset, sx.width, su.width) = b.sys.B;
            Cb.block(sy.offset, sx.offset, sy.width, sx.width) = b.sys.C;
            Db.block(sy.offset, su.offset, sy.width, su.width) = b.sys.D;
        }

        // Selection matrices: stacked block inputs = Ey * (block outputs) + Ee * e.
        Matrix Ey = Matrix::Zero(nub, nyb), Ee = Matrix::Zero(nub, ne);
        std::vector<bool> wired(static_cast<size_t>(nub), false);
        for (const auto& [dst, src] : wires_) {
            const Block& blk = find_block(dst.block);
            const Span dst_span = offset_span(blk_in_map.at(dst.block), blk.in.at(dst.port));
            Span src_span;
            Matrix* target = nullptr;
            if (src.block.empty()) {
                src_span = externals_.at(src.port);
                target = &Ee;
            } else {
                const Block& sb = find_block(src.block);
                src_span = offset_span(blk_out_map.at(src.block), sb.out.at(src.port));
                target = &Ey;
            }
            if (src_span.width != dst_span.width) {
                throw WiringError("width mismatch wiring '" + dst.block + "." + dst.port +
                                  "' (" + std::to_string(dst_span.width) + ") from '" +
                                  src.port + "' (" + std::to_string(src_span.width) + ")");
            }
            for (Index i = 0; i < dst_span.width; ++i) {
                if (wired[static_cast<size_t>(dst_span.offset + i)]) {
                    throw WiringError("input '" + dst.block + "." + dst.port +
                                      "' wired twice");
                }
                wired[static_cast<size_t>(dst_span.offset + i)] = true;
                (*target)(dst_span.offset + i, src_span.offset + i) = 1.0;
            }
        }
        for (const auto& b : blocks_) {
            for (const auto& [pname, pspan] : b.in.entries()) {
                const Span global = offset_span(blk_in_map.at(b.name), pspan);
                for (Index i = 0; i < global.width; ++i) {
                    if (!wired[static_cast<size_t>(global.offset + i)]) {
                        throw WiringError("dangling input '" + b.name + "." + pname + "'");
                    }
                }
            }
        }

        // Close the algebraic loop: u_blk = (I - Ey*Db)^{-1} (Ey*Cb x + Ee e).
        Matrix Gx(nub, nx), Ge(nub, ne);
        if (nub > 0) {
            const Matrix loop = Matrix::Identity(nub, nub) - Ey * Db;
            Eigen::JacobiSVD<Matrix> svd(loop);
            const auto& sv = svd.singularValues();
            if (sv.size() == 0 || sv(0) <= 0.0 || sv(sv.size() - 1) < 1e-10 * sv(0)) {
                throw WellPosednessError(
                    "interconnection feedthrough loop is singular (ill-posed)");
            }
            Eigen::FullPivLU<Matrix> lu(loop);
            Gx = lu.solve(Ey * Cb);
            Ge = lu.solve(Ee);
        } else {
            Gx.resize(0, nx);
            Ge.resize(0, ne);
        }

        const Matrix A = Ab + Bb * Gx;
        const Matrix B = Bb * Ge;
        const Matrix Yx = Cb + Db * Gx;  // block outputs as functions of (x, e)
        const Matrix Ye = Db * Ge;

        SpanMap out_map;
        Index ny = 0;
        for (const auto& [src, name] : outputs_) {
            const Index w = src.block.empty()
                                ? externals_.at(src.port).width
                                : find_block(src.block).out.at(src.port).width;
            out_map.add(name, w);
            ny += w;
        }
        Matrix C = Matrix::Zero(ny, nx), D = Matrix::Zero(ny, ne);
        Index row = 0;
        for (const auto& [src, name] : outputs_) {
            if (src.block.empty()) {
                const Span s = externals_.at(src.port);
                D.block(row, s.offset, s.width, s.width) =
                    Matrix::Identity(s.width, s.width);
                row += s.width;
            } else {
                const Block& sb = find_block(src.block);
                const Span s = offset_span(blk_out_map.at(src.block), sb.out.at(src.port));
                C.middleRows(row, s.width) = Yx.middleRows(s.offset, s.width);
                D.middleRows(row, s.width) = Ye.middleRows(s.offset, s.width);
                row += s.width;
            }
        }

        LabeledSystem result{StateSpace(A, B, C, D), state_map, externals_, out_map};
        return result;
    }

  private:
    struct Block {
        std::string name;
        StateSpace sys;
        SpanMap in, out;
    };

    static Span offset_span(const Span& base, const Span& local) {
        return Span{base.offset + local.offset, local.width};
    }

    const Block& find_block(const std::string& name) const {
        for (const auto& b : blocks_)
            if (b.name == name) return b;
        throw WiringError("unknown block '" + name + "'");
    }

    std::vector<Block> blocks_;
    SpanMap externals_;
    std::vector<std::pair<PortRef, PortRef>> wires_;  // (dst, src)
    std::vector<std::pair<PortRef, std::string>> outputs_;
};

}  // namespace decopt

#endif  // DECOPT_INTERCONNECT_HPP
