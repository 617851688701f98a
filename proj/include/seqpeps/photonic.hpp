#pragma once

// Photonic source-array protocols: a row of m sources, each with a memory
// register A_j and an emitter register E_j, generates the 2D states
// photon-by-photon. Emitted photons are appended to the state in row-major
// site order, so the photonic output can be compared directly against the
// circuit simulation.

#include "seqpeps/circuit.hpp"
#include "seqpeps/statevector.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace seqpeps {

struct PhotonicOp {
    enum Kind { Unitary, Emit, Swap } kind = Unitary;
    std::vector<std::size_t> regs;  // register ids (never photons)
};

// Dense state over the 2m source registers plus the growing photon train.
// Register ids: A_j = j, E_j = m + j; photons live past the registers and
// are only ever written once, by emit().
struct SourceArray {
    int d = 2;
    std::size_t m = 0;
    std::size_t num_photons = 0;
    std::vector<cplx> amps;
    std::vector<PhotonicOp> log;

    static SourceArray init(std::size_t m, int d) {
        SourceArray s;
        s.d = d;
        s.m = m;
        std::size_t dim = 1;
        for (std::size_t i = 0; i < 2 * m; ++i) dim *= static_cast<std::size_t>(d);
        s.amps.assign(dim, cplx(0.0, 0.0));
        s.amps[0] = cplx(1.0, 0.0);
        return s;
    }

    std::size_t num_slots() const { return 2 * m + num_photons; }

    std::size_t a_reg(std::size_t j) const { return j; }
    std::size_t e_reg(std::size_t j) const { return m + j; }

    // Apply a unitary to the listed registers (first listed most significant).
    void apply(const Matrix& u, const std::vector<std::size_t>& regs) {
        for (std::size_t r : regs)
            if (r >= 2 * m) throw std::invalid_argument("SourceArray: unitaries act on registers only");
        const auto dd = static_cast<std::size_t>(d);
        const std::size_t k = regs.size();
        std::size_t dk = 1;
        for (std::size_t i = 0; i < k; ++i) dk *= dd;
        if (static_cast<std::size_t>(u.rows()) != dk)
            throw std::invalid_argument("SourceArray: matrix dimension mismatch");
        std::vector<std::size_t> stride(k);
        for (std::size_t i = 0; i < k; ++i) {
            std::size_t s = 1;
            for (std::size_t j = regs[i] + 1; j < num_slots(); ++j) s *= dd;
            stride[i] = s;
        }
        std::vector<std::size_t> offsets(dk);
        for (std::size_t p = 0; p < dk; ++p) {
            std::size_t off = 0, rem = p;
            for (std::size_t i = k; i-- > 0;) {
                off += (rem % dd) * stride[i];
                rem /= dd;
            }
            offsets[p] = off;
        }
        std::vector<std::size_t> other_strides;
        for (std::size_t slot = 0; slot < num_slots(); ++slot) {
            bool on = false;
            for (std::size_t r : regs)
                if (r == slot) on = true;
            if (!on) {
                std::size_t s = 1;
                for (std::size_t j = slot + 1; j < num_slots(); ++j) s *= dd;
                other_strides.push_back(s);
            }
        }
        std::vector<cplx> in(dk), out(dk);
        const std::size_t num_bases = amps.size() / dk;
        for (std::size_t b = 0; b < num_bases; ++b) {
            std::size_t base = 0, rem = b;
            for (std::size_t i = other_strides.size(); i-- > 0;) {
                base += (rem % dd) * other_strides[i];
                rem /= dd;
            }
            for (std::size_t p = 0; p < dk; ++p) in[p] = amps[base + offsets[p]];
            for (std::size_t p = 0; p < dk; ++p) {
                cplx acc(0.0, 0.0);
                for (std::size_t q = 0; q < dk; ++q)
                    acc += u(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) * in[q];
                out[p] = acc;
            }
            for (std::size_t p = 0; p < dk; ++p) amps[base + offsets[p]] = out[p];
        }
        log.push_back({PhotonicOp::Unitary, regs});
    }

    // Emission isometry |k>_E -> |0>_E |k>_photon: moves the emitter content
    // into a fresh photon slot appended at the end of the train.
    void emit(std::size_t j) {
        const auto dd = static_cast<std::size_t>(d);
        const std::size_t e = e_reg(j);
        std::size_t e_stride = 1;
        for (std::size_t i = e + 1; i < num_slots(); ++i) e_stride *= dd;
        std::vector<cplx> next(amps.size() * dd, cplx(0.0, 0.0));
        for (std::size_t idx = 0; idx < amps.size(); ++idx) {
            const std::size_t k = (idx / e_stride) % dd;
            const std::size_t base = idx - k * e_stride;  // E_j zeroed
            next[base * dd + k] = amps[idx];
        }
        amps = std::move(next);
        ++num_photons;
        log.push_back({PhotonicOp::Emit, {e}});
    }

    void swap_ae(std::size_t j) {
        const auto dd = static_cast<std::size_t>(d);
        Matrix s = Matrix::Zero(static_cast<Eigen::Index>(dd * dd), static_cast<Eigen::Index>(dd * dd));
        for (std::size_t x = 0; x < dd; ++x)
            for (std::size_t y = 0; y < dd; ++y)
                s(static_cast<Eigen::Index>(y * dd + x), static_cast<Eigen::Index>(x * dd + y)) = 1.0;
        apply(s, {a_reg(j), e_reg(j)});
        log.back().kind = PhotonicOp::Swap;
    }

    // Norm deficit of the registers-all-zero sector: zero when the sources
    // are fully disentangled from the photon train.
    double disentangle_deficit() const {
        const auto dd = static_cast<std::size_t>(d);
        std::size_t photon_dim = 1;
        for (std::size_t i = 0; i < num_photons; ++i) photon_dim *= dd;
        double kept = 0.0;
        for (std::size_t p = 0; p < photon_dim; ++p) kept += std::norm(amps[p]);
        return 1.0 - kept;
    }

    // Photon-train state (registers projected to zero, unnormalized).
    StateVector photon_state() const {
        const auto dd = static_cast<std::size_t>(d);
        std::size_t photon_dim = 1;
        for (std::size_t i = 0; i < num_photons; ++i) photon_dim *= dd;
        StateVector sv;
        sv.d = d;
        sv.num_sites = num_photons;
        sv.amps.assign(amps.begin(), amps.begin() + static_cast<std::ptrdiff_t>(photon_dim));
        return sv;
    }
};

namespace detail {

// Rebuild a gate matrix over a register list: input/output values of the
// circuit's sites are routed to possibly different registers. in_pos[s] and
// out_pos[s] give the position, within the register list, holding site s's
// input and output respectively.
inline Matrix route_gate(const Tensor& u, const std::vector<std::size_t>& in_pos,
                         const std::vector<std::size_t>& out_pos, std::size_t k, int d) {
    const auto dd = static_cast<std::size_t>(d);
    std::size_t dk = 1;
    for (std::size_t i = 0; i < k; ++i) dk *= dd;
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(dk), static_cast<Eigen::Index>(dk));
    std::vector<std::size_t> digp(k), digq(k);
    for (std::size_t p = 0; p < dk; ++p) {
        std::size_t rem = p;
        for (std::size_t i = k; i-- > 0;) {
            digp[i] = rem % dd;
            rem /= dd;
        }
        for (std::size_t q = 0; q < dk; ++q) {
            rem = q;
            for (std::size_t i = k; i-- > 0;) {
                digq[i] = rem % dd;
                rem /= dd;
            }
            std::size_t r = 0, c = 0;
            for (std::size_t s = 0; s < k; ++s) {
                r = r * dd + digp[out_pos[s]];
                c = c * dd + digq[in_pos[s]];
            }
            out(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) =
                u.data()[r * dk + c];
        }
    }
    return out;
}

inline const Gate& gate_at(const std::map<Coord, const Gate*>& by_anchor, const Coord& a) {
    auto it = by_anchor.find(a);
    if (it == by_anchor.end())
        throw std::invalid_argument("photonic protocol: missing gate at " + coord_to_string(a));
    return *it->second;
}

inline std::map<Coord, const Gate*> index_by_first_site(const Circuit& circ) {
    std::map<Coord, const Gate*> by_anchor;
    for (const auto& g : circ.gates) by_anchor[g.support[0]] = &g;
    return by_anchor;
}

}  // namespace detail

struct PhotonicResult {
    StateVector photons;  // row-major site order, unnormalized
    double deficit = 0.0;
    std::size_t photon_count = 0;
    std::vector<PhotonicOp> log;
};

// Plaquette-circuit protocol (2D, lp = 2): one source per lattice column.
// Each plaquette row sweep consumes the memory row, emits the finished row
// of photons, and leaves the next row in memory; a final swap-and-emit round
// releases the last row.
inline PhotonicResult run_plaquette_protocol(const Circuit& circ) {
    const Lattice& lat = circ.lattice;
    if (lat.q() != 2 || circ.params.lp != 2 || lat.boundary != Boundary::Open)
        throw std::invalid_argument("run_plaquette_protocol: 2D open lattice with lp = 2 required");
    const int R = lat.dims[0], C = lat.dims[1];
    auto by_anchor = detail::index_by_first_site(circ);
    SourceArray s = SourceArray::init(static_cast<std::size_t>(C), lat.d);

    for (int i = 0; i + 1 < R; ++i) {
        for (int j = 0; j + 1 < C; ++j) {
            const Gate& g = detail::gate_at(by_anchor, {i, j});
            const auto ju = static_cast<std::size_t>(j);
            // site order (i,j), (i,j+1), (i+1,j), (i+1,j+1)
            std::vector<std::size_t> regs, in_pos, out_pos;
            if (j == 0)
                regs = {s.a_reg(0), s.a_reg(1), s.e_reg(0), s.e_reg(1)};
            else
                regs = {s.e_reg(ju), s.a_reg(ju + 1), s.a_reg(ju), s.e_reg(ju + 1)};
            auto pos_of = [&](std::size_t reg) {
                for (std::size_t p = 0; p < regs.size(); ++p)
                    if (regs[p] == reg) return p;
                throw std::logic_error("register not in list");
            };
            in_pos = {0, 1, 2, 3};
            out_pos = {pos_of(s.e_reg(ju)), pos_of(s.e_reg(ju + 1)), pos_of(s.a_reg(ju)),
                       pos_of(s.a_reg(ju + 1))};
            s.apply(detail::route_gate(g.matrix, in_pos, out_pos, 4, lat.d), regs);
            s.emit(ju);
            if (j + 2 == C) s.emit(ju + 1);
        }
    }
    for (int j = 0; j < C; ++j) {
        s.swap_ae(static_cast<std::size_t>(j));
        s.emit(static_cast<std::size_t>(j));
    }
    return {s.photon_state(), s.disentangle_deficit(), s.num_photons, s.log};
}

namespace detail {

// Shared row sweep for the 'L'-gate protocols: gate (i,j) reads its
// horizontal bond from E_j, its vertical bond from A_j and a fresh |0> from
// E_{j+1}; it writes the physical to E_j (emitted), the horizontal bond to
// E_{j+1} and the vertical bond to A_j.
inline void lgate_step(SourceArray& s, const Gate& g, int j, int d) {
    const auto ju = static_cast<std::size_t>(j);
    const std::vector<std::size_t> regs = {s.e_reg(ju), s.a_reg(ju), s.e_reg(ju + 1)};
    const std::vector<std::size_t> in_pos = {0, 1, 2};
    const std::vector<std::size_t> out_pos = {0, 2, 1};
    s.apply(route_gate(g.matrix, in_pos, out_pos, 3, d), regs);
    s.emit(ju);
}

inline PhotonicResult finish_rows(SourceArray& s, int C) {
    // Bottom row: site (R-1,0) sits in E_0 (or is |0> there), then the
    // memories A_0..A_{C-2} hold sites (R-1,1..C-1).
    s.emit(0);
    for (int j = 0; j + 1 < C; ++j) {
        s.swap_ae(static_cast<std::size_t>(j));
        s.emit(static_cast<std::size_t>(j));
    }
    return {s.photon_state(), s.disentangle_deficit(), s.num_photons, s.log};
}

}  // namespace detail

// Corner-flow isometric circuit on photons (2D, s = 1), gates taken in
// row-major order (which is causally valid for the corner flow). The last
// gate of each row already finishes site (i,C-1) in E_{C-1} (the circuit
// merges the far column into the column C-2 gates), so the row ends with a
// plain emission; the bottom row runs entirely on the memories, swapping
// each finished site out for emission.
inline PhotonicResult run_lgate_protocol(const Circuit& circ) {
    const Lattice& lat = circ.lattice;
    if (lat.q() != 2 || circ.params.s != 1 || lat.boundary != Boundary::Open)
        throw std::invalid_argument("run_lgate_protocol: 2D open lattice with s = 1 required");
    const int R = lat.dims[0], C = lat.dims[1];
    auto by_anchor = detail::index_by_first_site(circ);
    SourceArray s = SourceArray::init(static_cast<std::size_t>(C), lat.d);
    for (int i = 0; i + 1 < R; ++i) {
        for (int j = 0; j + 1 < C; ++j)
            detail::lgate_step(s, detail::gate_at(by_anchor, {i, j}), j, lat.d);
        // site (i,C-1) is complete in E_{C-1}
        s.emit(static_cast<std::size_t>(C - 1));
    }
    // bottom row: site (R-1,0) is fresh in E_0; sites (R-1,1..C-1) sit in
    // A_0..A_{C-2}
    const Gate& g0 = detail::gate_at(by_anchor, {R - 1, 0});
    s.apply(detail::route_gate(g0.matrix, {0, 1}, {0, 1}, 2, lat.d), {s.e_reg(0), s.a_reg(0)});
    s.emit(0);
    for (int j = 1; j + 1 < C; ++j) {
        const auto ju = static_cast<std::size_t>(j);
        const Gate& g = detail::gate_at(by_anchor, {R - 1, j});
        s.apply(detail::route_gate(g.matrix, {0, 1}, {0, 1}, 2, lat.d),
                {s.a_reg(ju - 1), s.a_reg(ju)});
        s.swap_ae(ju - 1);
        s.emit(ju - 1);
    }
    s.swap_ae(static_cast<std::size_t>(C - 2));
    s.emit(static_cast<std::size_t>(C - 2));
    return {s.photon_state(), s.disentangle_deficit(), s.num_photons, s.log};
}

// Fully sequential circuit on photons: same row sweeps, but the row-boundary
// gate hands the wrap bond to E_0, where the next row's first gate consumes
// it, so a single pass needs no extra memory.
inline PhotonicResult run_fpeps_protocol(const Circuit& circ) {
    const Lattice& lat = circ.lattice;
    if (lat.q() != 2 || circ.family != Family::FPeps)
        throw std::invalid_argument("run_fpeps_protocol: fully sequential 2D circuit required");
    const int R = lat.dims[0], C = lat.dims[1];
    auto by_anchor = detail::index_by_first_site(circ);
    SourceArray s = SourceArray::init(static_cast<std::size_t>(C), lat.d);
    for (int i = 0; i + 1 < R; ++i) {
        for (int j = 0; j + 1 < C; ++j)
            detail::lgate_step(s, detail::gate_at(by_anchor, {i, j}), j, lat.d);
        // boundary gate on sites (i,C-1), (i+1,0): in/out both (E_{C-1}, E_0)
        const Gate& b = detail::gate_at(by_anchor, {i, C - 1});
        s.apply(detail::route_gate(b.matrix, {0, 1}, {0, 1}, 2, lat.d),
                {s.e_reg(static_cast<std::size_t>(C - 1)), s.e_reg(0)});
        s.emit(static_cast<std::size_t>(C - 1));
    }
    return detail::finish_rows(s, C);
}

// Single-source sequential matrix-product generation: each step applies a
// two-register gate to (A_0, E_0) with E_0 fresh, then emits; a final
// swap-and-emit releases the remaining bond.
inline PhotonicResult run_mps_protocol(const std::vector<Matrix>& gates, int d) {
    SourceArray s = SourceArray::init(1, d);
    for (const auto& g : gates) {
        s.apply(g, {s.a_reg(0), s.e_reg(0)});
        s.emit(0);
    }
    s.swap_ae(0);
    s.emit(0);
    return {s.photon_state(), s.disentangle_deficit(), s.num_photons, s.log};
}

// Structural check on a protocol trace: unitaries and swaps touch only the
// 2m source registers; each photon is written exactly once (by its emit).
inline bool photons_untouched(const std::vector<PhotonicOp>& log, std::size_t m) {
    for (const auto& op : log)
        for (std::size_t r : op.regs)
            if (r >= 2 * m) return false;
    return true;
}

}  // namespace seqpeps
