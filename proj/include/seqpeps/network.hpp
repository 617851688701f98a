#pragma once

// Arrowed tensor networks: conversion between circuits and networks of
// isometric site tensors, network contraction, per-tensor isometry
// verification, and the PEPO form of a lattice unitary.

#include "seqpeps/families.hpp"
#include "seqpeps/statevector.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <stdexcept>
#include <vector>

namespace seqpeps {

constexpr std::size_t kNoIndex = std::numeric_limits<std::size_t>::max();

struct NetLeg {
    enum Kind { Physical, Bond } kind = Physical;
    std::size_t site = kNoIndex;  // Physical: lattice site index
    std::size_t bond = kNoIndex;  // Bond: index into ArrowedNetwork::bonds
};

// Directed bond: the arrow points from `from` to `to`, i.e. toward the
// orthogonality center. At the `to` tensor the bond is incoming and is part
// of the legs summed in the isometry condition.
struct NetBond {
    std::size_t from_tensor = kNoIndex, from_leg = kNoIndex;
    std::size_t to_tensor = kNoIndex, to_leg = kNoIndex;
    std::size_t dim = 0;
};

struct NetTensor {
    Tensor tensor;
    std::vector<NetLeg> legs;  // one entry per tensor leg
    Coord position;            // informational placement
};

struct ArrowedNetwork {
    int d = 2;
    std::size_t num_sites = 0;
    std::vector<NetTensor> tensors;
    std::vector<NetBond> bonds;
    std::size_t oc = 0;  // index of the orthogonality-center tensor
};

namespace detail {

// Fix one leg of a tensor to basis value 0 and drop it.
inline Tensor fix_leg_zero(const Tensor& t, std::size_t leg) {
    std::vector<std::size_t> shape;
    for (std::size_t i = 0; i < t.rank(); ++i)
        if (i != leg) shape.push_back(t.dim(i));
    if (shape.empty()) shape.push_back(1);
    Tensor out(shape);
    std::vector<std::size_t> idx(t.rank(), 0);
    const std::size_t n = out.size();
    std::vector<std::size_t> oidx(shape.size(), 0);
    for (std::size_t flat = 0; flat < n; ++flat) {
        std::size_t rem = flat;
        for (std::size_t i = shape.size(); i-- > 0;) {
            oidx[i] = rem % shape[i];
            rem /= shape[i];
        }
        std::size_t j = 0;
        for (std::size_t i = 0; i < t.rank(); ++i) idx[i] = (i == leg) ? 0 : oidx[j++];
        out.data()[flat] = t.at(idx);
    }
    return out;
}

// Reshape a d^k x d^k matrix into a rank-2k tensor with legs
// (out_0..out_{k-1}, in_0..in_{k-1}).
inline Tensor matrix_as_gate_tensor(const Tensor& m, std::size_t k, int d) {
    std::vector<std::size_t> shape(2 * k, static_cast<std::size_t>(d));
    return m.reshaped(shape);
}

}  // namespace detail

// One isometric tensor per gate: a gate's input leg on a site either
// connects to the previous gate on that site (a bond directed from the
// later gate to the earlier one) or is a fresh |0> and is fixed away; its
// output leg becomes a bond to the next gate or a physical leg. Unitarity
// restricted to the fixed inputs makes every tensor an isometry from its
// outgoing bonds into its physical plus incoming legs, with the first gate
// as orthogonality center.
inline ArrowedNetwork circuit_to_network(const Circuit& circ) {
    ArrowedNetwork net;
    net.d = circ.lattice.d;
    net.num_sites = circ.lattice.num_sites();
    std::map<std::size_t, std::pair<std::size_t, std::size_t>> last;  // site -> (tensor, leg)

    for (const auto& gate : circ.gates) {
        const std::size_t k = gate.support.size();
        Tensor t = detail::matrix_as_gate_tensor(gate.matrix, k, net.d);

        std::vector<std::size_t> site_idx(k);
        for (std::size_t i = 0; i < k; ++i) site_idx[i] = circ.lattice.site_index(gate.support[i]);

        // Drop fresh input legs (descending so positions stay valid).
        std::vector<bool> fresh(k);
        for (std::size_t i = k; i-- > 0;) {
            fresh[i] = !last.count(site_idx[i]);
            if (fresh[i]) t = detail::fix_leg_zero(t, k + i);
        }

        NetTensor nt;
        nt.tensor = std::move(t);
        nt.position = gate.support[0];
        const std::size_t me = net.tensors.size();
        for (std::size_t i = 0; i < k; ++i)
            nt.legs.push_back(NetLeg{NetLeg::Physical, site_idx[i], kNoIndex});
        std::size_t leg = k;
        for (std::size_t i = 0; i < k; ++i) {
            if (fresh[i]) continue;
            const auto [other, other_leg] = last[site_idx[i]];
            const std::size_t b = net.bonds.size();
            net.bonds.push_back({me, leg, other, other_leg, static_cast<std::size_t>(net.d)});
            net.tensors[other].legs[other_leg] = NetLeg{NetLeg::Bond, kNoIndex, b};
            nt.legs.push_back(NetLeg{NetLeg::Bond, kNoIndex, b});
            ++leg;
        }
        for (std::size_t i = 0; i < k; ++i) last[site_idx[i]] = {me, i};
        net.tensors.push_back(std::move(nt));
    }
    net.oc = 0;
    return net;
}

// Per-tensor isometry check: sum over physical plus incoming-bond legs and
// compare with the identity on the rest. The orthogonality-center tensor has
// no outgoing legs, so its condition is unit norm.
struct NetworkCheck {
    bool ok = true;
    double max_residual = 0.0;
    std::vector<IsometryResult> per_tensor;
};

inline NetworkCheck verify_network_isometries(const ArrowedNetwork& net, double tol = kUnitaryTol) {
    NetworkCheck out;
    for (std::size_t t = 0; t < net.tensors.size(); ++t) {
        std::vector<std::size_t> in_legs;
        for (std::size_t l = 0; l < net.tensors[t].legs.size(); ++l) {
            const NetLeg& leg = net.tensors[t].legs[l];
            if (leg.kind == NetLeg::Physical ||
                (net.bonds[leg.bond].to_tensor == t && net.bonds[leg.bond].to_leg == l))
                in_legs.push_back(l);
        }
        IsometryResult r;
        if (in_legs.empty()) {
            r.residual = std::abs(net.tensors[t].tensor.norm2() - 1.0);
            r.flag = r.residual <= tol;
        } else {
            r = is_isometry(net.tensors[t].tensor, in_legs, tol);
        }
        out.per_tensor.push_back(r);
        out.max_residual = std::max(out.max_residual, r.residual);
        out.ok = out.ok && r.flag;
    }
    return out;
}

// Contract the whole network to a statevector (site 0 most significant).
// Pairs of tensors are merged greedily by smallest resulting tensor.
inline StateVector contract_network(const ArrowedNetwork& net) {
    struct Piece {
        Tensor t;
        std::vector<NetLeg> legs;
        bool alive = true;
    };
    std::vector<Piece> pieces;
    for (const auto& nt : net.tensors) pieces.push_back({nt.tensor, nt.legs, true});
    std::vector<std::pair<std::size_t, std::size_t>> bond_owner(net.bonds.size());  // (piece, leg)
    auto reindex = [&]() {
        for (std::size_t p = 0; p < pieces.size(); ++p)
            if (pieces[p].alive)
                for (std::size_t l = 0; l < pieces[p].legs.size(); ++l)
                    if (pieces[p].legs[l].kind == NetLeg::Bond)
                        bond_owner[pieces[p].legs[l].bond] = {p, l};
    };

    while (true) {
        reindex();
        // candidate pairs connected by at least one bond
        std::map<std::pair<std::size_t, std::size_t>, std::size_t> shared;  // (a,b) -> shared size
        for (std::size_t b = 0; b < net.bonds.size(); ++b) {
            std::size_t pa = kNoIndex, pb = kNoIndex;
            for (std::size_t p = 0; p < pieces.size(); ++p) {
                if (!pieces[p].alive) continue;
                for (const auto& leg : pieces[p].legs)
                    if (leg.kind == NetLeg::Bond && leg.bond == b) {
                        if (pa == kNoIndex)
                            pa = p;
                        else if (p != pa)
                            pb = p;
                    }
                if (pa == p && pb == kNoIndex) continue;
            }
            if (pa != kNoIndex && pb != kNoIndex) {
                auto key = std::minmax(pa, pb);
                auto [it, inserted] = shared.emplace(std::make_pair(key.first, key.second),
                                                     std::size_t{1});
                if (!inserted) it->second *= 1;  // presence is enough; sizes computed below
            }
        }
        if (shared.empty()) break;
        std::size_t best_a = 0, best_b = 0;
        double best_cost = std::numeric_limits<double>::max();
        for (const auto& [key, unused] : shared) {
            (void)unused;
            const auto& [a, b] = key;
            double shared_sz = 1.0;
            for (const auto& la : pieces[a].legs)
                if (la.kind == NetLeg::Bond)
                    for (const auto& lb : pieces[b].legs)
                        if (lb.kind == NetLeg::Bond && la.bond == lb.bond)
                            shared_sz *= static_cast<double>(net.bonds[la.bond].dim);
            const double cost = static_cast<double>(pieces[a].t.size()) *
                                static_cast<double>(pieces[b].t.size()) / (shared_sz * shared_sz);
            if (cost < best_cost) {
                best_cost = cost;
                best_a = a;
                best_b = b;
            }
        }
        Piece& A = pieces[best_a];
        Piece& B = pieces[best_b];
        std::vector<std::pair<std::size_t, std::size_t>> pairs;
        for (std::size_t la = 0; la < A.legs.size(); ++la)
            if (A.legs[la].kind == NetLeg::Bond)
                for (std::size_t lb = 0; lb < B.legs.size(); ++lb)
                    if (B.legs[lb].kind == NetLeg::Bond && A.legs[la].bond == B.legs[lb].bond)
                        pairs.push_back({la, lb});
        Tensor merged = contract(A.t, B.t, pairs);
        std::vector<NetLeg> legs;
        for (std::size_t la = 0; la < A.legs.size(); ++la) {
            bool paired = false;
            for (const auto& [pa, pb] : pairs)
                if (pa == la) paired = true;
            if (!paired) legs.push_back(A.legs[la]);
        }
        for (std::size_t lb = 0; lb < B.legs.size(); ++lb) {
            bool paired = false;
            for (const auto& [pa, pb] : pairs)
                if (pb == lb) paired = true;
            if (!paired) legs.push_back(B.legs[lb]);
        }
        if (legs.empty()) legs.push_back(NetLeg{NetLeg::Physical, kNoIndex, kNoIndex});  // scalar
        A.t = std::move(merged);
        A.legs = std::move(legs);
        B.alive = false;
        B.t = Tensor({1});
        B.legs.clear();
    }

    // Outer-product the disconnected pieces, then order legs by site.
    Tensor total({1});
    std::vector<NetLeg> total_legs;
    bool first = true;
    for (auto& p : pieces) {
        if (!p.alive) continue;
        if (first) {
            total = std::move(p.t);
            total_legs = p.legs;
            first = false;
        } else {
            total = contract(total, p.t, {});
            for (const auto& l : p.legs) total_legs.push_back(l);
        }
    }
    // drop scalar placeholder legs
    std::vector<std::size_t> phys;
    for (std::size_t l = 0; l < total_legs.size(); ++l) {
        if (total_legs[l].kind != NetLeg::Physical)
            throw std::runtime_error("contract_network: dangling bond leg");
        if (total_legs[l].site != kNoIndex) phys.push_back(l);
    }
    std::vector<std::size_t> sites;
    for (std::size_t l : phys) sites.push_back(total_legs[l].site);
    {
        auto sorted = sites;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw std::runtime_error("contract_network: duplicate physical site");
    }
    std::vector<std::size_t> order(phys.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return sites[x] < sites[y]; });
    std::vector<std::size_t> perm;
    for (std::size_t i : order) perm.push_back(phys[i]);
    // scalar placeholder legs (dim 1, no site) go last in any order
    for (std::size_t l = 0; l < total_legs.size(); ++l)
        if (total_legs[l].site == kNoIndex) perm.push_back(l);
    const Tensor arranged = total.permuted(perm);

    StateVector sv;
    sv.d = net.d;
    sv.num_sites = phys.size();
    sv.amps = arranged.data();
    return sv;
}

// ---------------------------------------------------------------------------
// 'L' gate <-> site tensor (s = 1)

// Site tensor of a corner-flow 'L' gate: legs (k, h_out, v_out, h_in, v_in),
// an isometry from the incoming bonds into physical plus outgoing bonds.
inline Tensor tensor_from_lgate(const Tensor& u, int d) {
    const auto dd = static_cast<std::size_t>(d);
    if (u.rank() != 2 || u.dim(0) != dd * dd * dd)
        throw std::invalid_argument("tensor_from_lgate: expected a three-site gate");
    Tensor t({dd, dd, dd, dd, dd});
    for (std::size_t k = 0; k < dd; ++k)
        for (std::size_t h = 0; h < dd; ++h)
            for (std::size_t v = 0; v < dd; ++v)
                for (std::size_t hi = 0; hi < dd; ++hi)
                    for (std::size_t vi = 0; vi < dd; ++vi)
                        t.at({k, h, v, hi, vi}) =
                            u.data()[((k * dd + h) * dd + v) * (dd * dd * dd) +
                                     (hi * dd + vi) * dd];
    return t;
}

// Inverse embedding: rebuild a three-site unitary whose action on
// |h_in v_in 0> reproduces the tensor. The completion on the remaining
// inputs is the deterministic orthogonal complement.
inline Tensor lgate_from_tensor(const Tensor& t, int d) {
    const auto dd = static_cast<std::size_t>(d);
    if (t.rank() != 5) throw std::invalid_argument("lgate_from_tensor: expected a rank-5 tensor");
    const std::size_t big = dd * dd * dd;
    Matrix v = Matrix::Zero(static_cast<Eigen::Index>(big), static_cast<Eigen::Index>(dd * dd));
    for (std::size_t k = 0; k < dd; ++k)
        for (std::size_t h = 0; h < dd; ++h)
            for (std::size_t vo = 0; vo < dd; ++vo)
                for (std::size_t hi = 0; hi < dd; ++hi)
                    for (std::size_t vi = 0; vi < dd; ++vi)
                        v(static_cast<Eigen::Index>((k * dd + h) * dd + vo),
                          static_cast<Eigen::Index>(hi * dd + vi)) = t.at({k, h, vo, hi, vi});
    const Matrix full = complete_isometry(v);
    Matrix u = Matrix::Zero(static_cast<Eigen::Index>(big), static_cast<Eigen::Index>(big));
    std::vector<bool> taken(big, false);
    for (std::size_t c = 0; c < dd * dd; ++c) {
        u.col(static_cast<Eigen::Index>(c * dd)) = full.col(static_cast<Eigen::Index>(c));
        taken[c * dd] = true;
    }
    std::size_t next = dd * dd;
    for (std::size_t c = 0; c < big; ++c)
        if (!taken[c]) u.col(static_cast<Eigen::Index>(c)) = full.col(static_cast<Eigen::Index>(next++));
    return detail::matrix_to_tensor(u);
}

// ---------------------------------------------------------------------------
// SGS -> arrowed network

// Network of one tensor per site for an lp = 2 SGS: the column MPS tensors
// are right-canonical (orthogonality toward row 0), each row unitary is
// absorbed into the site to the right of its gap, the bond-only column-0
// tensor is merged into its neighbor, and the double-physical last-column
// tensor is LQ-split. All arrows point toward the (0,0) corner.
inline ArrowedNetwork sgs_to_network(const SgsSpec& spec) {
    if (spec.lp != 2) throw std::invalid_argument("sgs_to_network: only lp = 2 is supported");
    const int R = spec.rows(), C = spec.cols();
    if (R < 2 || C < 3) throw std::invalid_argument("sgs_to_network: lattice too small");
    const auto d = static_cast<std::size_t>(spec.lattice.d);

    ArrowedNetwork net;
    net.d = spec.lattice.d;
    net.num_sites = spec.lattice.num_sites();

    // Per-position tensors with legs tagged (phys site, up, down, left, right)
    struct Site {
        Tensor t;
        std::size_t phys = kNoIndex;                      // site index
        std::size_t up = kNoIndex, down = kNoIndex;       // leg positions
        std::size_t left = kNoIndex, right = kNoIndex;
    };
    std::vector<std::vector<Site>> grid(static_cast<std::size_t>(R),
                                        std::vector<Site>(static_cast<std::size_t>(C)));

    auto v_tensor = [&](int i, int j) {
        // (o1, o2, i1, i2) on sites (i,j), (i,j+1)
        return detail::matrix_to_tensor(
                   spec.v[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)])
            .reshaped({d, d, d, d});
    };
    auto a_of = [&](int i, int j) -> const Tensor& {
        return spec.a[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
    };

    for (int i = 0; i < R; ++i) {
        // merged column-0 tensor at position (i,0):
        // contract A(i,0).k with V(i,0).i1 and A(i,1).k with V(i,0).i2
        Tensor m1 = contract(a_of(i, 0), v_tensor(i, 0), {{1, 2}});  // (a0,b0, o1,o2,i2)
        Tensor m2 = contract(m1, a_of(i, 1), {{4, 1}});              // (a0,b0,o1,o2, a1,b1)
        Tensor merged = m2.permuted({0, 4, 1, 5, 2, 3});             // (a0,a1,b0,b1,o1,o2)
        const std::size_t cu = a_of(i, 0).dim(0) * a_of(i, 1).dim(0);
        const std::size_t cd = a_of(i, 0).dim(2) * a_of(i, 1).dim(2);
        merged = merged.reshaped({cu, cd, d, d});
        grid[i][0] = {std::move(merged),
                      spec.lattice.site_index({i, 0}), 0, 1, kNoIndex, 3};
        // middle positions (i,j) for j = 1..C-3 hold A(i,j+1) ∘ V(i,j)
        for (int j = 1; j + 2 < C; ++j) {
            Tensor t = contract(a_of(i, j + 1), v_tensor(i, j), {{1, 3}});  // (a,b, o1,o2,i1)
            grid[i][j] = {std::move(t), spec.lattice.site_index({i, j}), 0, 1, 4, 3};
        }
        // last two positions from the LQ split of A(i,C-1) ∘ V(i,C-2)
        Tensor t = contract(a_of(i, C - 1), v_tensor(i, C - 2), {{1, 3}});  // (a,b,o1,o2,i1)
        auto [lfac, wfac] = lq_split(t, {3});  // l: (a,b,o1,i1, bond); w: (bond, o2)
        grid[i][C - 2] = {std::move(lfac), spec.lattice.site_index({i, C - 2}), 0, 1, 3, 4};
        grid[i][C - 1] = {std::move(wfac), spec.lattice.site_index({i, C - 1}), kNoIndex, kNoIndex,
                          0, kNoIndex};
        // phys legs: merged o1 is the physical of (i,0); middle o1 of (i,j);
        // lfac o1 of (i,C-2); wfac o2 of (i,C-1)
    }

    // Flatten to the network; record leg roles.
    std::vector<std::vector<std::size_t>> tid(static_cast<std::size_t>(R),
                                              std::vector<std::size_t>(static_cast<std::size_t>(C)));
    auto phys_leg = [&](int i, int j) -> std::size_t {
        if (j == 0) return 2;
        if (j == C - 1) return 1;
        return 2;
    };
    for (int i = 0; i < R; ++i)
        for (int j = 0; j < C; ++j) {
            NetTensor nt;
            nt.tensor = grid[i][j].t;
            nt.position = {i, j};
            nt.legs.assign(nt.tensor.rank(), NetLeg{});
            nt.legs[phys_leg(i, j)] = NetLeg{NetLeg::Physical, grid[i][j].phys, kNoIndex};
            tid[i][j] = net.tensors.size();
            net.tensors.push_back(std::move(nt));
        }
    auto connect = [&](std::size_t from_t, std::size_t from_l, std::size_t to_t, std::size_t to_l,
                       std::size_t dim) {
        const std::size_t b = net.bonds.size();
        net.bonds.push_back({from_t, from_l, to_t, to_l, dim});
        net.tensors[from_t].legs[from_l] = NetLeg{NetLeg::Bond, kNoIndex, b};
        net.tensors[to_t].legs[to_l] = NetLeg{NetLeg::Bond, kNoIndex, b};
    };
    for (int i = 0; i < R; ++i)
        for (int j = 0; j < C; ++j) {
            // vertical: arrow from (i+1,j) up-leg to (i,j) down-leg
            if (i + 1 < R && grid[i][j].down != kNoIndex)
                connect(tid[i + 1][j], grid[i + 1][j].up, tid[i][j], grid[i][j].down,
                        net.tensors[tid[i][j]].tensor.dim(grid[i][j].down));
            // horizontal: arrow from (i,j+1) left-leg to (i,j) right-leg
            if (j + 1 < C && grid[i][j].right != kNoIndex)
                connect(tid[i][j + 1], grid[i][j + 1].left, tid[i][j], grid[i][j].right,
                        net.tensors[tid[i][j]].tensor.dim(grid[i][j].right));
        }
    net.oc = tid[0][0];
    return net;
}

// ---------------------------------------------------------------------------
// PEPO form of a lattice unitary

// Operator network for a unitary on an R x C grid: QR peeling first across
// rows (the row bond rides on column 0, giving a tree of vertical bonds
// (r,0)-(r+1,0) plus horizontal bonds along each row), then along columns.
// Leg orders: (r,0): (rho_up?, rho_down?, out, in, h_right?);
// (r,c>0): (h_left, out, in, h_right?).
struct Pepo {
    int rows = 0, cols = 0, d = 2;
    std::vector<std::vector<Tensor>> t;       // t[r][c]
    std::vector<std::size_t> row_bond;        // dim of rho between (r,0),(r+1,0)
    std::vector<std::vector<std::size_t>> col_bond;  // dim of h between (r,c),(r,c+1)

    std::size_t max_bond() const {
        std::size_t m = 0;
        for (auto v : row_bond) m = std::max(m, v);
        for (const auto& row : col_bond)
            for (auto v : row) m = std::max(m, v);
        return m;
    }
};

inline Pepo unitary_to_pepo(const Tensor& u, int rows, int cols, int d) {
    const auto dd = static_cast<std::size_t>(d);
    const std::size_t n = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
    std::size_t dim = 1;
    for (std::size_t i = 0; i < n; ++i) dim *= dd;
    if (u.rank() != 2 || u.dim(0) != dim || u.dim(1) != dim)
        throw std::invalid_argument("unitary_to_pepo: dimension mismatch");

    // rank-2n tensor, legs grouped per row: (out(r,:), in(r,:)) blocks
    std::vector<std::size_t> shape(2 * n, dd);
    Tensor t = u.reshaped(shape);
    std::vector<std::size_t> perm;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c)
            perm.push_back(static_cast<std::size_t>(r * cols + c));
        for (int c = 0; c < cols; ++c)
            perm.push_back(n + static_cast<std::size_t>(r * cols + c));
    }
    t = t.permuted(perm);

    Pepo pepo;
    pepo.rows = rows;
    pepo.cols = cols;
    pepo.d = d;
    pepo.t.assign(static_cast<std::size_t>(rows), std::vector<Tensor>(static_cast<std::size_t>(cols)));
    pepo.col_bond.assign(static_cast<std::size_t>(rows),
                         std::vector<std::size_t>(static_cast<std::size_t>(cols > 0 ? cols - 1 : 0), 0));

    const std::size_t block = 2 * static_cast<std::size_t>(cols);
    std::vector<Tensor> row_tensors;
    Tensor cur = std::move(t);
    bool cur_has_rho = false;
    for (int r = 0; r + 1 < rows; ++r) {
        std::vector<std::size_t> left;
        const std::size_t prefix = cur_has_rho ? 1 : 0;
        for (std::size_t i = 0; i < prefix + block; ++i) left.push_back(i);
        auto [q, rest] = svd_split(cur, left);
        pepo.row_bond.push_back(q.dim(q.rank() - 1));
        row_tensors.push_back(std::move(q));  // (rho_up?, row legs, rho_down)
        cur = std::move(rest);                // (rho, next rows...)
        cur_has_rho = true;
    }
    row_tensors.push_back(std::move(cur));  // (rho_up?, row legs)

    for (int r = 0; r < rows; ++r) {
        Tensor m = std::move(row_tensors[static_cast<std::size_t>(r)]);
        const std::size_t rho_up = (r > 0) ? 1 : 0;
        const std::size_t rho_down = (r + 1 < rows) ? 1 : 0;
        // interleave (out_c, in_c); bring trailing rho_down to the front
        std::vector<std::size_t> perm2;
        if (rho_up) perm2.push_back(0);
        if (rho_down) perm2.push_back(rho_up + block);
        for (int c = 0; c < cols; ++c) {
            perm2.push_back(rho_up + static_cast<std::size_t>(c));
            perm2.push_back(rho_up + static_cast<std::size_t>(cols + c));
        }
        m = m.permuted(perm2);  // (rhos..., out0, in0, out1, in1, ...)
        const std::size_t nrho = rho_up + rho_down;
        Tensor curm = std::move(m);
        for (int c = 0; c + 1 < cols; ++c) {
            std::vector<std::size_t> left;
            const std::size_t prefix = (c == 0) ? nrho : 1;  // rhos or h_left
            for (std::size_t i = 0; i < prefix + 2; ++i) left.push_back(i);
            auto [q, rest] = svd_split(curm, left);
            pepo.col_bond[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] =
                q.dim(q.rank() - 1);
            pepo.t[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = std::move(q);
            curm = std::move(rest);
        }
        pepo.t[static_cast<std::size_t>(r)][static_cast<std::size_t>(cols - 1)] = std::move(curm);
    }
    return pepo;
}

// Recontract a PEPO to the full matrix (for verification).
inline Tensor pepo_to_unitary(const Pepo& pepo) {
    const int rows = pepo.rows, cols = pepo.cols;
    const std::size_t block = 2 * static_cast<std::size_t>(cols);
    std::vector<Tensor> row_tensors;
    for (int r = 0; r < rows; ++r) {
        const std::size_t nrho = (r > 0 ? 1 : 0) + (r + 1 < rows ? 1 : 0);
        Tensor t = pepo.t[static_cast<std::size_t>(r)][0];
        // t: (rhos..., out0, in0, h). h is the last leg while c+1 < cols.
        for (int c = 1; c < cols; ++c) {
            const Tensor& nxt = pepo.t[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
            t = contract(t, nxt, {{t.rank() - 1, 0}});
        }
        // now t: (rhos..., out0, in0, ..., out_{C-1}, in_{C-1})
        (void)nrho;
        row_tensors.push_back(std::move(t));
    }
    // combine rows over the rho chain; rho_down of row r is its leg right
    // after rho_up, but after contraction legs reorder as (a-free, b-free)
    Tensor total = std::move(row_tensors[0]);  // (rho1, pairs0) -> rho at 0? no: (rho_down, pairs)?
    // Row 0: legs (rho_down, out/in pairs) since rho_up absent and rho_down
    // was moved to front by the builder.
    for (int r = 1; r < rows; ++r) {
        // total: (pairs..., rho_r at position block*r? ) -- rho of the next
        // contraction is always the first leg of `total` for r = 1 and sits
        // right after the accumulated pairs afterwards.
        const std::size_t rho_pos = (r == 1) ? 0 : block * static_cast<std::size_t>(r - 1);
        Tensor& nxt = row_tensors[static_cast<std::size_t>(r)];
        // nxt legs: (rho_up, [rho_down], pairs)
        total = contract(total, nxt, {{rho_pos, 0}});
        // result: (pairs_0..r-1, [rho_down], pairs_r); rho_down (if any) is
        // at position block*r, matching the formula above for the next round.
    }
    // total: (out0,in0,...,out_{N-1},in_{N-1}) in row-major site order
    const std::size_t n = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
    std::vector<std::size_t> perm;
    for (std::size_t i = 0; i < n; ++i) perm.push_back(2 * i);      // outs
    for (std::size_t i = 0; i < n; ++i) perm.push_back(2 * i + 1);  // ins
    Tensor arranged = total.permuted(perm);
    std::size_t dim = 1;
    for (std::size_t i = 0; i < n; ++i) dim *= static_cast<std::size_t>(pepo.d);
    return arranged.reshaped({dim, dim});
}

}  // namespace seqpeps
