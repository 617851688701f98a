#pragma once

// Gate orderings and schedules: radial and brickwall ordering generators,
// ASAP layerization, reverse light cones and the asymptotic depth formulas.

#include "seqpeps/lattice.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace seqpeps {

// Signed axis priority: entries are 1-based axis numbers with a sign, most
// preferred first. {+2, +1} means "horizontal first, positive first" in 2D.
using Preferred = std::vector<int>;

inline Preferred default_preferred(std::size_t q) {
    // Last axis (horizontal in 2D) first, positive direction first.
    Preferred p;
    for (std::size_t i = q; i-- > 0;) p.push_back(static_cast<int>(i) + 1);
    return p;
}

struct Ordering {
    std::vector<Coord> positions;  // anchors v_mu, pairwise distinct
    int plaquette_size = 1;
    Coord source;
    Preferred preferred;

    std::size_t size() const { return positions.size(); }
};

struct Schedule {
    std::vector<std::vector<std::size_t>> layers;  // gate indices per layer
    std::size_t depth() const { return layers.size(); }
};

namespace detail {

// Anchor displacement, wrapped to the nearest representative under PBC.
inline std::vector<int> anchor_delta(const Lattice& lat, const Coord& a, const Coord& src) {
    std::vector<int> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        int v = a[i] - src[i];
        if (lat.boundary == Boundary::Periodic) {
            const int n = lat.dims[i];
            v %= n;
            if (v < 0) v += n;
            if (2 * v > n) v -= n;
        }
        d[i] = v;
    }
    return d;
}

inline int anchor_chebyshev(const Lattice& lat, const Coord& a, const Coord& b) {
    int m = 0;
    const auto d = anchor_delta(lat, a, b);
    for (int v : d) m = std::max(m, std::abs(v));
    return m;
}

// Deterministic candidate priority: axes are visited from least preferred to
// most preferred; on each axis smaller |delta| wins, then the preferred sign.
inline std::vector<int> radial_sort_key(const std::vector<int>& delta, const Preferred& pref) {
    std::vector<int> key;
    for (std::size_t i = pref.size(); i-- > 0;) {
        const int axis = std::abs(pref[i]) - 1;
        const int sign = pref[i] >= 0 ? 1 : -1;
        const int v = delta[static_cast<std::size_t>(axis)];
        key.push_back(std::abs(v));
        key.push_back(sign * v >= 0 ? 0 : 1);
        key.push_back(sign * v >= 0 ? sign * v : -sign * v);  // final lexicographic tie-break
    }
    return key;
}

}  // namespace detail

// Radial ordering: starting from the source plaquette, grow the gate-acted
// region layer by layer. Each layer greedily takes the highest-priority
// unused anchors that touch the acted region and are pairwise disjoint, so
// the region expands ballistically with preferred-direction tie-breaking.
inline Ordering radial_ordering(const Lattice& lattice, int lp, const Coord& source,
                                Preferred preferred = {}) {
    if (lp < 1) throw std::invalid_argument("radial_ordering: L_p must be >= 1");
    if (preferred.empty()) preferred = default_preferred(lattice.q());
    if (preferred.size() != lattice.q())
        throw std::invalid_argument("radial_ordering: preferred direction rank mismatch");

    const auto anchors = lattice.plaquette_anchors(lp);
    if (std::find(anchors.begin(), anchors.end(), source) == anchors.end())
        throw std::invalid_argument("radial_ordering: source plaquette does not fit the lattice");

    // Gates overlap iff anchor Chebyshev distance <= lp - 1; for lp = 1 the
    // region instead grows by adjacency.
    const int touch = std::max(lp - 1, 1);

    Ordering ord;
    ord.plaquette_size = lp;
    ord.source = source;
    ord.preferred = preferred;

    std::set<Coord> unused(anchors.begin(), anchors.end());
    std::set<Coord> frontier;  // unused anchors within touch of an acted anchor
    const auto grow_frontier = [&](const Coord& a) {
        std::vector<int> off(lattice.q(), -touch);
        while (true) {
            Coord nb = a;
            for (std::size_t i = 0; i < lattice.q(); ++i) nb[i] += off[i];
            if (lattice.boundary == Boundary::Periodic) nb = lattice.wrap(nb);
            if (unused.count(nb)) frontier.insert(nb);
            std::size_t i = 0;
            for (; i < lattice.q(); ++i) {
                if (++off[i] <= touch) break;
                off[i] = -touch;
            }
            if (i == lattice.q()) break;
        }
    };
    ord.positions.push_back(source);
    unused.erase(source);
    grow_frontier(source);

    while (!unused.empty()) {
        struct Cand {
            std::vector<int> key;
            Coord anchor;
        };
        std::vector<Cand> cands;
        for (const auto& a : frontier)
            cands.push_back(
                {detail::radial_sort_key(detail::anchor_delta(lattice, a, source), preferred), a});
        if (cands.empty())
            throw std::runtime_error("radial_ordering: anchor grid is disconnected");
        std::sort(cands.begin(), cands.end(),
                  [](const Cand& x, const Cand& y) { return x.key < y.key; });
        std::vector<Coord> layer;
        for (const auto& c : cands) {
            bool clash = false;
            for (const auto& p : layer)
                if (detail::anchor_chebyshev(lattice, c.anchor, p) <= lp - 1) {
                    clash = true;
                    break;
                }
            if (!clash) layer.push_back(c.anchor);
        }
        for (const auto& a : layer) {
            ord.positions.push_back(a);
            unused.erase(a);
            frontier.erase(a);
        }
        for (const auto& a : layer) grow_frontier(a);
    }
    return ord;
}

// Staggered brickwall: num_sweeps non-overlapping tilings, sweep k offset by
// (k mod L_p) along every axis. Plaquettes crossing an open boundary are
// omitted.
inline Ordering brickwall_ordering(const Lattice& lattice, int lp, int num_sweeps) {
    if (lp < 1) throw std::invalid_argument("brickwall_ordering: L_p must be >= 1");
    Ordering ord;
    ord.plaquette_size = lp;
    ord.source = Coord(lattice.q(), 0);
    ord.preferred = default_preferred(lattice.q());
    for (int sweep = 0; sweep < num_sweeps; ++sweep) {
        const int offset = sweep % lp;
        std::vector<int> counts(lattice.q());
        for (std::size_t i = 0; i < lattice.q(); ++i) {
            const int n = lattice.dims[i];
            const int room = (lattice.boundary == Boundary::Open) ? n - lp - offset : n - offset;
            counts[i] = room < 0 ? 0 : room / lp + 1;
            if (lattice.boundary == Boundary::Periodic) counts[i] = n / lp;
        }
        bool empty = false;
        for (int c : counts)
            if (c == 0) empty = true;
        if (empty) continue;
        std::vector<int> it(lattice.q(), 0);
        while (true) {
            Coord a(lattice.q());
            for (std::size_t i = 0; i < lattice.q(); ++i) a[i] = offset + it[i] * lp;
            if (lattice.boundary == Boundary::Periodic) a = lattice.wrap(a);
            ord.positions.push_back(a);
            bool done = true;
            for (std::size_t i = lattice.q(); i-- > 0;) {
                if (++it[i] < counts[i]) {
                    done = false;
                    break;
                }
                it[i] = 0;
            }
            if (done) break;
        }
    }
    return ord;
}

// NOTE: brickwall sweeps repeat anchors across sweeps, so brickwall output is
// a gate list, not a valid P-PEPS ordering (positions are not distinct).

inline std::vector<std::vector<std::size_t>> supports_as_site_sets(const Lattice& lattice,
                                                                   const Ordering& ord) {
    std::vector<std::vector<std::size_t>> out;
    out.reserve(ord.positions.size());
    for (const auto& a : ord.positions) {
        const auto sites = lattice.plaquette_sites(a, ord.plaquette_size);
        if (sites.empty())
            throw std::invalid_argument("ordering contains a plaquette crossing an open boundary");
        std::vector<std::size_t> idx;
        idx.reserve(sites.size());
        for (const auto& c : sites) idx.push_back(lattice.site_index(c));
        out.push_back(std::move(idx));
    }
    return out;
}

// ASAP layerization: each gate lands in layer 1 + max layer of any earlier
// gate with intersecting support. Flattening the layers in order only
// commutes disjoint-support gates, so it is semantics-preserving.
inline Schedule layerize_supports(const std::vector<std::vector<std::size_t>>& supports) {
    Schedule sched;
    std::map<std::size_t, std::size_t> last_layer;  // site -> latest layer (1-based)
    for (std::size_t g = 0; g < supports.size(); ++g) {
        std::size_t layer = 0;
        for (std::size_t s : supports[g]) {
            auto it = last_layer.find(s);
            if (it != last_layer.end()) layer = std::max(layer, it->second);
        }
        ++layer;
        if (layer > sched.layers.size()) sched.layers.resize(layer);
        sched.layers[layer - 1].push_back(g);
        for (std::size_t s : supports[g]) last_layer[s] = layer;
    }
    return sched;
}

inline Schedule layerize(const Lattice& lattice, const Ordering& ord) {
    return layerize_supports(supports_as_site_sets(lattice, ord));
}

// Reverse light cone: iterate gates in reverse; a gate survives iff its
// support intersects the accumulated support (seeded with the targets), and
// its support is then merged in. The survivors are exactly the gates that do
// not cancel against their conjugates in <psi|O|psi>.
inline std::vector<std::size_t> reverse_light_cone(
    const std::vector<std::vector<std::size_t>>& supports,
    const std::vector<std::size_t>& target_sites) {
    std::set<std::size_t> region(target_sites.begin(), target_sites.end());
    std::vector<std::size_t> surviving;
    for (std::size_t g = supports.size(); g-- > 0;) {
        bool intersects = false;
        for (std::size_t s : supports[g])
            if (region.count(s)) {
                intersects = true;
                break;
            }
        if (intersects) {
            surviving.push_back(g);
            region.insert(supports[g].begin(), supports[g].end());
        }
    }
    std::reverse(surviving.begin(), surviving.end());
    return surviving;
}

// Accumulated site region of a reverse cone (targets plus survivors).
inline std::set<std::size_t> light_cone_region(const std::vector<std::vector<std::size_t>>& supports,
                                               const std::vector<std::size_t>& target_sites) {
    std::set<std::size_t> region(target_sites.begin(), target_sites.end());
    for (std::size_t g : reverse_light_cone(supports, target_sites))
        region.insert(supports[g].begin(), supports[g].end());
    return region;
}

enum class DepthFamily { RpPeps, IsoTns };

// Asymptotic circuit-depth predictions. For radial plaquette circuits with
// preferred axis order (a1, a2, ...) the depth is n_{a1} + L_p n_{a2} + ...;
// the isometric 'L'-gate circuits take sum(n_i) regardless of L_p.
inline std::size_t depth_formula(const Lattice& lattice, int lp, DepthFamily family,
                                 Preferred preferred = {}) {
    if (preferred.empty()) preferred = default_preferred(lattice.q());
    if (family == DepthFamily::IsoTns) {
        std::size_t t = 0;
        for (int n : lattice.dims) t += static_cast<std::size_t>(n);
        return t;
    }
    std::size_t t = 0, factor = 1;
    for (int p : preferred) {
        const int axis = std::abs(p) - 1;
        t += factor * static_cast<std::size_t>(lattice.dims[static_cast<std::size_t>(axis)]);
        factor *= static_cast<std::size_t>(lp);
    }
    return t;
}

}  // namespace seqpeps
