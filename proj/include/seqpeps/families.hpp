#pragma once

// Circuit builders for the sequential state families: plaquette circuits
// (P-PEPS / RP-PEPS), isometric 'L'-gate circuits with corner or bulk
// orthogonality center, string-gate states (SGS), the fully sequential
// 'F' circuit, plaquette embeddings and the cluster-state circuit.

#include "seqpeps/circuit.hpp"
#include "seqpeps/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <vector>

namespace seqpeps {

namespace detail {

inline std::size_t ipow(std::size_t b, std::size_t e) {
    std::size_t r = 1;
    while (e--) r *= b;
    return r;
}

// Embed a matrix acting on a subset of sites into a larger site list.
// positions[i] is the index (within the new list) of the i-th original site;
// the first original site is most significant in u, the first new site is
// most significant in the result.
inline Matrix embed_matrix(const Matrix& u, const std::vector<std::size_t>& positions,
                           std::size_t num_sites, int d) {
    const auto dd = static_cast<std::size_t>(d);
    const std::size_t big = ipow(dd, num_sites);
    const std::size_t small = static_cast<std::size_t>(u.rows());
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(big), static_cast<Eigen::Index>(big));
    std::vector<std::size_t> digp(num_sites), digq(num_sites);
    for (std::size_t p = 0; p < big; ++p) {
        std::size_t rem = p;
        for (std::size_t i = num_sites; i-- > 0;) {
            digp[i] = rem % dd;
            rem /= dd;
        }
        for (std::size_t q = 0; q < big; ++q) {
            rem = q;
            for (std::size_t i = num_sites; i-- > 0;) {
                digq[i] = rem % dd;
                rem /= dd;
            }
            bool extras_match = true;
            for (std::size_t i = 0; i < num_sites; ++i) {
                bool on = false;
                for (std::size_t pos : positions)
                    if (pos == i) on = true;
                if (!on && digp[i] != digq[i]) {
                    extras_match = false;
                    break;
                }
            }
            if (!extras_match) continue;
            std::size_t r = 0, c = 0;
            for (std::size_t pos : positions) {
                r = r * dd + digp[pos];
                c = c * dd + digq[pos];
            }
            if (r < small && c < small)
                out(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) =
                    u(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
        }
    }
    return out;
}

inline Tensor matrix_to_tensor(const Matrix& m) {
    Tensor t({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())});
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            t.data()[static_cast<std::size_t>(r) * static_cast<std::size_t>(m.cols()) +
                     static_cast<std::size_t>(c)] = m(r, c);
    return t;
}

inline Matrix tensor_to_matrix(const Tensor& t) {
    Matrix m(static_cast<Eigen::Index>(t.dim(0)), static_cast<Eigen::Index>(t.dim(1)));
    for (std::size_t r = 0; r < t.dim(0); ++r)
        for (std::size_t c = 0; c < t.dim(1); ++c)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = t.data()[r * t.dim(1) + c];
    return m;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Plaquette circuits

// One Haar-random plaquette unitary per ordering position, seeded by anchor
// coordinate so circuits that differ only in gate order share their matrices.
inline Circuit plaquette_circuit(const Lattice& lattice, const Ordering& ord, std::uint64_t seed,
                                 Family family) {
    Circuit c;
    c.lattice = lattice;
    c.family = family;
    c.params.lp = ord.plaquette_size;
    c.params.source = ord.source;
    c.params.preferred = ord.preferred;
    const std::size_t dim =
        detail::ipow(static_cast<std::size_t>(lattice.d),
                     detail::ipow(static_cast<std::size_t>(ord.plaquette_size), lattice.q()));
    for (const auto& a : ord.positions) {
        const auto sites = lattice.plaquette_sites(a, ord.plaquette_size);
        if (sites.empty())
            throw std::invalid_argument("plaquette_circuit: plaquette crosses an open boundary");
        c.gates.push_back(Gate(random_unitary(dim, anchor_seed(seed, a)), sites, GateKind::Plaquette));
    }
    return c;
}

// P-PEPS with the canonical row-major ordering.
inline Ordering row_major_ordering(const Lattice& lattice, int lp) {
    Ordering ord;
    ord.plaquette_size = lp;
    ord.positions = lattice.plaquette_anchors(lp);
    ord.source = ord.positions.empty() ? Coord(lattice.q(), 0) : ord.positions.front();
    ord.preferred = default_preferred(lattice.q());
    return ord;
}

inline Circuit build_ppeps(const Lattice& lattice, int lp, std::uint64_t seed) {
    return plaquette_circuit(lattice, row_major_ordering(lattice, lp), seed, Family::PPeps);
}

inline Circuit build_rppeps(const Lattice& lattice, int lp, const Coord& source, std::uint64_t seed,
                            Preferred preferred = {}) {
    return plaquette_circuit(lattice, radial_ordering(lattice, lp, source, preferred), seed,
                             Family::RpPeps);
}

// Validity of a plaquette gate sequence: anchors pairwise distinct, every
// plaquette fits the lattice, and each gate after the first overlaps the
// region already acted on (connected growth).
inline bool valid_plaquette_ordering(const Lattice& lattice, const Ordering& ord,
                                     std::string* why = nullptr) {
    std::set<Coord> seen;
    std::set<std::size_t> region;
    for (std::size_t g = 0; g < ord.positions.size(); ++g) {
        const auto& a = ord.positions[g];
        if (!seen.insert(a).second) {
            if (why) *why = "duplicate plaquette position " + coord_to_string(a);
            return false;
        }
        const auto sites = lattice.plaquette_sites(a, ord.plaquette_size);
        if (sites.empty()) {
            if (why) *why = "plaquette " + coord_to_string(a) + " crosses an open boundary";
            return false;
        }
        std::vector<std::size_t> idx;
        for (const auto& s : sites) idx.push_back(lattice.site_index(s));
        if (g > 0) {
            bool touches = false;
            for (std::size_t s : idx)
                if (region.count(s)) touches = true;
            if (!touches) {
                if (why) *why = "plaquette " + coord_to_string(a) + " is disconnected from the region";
                return false;
            }
        }
        region.insert(idx.begin(), idx.end());
    }
    return true;
}

// ---------------------------------------------------------------------------
// Isometric 'L'-gate circuits

// Support of the corner-OC 'L' gate. 2D, general s: a horizontal run
// (i, j..j+s) followed by a vertical run (i+1..i+s, j+s). Higher dimensions
// (s = 1): the staircase chain a, a+e_q, a+e_{q-1}+e_q, ...
// Staircase gate support for the isometric-network circuits, clipped at the
// open boundary: a horizontal run of s + 1 sites followed by a vertical run
// of s sites hanging off its right end (in higher dimensions, one extra site
// per axis along a diagonal staircase). Gates anchored at a boundary lose
// the runs that would leave the lattice, down to a single site in the far
// corner.
inline std::vector<Coord> lgate_support(const Lattice& lattice, const Coord& a, int s) {
    const std::size_t q = lattice.q();
    std::vector<Coord> sup;
    if (q == 2) {
        const int jmax = std::min(a[1] + s, lattice.dims[1] - 1);
        const int imax = std::min(a[0] + s, lattice.dims[0] - 1);
        for (int j = a[1]; j <= jmax; ++j) sup.push_back({a[0], j});
        for (int i = a[0] + 1; i <= imax; ++i) sup.push_back({i, jmax});
        return sup;
    }
    if (s != 1) throw std::invalid_argument("lgate_support: s > 1 is only supported in 2D");
    Coord c = a;
    sup.push_back(c);
    for (std::size_t axis = q; axis-- > 0;) {
        Coord next = c;
        next[axis] += 1;
        if (!lattice.contains(next)) continue;
        c = next;
        sup.push_back(c);
    }
    return sup;
}

// Corner-OC isometric circuit: gates ordered by ascending wavefront
// (sum of anchor coordinates). Anchors are restricted so that the staircase
// never clips except along axis 0: the far columns are absorbed into the
// neighbouring gates' supports (the boundary merge), which keeps the ASAP
// depth at ~sum(n_i). Separate far-boundary gates would chain with the
// adjacent column's gates and double the depth per row.
inline Circuit build_isotns_corner(const Lattice& lattice, int s, std::uint64_t seed) {
    if (lattice.boundary != Boundary::Open)
        throw std::invalid_argument("build_isotns_corner: open boundaries required");
    if (s < 1) throw std::invalid_argument("build_isotns_corner: s must be >= 1");
    const std::size_t q = lattice.q();
    if (q != 2 && s != 1)
        throw std::invalid_argument("build_isotns_corner: s > 1 is only supported in 2D");

    // keep only anchors whose staircase fits along every axis but axis 0
    std::vector<Coord> anchors;
    for (std::size_t site = 0; site < lattice.num_sites(); ++site) {
        const Coord a = lattice.coord_of(site);
        bool ok = true;
        for (std::size_t axis = 1; axis < q; ++axis) {
            const int span = (q == 2 && axis == 1) ? s : 1;
            if (a[axis] + span > lattice.dims[axis] - 1) ok = false;
        }
        if (ok) anchors.push_back(a);
    }
    std::stable_sort(anchors.begin(), anchors.end(), [](const Coord& x, const Coord& y) {
        int sx = 0, sy = 0;
        for (int v : x) sx += v;
        for (int v : y) sy += v;
        if (sx != sy) return sx < sy;
        return x < y;
    });

    Circuit c;
    c.lattice = lattice;
    c.family = Family::IsoTns;
    c.params.s = s;
    c.params.bond_dim = static_cast<int>(detail::ipow(static_cast<std::size_t>(lattice.d),
                                                      static_cast<std::size_t>(s)));
    c.params.source = Coord(q, 0);
    for (const auto& a : anchors) {
        const auto sup = lgate_support(lattice, a, s);
        const std::size_t dim = detail::ipow(static_cast<std::size_t>(lattice.d), sup.size());
        c.gates.push_back(Gate(random_unitary(dim, anchor_seed(seed, a)), sup, GateKind::LShaped));
    }
    // for q >= 3 the restricted anchors miss some far-boundary edges; prepare
    // those sites with sequential two-site chains along axis 0 (the chains
    // share no sites with the staircase gates, so they add O(n_0) depth)
    std::set<Coord> covered;
    for (const auto& g : c.gates)
        for (const auto& site : g.support) covered.insert(site);
    for (std::size_t site = 0; site < lattice.num_sites(); ++site) {
        const Coord x = lattice.coord_of(site);
        if (covered.count(x)) continue;
        Coord below = x;
        below[0] += 1;
        std::vector<Coord> sup{x};
        if (lattice.contains(below) && !covered.count(below)) sup.push_back(below);
        const std::size_t dim = detail::ipow(static_cast<std::size_t>(lattice.d), sup.size());
        c.gates.push_back(Gate(random_unitary(dim, anchor_seed(seed, x)), sup, GateKind::Custom));
        covered.insert(x);
    }
    return c;
}

// Bulk-OC isometric circuit (2D, s = 1). Gates radiate outward from the
// orthogonality center (r, c) in ascending Manhattan rank; every producer of
// a gate's inputs sits at rank - 1, so this order is causally valid and the
// depth is max |i-r| + |j-c| + 1 < corner depth.
inline Circuit build_isotns_bulk(const Lattice& lattice, const Coord& oc, std::uint64_t seed) {
    if (lattice.q() != 2) throw std::invalid_argument("build_isotns_bulk: 2D only");
    if (lattice.boundary != Boundary::Open)
        throw std::invalid_argument("build_isotns_bulk: open boundaries required");
    const int R = lattice.dims[0], C = lattice.dims[1];
    const int r = oc[0], c = oc[1];
    if (r <= 0 || r >= R - 1 || c <= 0 || c >= C - 1)
        throw std::invalid_argument("build_isotns_bulk: center must be in the bulk");

    struct Entry {
        int rank;
        Coord home;
        std::vector<Coord> sup;
    };
    std::vector<Entry> entries;
    // center gate
    entries.push_back({0, {r, c}, {{r, c}, {r, c + 1}, {r, c - 1}, {r + 1, c}, {r - 1, c}}});
    // row hypersurface
    for (int j = 0; j < C; ++j) {
        if (j == c) continue;
        const int sj = j > c ? 1 : -1;
        if (j + sj < 0 || j + sj >= C) continue;
        entries.push_back({std::abs(j - c),
                           {r, j},
                           {{r, j}, {r, j + sj}, {r - 1, j + sj}, {r + 1, j + sj}}});
    }
    // column hypersurface
    for (int i = 0; i < R; ++i) {
        if (i == r) continue;
        const int si = i > r ? 1 : -1;
        if (i + si < 0 || i + si >= R) continue;
        entries.push_back({std::abs(i - r),
                           {i, c},
                           {{i, c}, {i + si, c}, {i, c - 1}, {i, c + 1}}});
    }
    // bulk
    for (int i = 0; i < R; ++i) {
        if (i == r) continue;
        const int si = i > r ? 1 : -1;
        if (i + si < 0 || i + si >= R) continue;
        for (int j = 0; j < C; ++j) {
            if (j == c) continue;
            const int sj = j > c ? 1 : -1;
            if (j + sj < 0 || j + sj >= C) continue;
            entries.push_back({std::abs(i - r) + std::abs(j - c),
                               {i, j},
                               {{i, j}, {i, j + sj}, {i + si, j + sj}}});
        }
    }
    std::stable_sort(entries.begin(), entries.end(), [](const Entry& x, const Entry& y) {
        if (x.rank != y.rank) return x.rank < y.rank;
        return x.home < y.home;
    });

    Circuit circ;
    circ.lattice = lattice;
    circ.family = Family::IsoTns;
    circ.params.s = 1;
    circ.params.bond_dim = lattice.d;
    circ.params.source = oc;
    for (const auto& e : entries) {
        const std::size_t dim = detail::ipow(static_cast<std::size_t>(lattice.d), e.sup.size());
        circ.gates.push_back(
            Gate(random_unitary(dim, anchor_seed(seed, e.home)), e.sup, GateKind::LShaped));
    }
    return circ;
}

// ---------------------------------------------------------------------------
// Fully sequential 'F' circuit (2D, s = 1)

// One long chain: each row is swept left to right with 'L' gates, and a
// two-site boundary gate hands the running bond to the start of the next
// row, so the depth equals the gate count (R-1)*C.
inline Circuit build_fpeps(const Lattice& lattice, std::uint64_t seed) {
    if (lattice.q() != 2) throw std::invalid_argument("build_fpeps: 2D only");
    if (lattice.boundary != Boundary::Open)
        throw std::invalid_argument("build_fpeps: open boundaries required");
    const int R = lattice.dims[0], C = lattice.dims[1];
    if (R < 2 || C < 2) throw std::invalid_argument("build_fpeps: lattice too small");
    Circuit circ;
    circ.lattice = lattice;
    circ.family = Family::FPeps;
    circ.params.s = 1;
    circ.params.bond_dim = lattice.d;
    const std::size_t d3 = detail::ipow(static_cast<std::size_t>(lattice.d), 3);
    const std::size_t d2 = detail::ipow(static_cast<std::size_t>(lattice.d), 2);
    for (int i = 0; i + 1 < R; ++i) {
        for (int j = 0; j + 1 < C; ++j) {
            const Coord a{i, j};
            circ.gates.push_back(Gate(random_unitary(d3, anchor_seed(seed, a)),
                                      {{i, j}, {i, j + 1}, {i + 1, j + 1}}, GateKind::LShaped));
        }
        const Coord a{i, C - 1};
        circ.gates.push_back(Gate(random_unitary(d2, anchor_seed(seed, a)),
                                  {{i, C - 1}, {i + 1, 0}}, GateKind::Custom));
    }
    return circ;
}

// ---------------------------------------------------------------------------
// String-gate states

// Per-column canonical MPS tensors plus a single layer of row unitaries.
// a[j][i] has legs (alpha, k, beta) with bond dims chi_i -> chi_{i+1},
// chi_i = min(d^i, d^(lp-1), d^(R-i)); v[i][j] is a d^2 x d^2 unitary on
// sites (i,j),(i,j+1).
struct SgsSpec {
    Lattice lattice;  // 2D open
    int lp = 2;
    std::vector<std::vector<Tensor>> a;  // a[column][row]
    std::vector<std::vector<Matrix>> v;  // v[row][gap]

    int rows() const { return lattice.dims[0]; }
    int cols() const { return lattice.dims[1]; }

    int chi(int i) const {
        const double lo = std::min({static_cast<double>(i), static_cast<double>(lp - 1),
                                    static_cast<double>(rows() - i)});
        return static_cast<int>(std::llround(std::pow(lattice.d, lo)));
    }
};

inline SgsSpec random_sgs(const Lattice& lattice, int lp, std::uint64_t seed) {
    if (lattice.q() != 2 || lattice.boundary != Boundary::Open)
        throw std::invalid_argument("random_sgs: 2D open lattice required");
    if (lp < 2) throw std::invalid_argument("random_sgs: lp must be >= 2");
    SgsSpec spec;
    spec.lattice = lattice;
    spec.lp = lp;
    const int R = lattice.dims[0], C = lattice.dims[1], d = lattice.d;
    std::uint64_t ctr = seed;
    spec.a.resize(static_cast<std::size_t>(C));
    for (int j = 0; j < C; ++j)
        for (int i = 0; i < R; ++i) {
            const std::size_t ci = static_cast<std::size_t>(spec.chi(i));
            const std::size_t co = static_cast<std::size_t>(spec.chi(i + 1));
            // orthonormal columns of a (d*chi_out) x (d*chi_out) Haar unitary
            const Matrix u =
                detail::tensor_to_matrix(random_unitary(static_cast<std::size_t>(d) * co, ++ctr));
            Tensor t({ci, static_cast<std::size_t>(d), co});
            for (std::size_t al = 0; al < ci; ++al)
                for (std::size_t k = 0; k < static_cast<std::size_t>(d); ++k)
                    for (std::size_t be = 0; be < co; ++be)
                        t.at({al, k, be}) = u(static_cast<Eigen::Index>(k * co + be),
                                              static_cast<Eigen::Index>(al));
            spec.a[static_cast<std::size_t>(j)].push_back(std::move(t));
        }
    spec.v.resize(static_cast<std::size_t>(R));
    for (int i = 0; i < R; ++i)
        for (int j = 0; j + 1 < C; ++j)
            spec.v[static_cast<std::size_t>(i)].push_back(detail::tensor_to_matrix(
                random_unitary(static_cast<std::size_t>(d) * static_cast<std::size_t>(d), ++ctr)));
    return spec;
}

namespace detail {

// Unitary realizing MPS tensor a_i on the window of sites i..i+w-1 of one
// column: the incoming bond is read from the upper w-1 sites (times |0> on
// the last site when a fresh site is present), the physical index lands on
// the top site and the outgoing bond on the lower w-1 sites.
inline Matrix sgs_staircase_unitary(const SgsSpec& spec, int column, int row) {
    const int R = spec.rows(), d = spec.lattice.d;
    const int w = std::min(spec.lp, R - row);
    const bool fresh = (row + spec.lp - 1 <= R - 1);
    const std::size_t dim = ipow(static_cast<std::size_t>(d), static_cast<std::size_t>(w));
    const std::size_t out_cap = ipow(static_cast<std::size_t>(d), static_cast<std::size_t>(w - 1));
    const Tensor& a = spec.a[static_cast<std::size_t>(column)][static_cast<std::size_t>(row)];
    const std::size_t ci = a.dim(0), co = a.dim(2);

    Matrix v = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(ci));
    for (std::size_t al = 0; al < ci; ++al)
        for (std::size_t k = 0; k < static_cast<std::size_t>(d); ++k)
            for (std::size_t be = 0; be < co; ++be)
                v(static_cast<Eigen::Index>(k * out_cap + be), static_cast<Eigen::Index>(al)) =
                    a.at({al, k, be});
    const Matrix full = complete_isometry(v);  // columns 0..ci-1 are v

    // Scatter the prescribed columns to the basis states that actually hold
    // the incoming bond; fill the rest with the orthogonal complement.
    Matrix u = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    std::vector<bool> taken(dim, false);
    const std::size_t step = fresh ? static_cast<std::size_t>(d) : 1;
    for (std::size_t al = 0; al < ci; ++al) {
        u.col(static_cast<Eigen::Index>(al * step)) = full.col(static_cast<Eigen::Index>(al));
        taken[al * step] = true;
    }
    std::size_t next = ci;
    for (std::size_t col = 0; col < dim; ++col)
        if (!taken[col]) u.col(static_cast<Eigen::Index>(col)) = full.col(static_cast<Eigen::Index>(next++));
    return u;
}

}  // namespace detail

// SGS circuit: per-column staircases (top to bottom) followed by the single
// layer of row unitaries, applied left to right within each row.
inline Circuit sgs_circuit(const SgsSpec& spec) {
    const int R = spec.rows(), C = spec.cols();
    Circuit circ;
    circ.lattice = spec.lattice;
    circ.family = Family::Sgs;
    circ.params.lp = spec.lp;
    circ.params.bond_dim = spec.chi(1);
    for (int j = 0; j < C; ++j)
        for (int i = 0; i < R; ++i) {
            const int w = std::min(spec.lp, R - i);
            std::vector<Coord> sup;
            for (int t = 0; t < w; ++t) sup.push_back({i + t, j});
            circ.gates.push_back(Gate(detail::matrix_to_tensor(detail::sgs_staircase_unitary(spec, j, i)),
                                      sup, GateKind::Custom));
        }
    for (int i = 0; i < R; ++i)
        for (int j = 0; j + 1 < C; ++j)
            circ.gates.push_back(Gate(
                detail::matrix_to_tensor(spec.v[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]),
                {{i, j}, {i, j + 1}}, GateKind::Custom));
    return circ;
}

// SGS re-expressed as an RP-PEPS: plaquette (i,j) multiplies together the
// staircase gates of column j+1 at row i, the row unitary v(i,j), and the
// boundary constituents folded in from column 0, the last row and the last
// column. Requires lp = 2; the plaquettes are emitted column-major, which
// preserves the relative order of every non-commuting pair.
inline Circuit sgs_plaquette_circuit(const SgsSpec& spec) {
    if (spec.lp != 2)
        throw std::invalid_argument("sgs_plaquette_circuit: only lp = 2 is supported");
    const int R = spec.rows(), C = spec.cols(), d = spec.lattice.d;
    if (R < 2 || C < 2) throw std::invalid_argument("sgs_plaquette_circuit: lattice too small");
    const std::size_t dim = detail::ipow(static_cast<std::size_t>(d), 4);

    Circuit circ;
    circ.lattice = spec.lattice;
    circ.family = Family::RpPeps;
    circ.params.lp = 2;
    circ.params.bond_dim = spec.chi(1);

    // position of a lattice site within the plaquette anchored at (i,j)
    auto pos = [&](int i, int j, const Coord& site) -> std::size_t {
        return static_cast<std::size_t>((site[0] - i) * 2 + (site[1] - j));
    };
    for (int j = 0; j + 1 < C; ++j)
        for (int i = 0; i + 1 < R; ++i) {
            std::vector<std::pair<Matrix, std::vector<std::size_t>>> factors;  // applied in order
            auto add_staircase = [&](int row, int col) {
                const int w = std::min(2, R - row);
                std::vector<std::size_t> p;
                for (int t = 0; t < w; ++t) p.push_back(pos(i, j, {row + t, col}));
                factors.push_back({detail::sgs_staircase_unitary(spec, col, row), p});
            };
            auto add_v = [&](int row, int gap) {
                factors.push_back({spec.v[static_cast<std::size_t>(row)][static_cast<std::size_t>(gap)],
                                   {pos(i, j, {row, gap}), pos(i, j, {row, gap + 1})}});
            };
            if (j == 0) {
                add_staircase(i, 0);
                if (i == R - 2) add_staircase(R - 1, 0);
            }
            add_staircase(i, j + 1);
            if (i == R - 2) add_staircase(R - 1, j + 1);
            add_v(i, j);
            if (i == R - 2) add_v(R - 1, j);

            Matrix u = Matrix::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
            for (const auto& [m, p] : factors) u = detail::embed_matrix(m, p, 4, d) * u;
            circ.gates.push_back(Gate(detail::matrix_to_tensor(u),
                                      spec.lattice.plaquette_sites({i, j}, 2), GateKind::Plaquette));
        }
    return circ;
}

// ---------------------------------------------------------------------------
// Plaquette embedding

// Embed each gate of a circuit into a full plaquette unitary on the target
// lattice (identity on the extra sites). Anchors default to the clamped
// componentwise minimum of the support; pass explicit anchors when that
// choice is not valid. Gate order is preserved, so the embedded circuit
// prepares the same state with ancillas untouched.
inline Circuit embed_in_plaquettes(const Circuit& circ, int lp, const Lattice& target,
                                   const std::vector<Coord>* anchors = nullptr) {
    if (target.d != circ.lattice.d)
        throw std::invalid_argument("embed_in_plaquettes: local dimension mismatch");
    if (target.q() != circ.lattice.q())
        throw std::invalid_argument("embed_in_plaquettes: rank mismatch");
    for (std::size_t i = 0; i < target.q(); ++i)
        if (target.dims[i] < circ.lattice.dims[i])
            throw std::invalid_argument("embed_in_plaquettes: target lattice too small");
    if (anchors && anchors->size() != circ.gates.size())
        throw std::invalid_argument("embed_in_plaquettes: one anchor per gate required");

    Circuit out;
    out.lattice = target;
    out.family = Family::RpPeps;
    out.params = circ.params;
    out.params.lp = lp;
    const std::size_t q = target.q();
    for (std::size_t g = 0; g < circ.gates.size(); ++g) {
        const Gate& gate = circ.gates[g];
        Coord anchor;
        if (anchors) {
            anchor = (*anchors)[g];
        } else {
            anchor = gate.support[0];
            for (const auto& s : gate.support)
                for (std::size_t i = 0; i < q; ++i) anchor[i] = std::min(anchor[i], s[i]);
            if (target.boundary == Boundary::Open)
                for (std::size_t i = 0; i < q; ++i)
                    anchor[i] = std::min(anchor[i], target.dims[i] - lp);
        }
        const auto sites = target.plaquette_sites(anchor, lp);
        if (sites.empty())
            throw std::invalid_argument("embed_in_plaquettes: plaquette crosses an open boundary");
        std::vector<std::size_t> positions;
        for (const auto& s : gate.support) {
            const Coord w = target.wrap(s);
            std::size_t p = sites.size();
            for (std::size_t k = 0; k < sites.size(); ++k)
                if (same_coord(sites[k], w)) p = k;
            if (p == sites.size())
                throw std::invalid_argument("embed_in_plaquettes: support does not fit plaquette at " +
                                            coord_to_string(anchor));
            positions.push_back(p);
        }
        const Matrix u = detail::embed_matrix(detail::tensor_to_matrix(gate.matrix), positions,
                                              sites.size(), target.d);
        out.gates.push_back(Gate(detail::matrix_to_tensor(u), sites, GateKind::Plaquette));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Cluster state

// 2D cluster state as a radial plaquette circuit (d = 2, lp = 2): each
// plaquette gate applies Hadamards to its not-yet-touched sites followed by
// the CZs on its not-yet-entangled nearest-neighbor edges.
// Sequential GHZ preparation on an open n-site chain with n - 1 two-site
// gates: Hadamard-then-copy at the left end, then copy gates down the chain.
inline Circuit ghz_chain_circuit(int n) {
    Lattice lattice{{n}, 2, Boundary::Open};
    Matrix h(2, 2);
    h << 1, 1, 1, -1;
    h /= std::sqrt(2.0);
    Matrix cnot = Matrix::Zero(4, 4);  // first (most significant) site controls
    cnot(0, 0) = cnot(1, 1) = cnot(3, 2) = cnot(2, 3) = 1;
    Matrix hI = Matrix::Zero(4, 4);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int e = 0; e < 2; ++e) hI(2 * a + e, 2 * b + e) = h(a, b);
    Circuit circ;
    circ.lattice = lattice;
    circ.family = Family::Custom;
    circ.params.lp = 2;
    circ.params.source = {0};
    for (int i = 0; i + 1 < n; ++i) {
        const Matrix m = (i == 0) ? Matrix(cnot * hI) : cnot;
        circ.gates.push_back(
            Gate(detail::matrix_to_tensor(m), {{i}, {i + 1}}, GateKind::Custom));
    }
    return circ;
}

inline Circuit cluster_state_circuit(const Lattice& lattice, const Coord& source) {
    if (lattice.d != 2) throw std::invalid_argument("cluster_state_circuit: qubits required");
    const Ordering ord = radial_ordering(lattice, 2, source);
    Matrix h(2, 2);
    const double s2 = 1.0 / std::sqrt(2.0);
    h << s2, s2, s2, -s2;
    Matrix cz = Matrix::Identity(4, 4);
    cz(3, 3) = -1.0;

    Circuit circ;
    circ.lattice = lattice;
    circ.family = Family::RpPeps;
    circ.params.lp = 2;
    circ.params.source = source;
    circ.params.preferred = ord.preferred;

    std::set<std::size_t> touched;
    std::set<std::pair<std::size_t, std::size_t>> entangled;
    for (const auto& a : ord.positions) {
        const auto sites = lattice.plaquette_sites(a, 2);
        std::vector<std::size_t> idx;
        for (const auto& c : sites) idx.push_back(lattice.site_index(c));
        const std::size_t m = sites.size();
        Matrix u = Matrix::Identity(static_cast<Eigen::Index>(std::size_t{1} << m),
                                    static_cast<Eigen::Index>(std::size_t{1} << m));
        for (std::size_t p = 0; p < m; ++p)
            if (!touched.count(idx[p])) u = detail::embed_matrix(h, {p}, m, 2) * u;
        for (std::size_t p = 0; p < m; ++p)
            for (std::size_t t = p + 1; t < m; ++t) {
                int dist = 0;
                for (std::size_t i = 0; i < lattice.q(); ++i)
                    dist += std::abs(sites[p][i] - sites[t][i]);
                if (dist != 1) continue;
                const auto key = std::minmax(idx[p], idx[t]);
                if (entangled.count({key.first, key.second})) continue;
                u = detail::embed_matrix(cz, {p, t}, m, 2) * u;
                entangled.insert({key.first, key.second});
            }
        for (std::size_t s : idx) touched.insert(s);
        circ.gates.push_back(Gate(detail::matrix_to_tensor(u), sites, GateKind::Plaquette));
    }
    return circ;
}

}  // namespace seqpeps
