#pragma once

// Lattice geometry for q in {1,2,3}: coordinates, mixed-radix site indexing
// (site (0,...,0) most significant), plaquette and custom gate supports with
// open or periodic boundary handling.

#include <array>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace seqpeps {

// 0-based lattice coordinate, ordered (row, column[, depth]).
using Coord = std::vector<int>;

enum class Boundary { Open, Periodic };

struct Lattice {
    std::vector<int> dims;  // side lengths (n1,...,nq), q in {1,2,3}
    int d = 2;              // local qudit dimension
    Boundary boundary = Boundary::Open;

    Lattice() = default;
    Lattice(std::vector<int> dims_, int d_ = 2, Boundary b = Boundary::Open)
        : dims(std::move(dims_)), d(d_), boundary(b) {
        if (dims.empty() || dims.size() > 3)
            throw std::invalid_argument("Lattice: dimension q must be 1, 2 or 3");
        for (int n : dims)
            if (n < 1) throw std::invalid_argument("Lattice: side lengths must be >= 1");
        if (d < 2) throw std::invalid_argument("Lattice: local dimension must be >= 2");
    }

    std::size_t q() const { return dims.size(); }

    std::size_t num_sites() const {
        std::size_t n = 1;
        for (int s : dims) n *= static_cast<std::size_t>(s);
        return n;
    }

    bool contains(const Coord& c) const {
        if (c.size() != dims.size()) return false;
        for (std::size_t i = 0; i < dims.size(); ++i)
            if (c[i] < 0 || c[i] >= dims[i]) return false;
        return true;
    }

    Coord wrap(Coord c) const {
        for (std::size_t i = 0; i < dims.size(); ++i) {
            c[i] %= dims[i];
            if (c[i] < 0) c[i] += dims[i];
        }
        return c;
    }

    // Mixed-radix site index; coordinate (0,...,0) is most significant.
    std::size_t site_index(const Coord& c) const {
        if (!contains(c)) throw std::out_of_range("Lattice::site_index: coordinate out of range");
        std::size_t idx = 0;
        for (std::size_t i = 0; i < dims.size(); ++i)
            idx = idx * static_cast<std::size_t>(dims[i]) + static_cast<std::size_t>(c[i]);
        return idx;
    }

    Coord coord_of(std::size_t idx) const {
        Coord c(dims.size(), 0);
        for (std::size_t i = dims.size(); i-- > 0;) {
            c[i] = static_cast<int>(idx % static_cast<std::size_t>(dims[i]));
            idx /= static_cast<std::size_t>(dims[i]);
        }
        return c;
    }

    // Sites of the L_p x ... x L_p plaquette anchored at `anchor`, in
    // row-major order over offsets. Returns empty when the plaquette crosses
    // an open boundary (such gates are omitted).
    std::vector<Coord> plaquette_sites(const Coord& anchor, int lp) const {
        if (anchor.size() != dims.size())
            throw std::invalid_argument("plaquette_sites: anchor rank mismatch");
        std::vector<Coord> sites;
        std::size_t count = 1;
        for (std::size_t i = 0; i < dims.size(); ++i) count *= static_cast<std::size_t>(lp);
        sites.reserve(count);
        std::vector<int> off(dims.size(), 0);
        for (std::size_t n = 0; n < count; ++n) {
            Coord c(anchor);
            for (std::size_t i = 0; i < dims.size(); ++i) c[i] += off[i];
            if (boundary == Boundary::Open) {
                if (!contains(c)) return {};
            } else {
                c = wrap(c);
            }
            sites.push_back(std::move(c));
            for (std::size_t i = dims.size(); i-- > 0;) {
                if (++off[i] < lp) break;
                off[i] = 0;
            }
        }
        return sites;
    }

    // Anchors of all plaquettes that fit. Under OBC these are the anchors a
    // with a_i + L_p <= n_i; under PBC every site anchors one plaquette.
    std::vector<Coord> plaquette_anchors(int lp) const {
        std::vector<Coord> anchors;
        std::vector<int> limit(dims.size());
        for (std::size_t i = 0; i < dims.size(); ++i) {
            limit[i] = (boundary == Boundary::Open) ? dims[i] - lp + 1 : dims[i];
            if (limit[i] <= 0) return {};
        }
        Coord c(dims.size(), 0);
        while (true) {
            anchors.push_back(c);
            bool done = true;
            for (std::size_t i = dims.size(); i-- > 0;) {
                if (++c[i] < limit[i]) {
                    done = false;
                    break;
                }
                c[i] = 0;
            }
            if (done) break;
        }
        return anchors;
    }
};

inline bool same_coord(const Coord& a, const Coord& b) { return a == b; }

inline std::string coord_to_string(const Coord& c) {
    std::string s = "(";
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(c[i]);
    }
    return s + ")";
}

}  // namespace seqpeps
