#pragma once

// Gates and circuits over a qudit lattice. A gate is a unitary with an
// ordered support; the matrix basis runs row-major over the support list
// with the first listed site most significant.

#include "seqpeps/lattice.hpp"
#include "seqpeps/tensor.hpp"

#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace seqpeps {

enum class GateKind { Plaquette, LShaped, Custom };

struct Gate {
    Tensor matrix;               // (d^k, d^k)
    std::vector<Coord> support;  // ordered, pairwise distinct
    GateKind kind = GateKind::Custom;

    Gate() = default;
    Gate(Tensor m, std::vector<Coord> sup, GateKind k = GateKind::Custom)
        : matrix(std::move(m)), support(std::move(sup)), kind(k) {
        validate();
    }

    void validate() const {
        if (matrix.rank() != 2 || matrix.dim(0) != matrix.dim(1))
            throw std::invalid_argument("Gate: matrix must be square");
        std::set<Coord> seen(support.begin(), support.end());
        if (seen.size() != support.size())
            throw std::invalid_argument("Gate: support coordinates must be pairwise distinct");
        const double res = unitarity_residual(matrix);
        if (res > kUnitaryTol)
            throw std::invalid_argument("Gate: matrix not unitary, residual " +
                                        std::to_string(res));
    }
};

enum class Family { PPeps, RpPeps, IsoTns, Sgs, FPeps, Custom };

inline std::string family_name(Family f) {
    switch (f) {
        case Family::PPeps: return "p-peps";
        case Family::RpPeps: return "rp-peps";
        case Family::IsoTns: return "isotns";
        case Family::Sgs: return "sgs";
        case Family::FPeps: return "f-peps";
        default: return "custom";
    }
}

struct CircuitParams {
    int lp = 0;               // plaquette side length (plaquette families)
    int s = 0;                // bond-dimension exponent, D = d^s
    int bond_dim = 0;         // D
    Coord source;             // source point / orthogonality center
    std::vector<int> preferred;  // signed axis priority, e.g. {+2, +1}
};

struct Circuit {
    Lattice lattice;
    std::vector<Gate> gates;
    Family family = Family::Custom;
    CircuitParams params;

    std::size_t qudit_count() const { return lattice.num_sites(); }

    // Every gate support must lie inside the lattice (PBC wrapping is applied
    // at construction time, so stored coordinates are always in range).
    void check_supports() const {
        for (const auto& g : gates)
            for (const auto& c : g.support)
                if (!lattice.contains(c))
                    throw std::invalid_argument("Circuit: gate support outside lattice at " +
                                                coord_to_string(c));
    }
};

// Seeded per-anchor gate matrix: all randomness flows from (base_seed, tag),
// so a gate's matrix depends on where it sits, not on its sequence position.
inline std::uint64_t anchor_seed(std::uint64_t base_seed, const Coord& anchor) {
    std::uint64_t h = base_seed ^ 0x9e3779b97f4a7c15ULL;
    for (int x : anchor) {
        h ^= static_cast<std::uint64_t>(static_cast<std::int64_t>(x)) + 0x9e3779b97f4a7c15ULL +
             (h << 6) + (h >> 2);
    }
    return h;
}

}  // namespace seqpeps
