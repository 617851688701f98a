#pragma once

// Light-cone-restricted expectation values and the sequential-vs-brickwall
// causal-structure comparison.

#include "seqpeps/schedule.hpp"
#include "seqpeps/statevector.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>
#include <vector>

namespace seqpeps {

inline std::vector<std::vector<std::size_t>> circuit_supports(const Circuit& circ) {
    std::vector<std::vector<std::size_t>> supports;
    supports.reserve(circ.gates.size());
    for (const auto& g : circ.gates) {
        std::vector<std::size_t> s;
        for (const auto& c : g.support) s.push_back(circ.lattice.site_index(c));
        supports.push_back(std::move(s));
    }
    return supports;
}

struct LightconeExpectation {
    cplx value{0.0, 0.0};
    std::size_t surviving_gates = 0;
    std::size_t total_gates = 0;
    std::size_t region_sites = 0;
    double surviving_fraction = 0.0;
};

// <psi| O |psi> simulated on the reverse light cone of the target sites
// only: gates outside the cone cancel against their conjugates, and
// untouched sites stay |0> and factor out.
inline LightconeExpectation expectation_via_lightcone(const Circuit& circ, const Matrix& op,
                                                      const std::vector<std::size_t>& target_sites) {
    const auto supports = circuit_supports(circ);
    const auto survivors = reverse_light_cone(supports, target_sites);
    std::set<std::size_t> region(target_sites.begin(), target_sites.end());
    for (std::size_t g : survivors) region.insert(supports[g].begin(), supports[g].end());

    std::map<std::size_t, std::size_t> compact;
    for (std::size_t s : region) compact.emplace(s, compact.size());

    StateVector sv = StateVector::zeros(region.size(), circ.lattice.d);
    for (std::size_t g : survivors) {
        std::vector<std::size_t> sites;
        for (std::size_t s : supports[g]) sites.push_back(compact.at(s));
        Matrix u(static_cast<Eigen::Index>(circ.gates[g].matrix.dim(0)),
                 static_cast<Eigen::Index>(circ.gates[g].matrix.dim(1)));
        for (std::size_t r = 0; r < circ.gates[g].matrix.dim(0); ++r)
            for (std::size_t c = 0; c < circ.gates[g].matrix.dim(1); ++c)
                u(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                    circ.gates[g].matrix.data()[r * circ.gates[g].matrix.dim(1) + c];
        apply_gate(sv, u, sites);
    }
    std::vector<std::size_t> mapped_targets;
    for (std::size_t t : target_sites) mapped_targets.push_back(compact.at(t));

    LightconeExpectation out;
    out.value = expectation(sv, op, mapped_targets);
    out.surviving_gates = survivors.size();
    out.total_gates = circ.gates.size();
    out.region_sites = region.size();
    out.surviving_fraction = circ.gates.empty()
                                 ? 0.0
                                 : static_cast<double>(survivors.size()) /
                                       static_cast<double>(circ.gates.size());
    return out;
}

// Two-point function <O_a(a) O_b(b)> through the joint light cone.
struct CorrelationEntry {
    std::size_t site_a = 0, site_b = 0;
    int distance = 0;
    cplx value{0.0, 0.0};
};

inline CorrelationEntry correlation_via_lightcone(const Circuit& circ, const Matrix& op_a,
                                                  const Matrix& op_b, std::size_t a, std::size_t b) {
    Matrix op = Matrix::Zero(op_a.rows() * op_b.rows(), op_a.cols() * op_b.cols());
    for (Eigen::Index i = 0; i < op_a.rows(); ++i)
        for (Eigen::Index j = 0; j < op_a.cols(); ++j)
            op.block(i * op_b.rows(), j * op_b.cols(), op_b.rows(), op_b.cols()) = op_a(i, j) * op_b;
    CorrelationEntry e;
    e.site_a = a;
    e.site_b = b;
    const Coord ca = circ.lattice.coord_of(a), cb = circ.lattice.coord_of(b);
    for (std::size_t i = 0; i < ca.size(); ++i) e.distance += std::abs(ca[i] - cb[i]);
    e.value = expectation_via_lightcone(circ, op, {a, b}).value;
    return e;
}

// Minimum number of staggered brickwall sweeps whose reverse light cone from
// the targets covers the whole lattice; sequential circuits manage this in a
// single pass, brickwall needs ~distance/(lp-1) sweeps.
inline std::size_t brickwall_min_sweeps(const Lattice& lattice, int lp,
                                        const std::vector<std::size_t>& target_sites,
                                        std::size_t max_sweeps = 0) {
    if (max_sweeps == 0) max_sweeps = lattice.num_sites();
    for (std::size_t s = 1; s <= max_sweeps; ++s) {
        const Ordering ord = brickwall_ordering(lattice, lp, static_cast<int>(s));
        const auto region =
            light_cone_region(supports_as_site_sets(lattice, ord), target_sites);
        if (region.size() == lattice.num_sites()) return s;
    }
    return 0;  // never covers (e.g. lattice smaller than a plaquette)
}

struct BrickwallReport {
    std::vector<std::size_t> target_sites;
    std::size_t sequential_gates = 0;
    std::size_t sequential_surviving = 0;
    double sequential_fraction = 0.0;
    std::size_t sequential_depth = 0;
    std::size_t min_sweeps = 0;              // sweeps for full-lattice cone coverage
    std::size_t brickwall_gates = 0;         // gate count at min_sweeps
    std::size_t brickwall_surviving = 0;
    std::size_t brickwall_depth = 0;
};

// Geometry-only comparison of a radial sequential ordering against staggered
// brickwall sweeps, seen from the reverse light cone of the target sites.
inline BrickwallReport compare_with_brickwall(const Lattice& lattice, int lp, const Coord& source,
                                              const std::vector<std::size_t>& target_sites) {
    BrickwallReport rep;
    rep.target_sites = target_sites;

    const Ordering radial = radial_ordering(lattice, lp, source);
    const auto rad_supports = supports_as_site_sets(lattice, radial);
    rep.sequential_gates = rad_supports.size();
    rep.sequential_surviving = reverse_light_cone(rad_supports, target_sites).size();
    rep.sequential_fraction = rad_supports.empty()
                                  ? 0.0
                                  : static_cast<double>(rep.sequential_surviving) /
                                        static_cast<double>(rad_supports.size());
    rep.sequential_depth = layerize_supports(rad_supports).depth();

    rep.min_sweeps = brickwall_min_sweeps(lattice, lp, target_sites);
    if (rep.min_sweeps > 0) {
        const Ordering bw = brickwall_ordering(lattice, lp, static_cast<int>(rep.min_sweeps));
        const auto bw_supports = supports_as_site_sets(lattice, bw);
        rep.brickwall_gates = bw_supports.size();
        rep.brickwall_surviving = reverse_light_cone(bw_supports, target_sites).size();
        rep.brickwall_depth = layerize_supports(bw_supports).depth();
    }
    return rep;
}

}  // namespace seqpeps
