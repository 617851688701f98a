#include <catch2/catch_amalgamated.hpp>

#include "seqpeps/families.hpp"
#include "seqpeps/lightcone.hpp"

using namespace seqpeps;

namespace {

Matrix pauli_z() {
    Matrix z(2, 2);
    z << 1, 0, 0, -1;
    return z;
}

}  // namespace

TEST_CASE("cone-reduced expectation equals full simulation") {
    Matrix z = pauli_z();
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Lattice lat{{3, 4}, 2, Boundary::Open};
        Circuit circ = build_rppeps(lat, 2, {0, 0}, seed);
        StateVector full = simulate(circ);
        for (std::size_t site : {std::size_t{0}, std::size_t{5}, std::size_t{11}}) {
            LightconeExpectation r = expectation_via_lightcone(circ, z, {site});
            REQUIRE(std::abs(r.value - expectation(full, z, {site})) < 1e-10);
        }
    }
}

TEST_CASE("most gates cancel for an observable at the source") {
    Lattice lat{{5, 5}, 2, Boundary::Open};
    Circuit circ = build_rppeps(lat, 2, {0, 0}, 7);
    LightconeExpectation r =
        expectation_via_lightcone(circ, pauli_z(), {lat.site_index({0, 0})});
    REQUIRE(r.surviving_fraction < 0.5);
}

TEST_CASE("surviving set grows monotonically with observable support") {
    Lattice lat{{4, 4}, 2, Boundary::Open};
    Circuit circ = build_rppeps(lat, 2, {0, 0}, 13);
    auto supports = circuit_supports(circ);
    std::vector<std::size_t> targets;
    std::set<std::size_t> prev;
    for (std::size_t site = 0; site < lat.num_sites(); ++site) {
        targets.push_back(site);
        auto survive = reverse_light_cone(supports, targets);
        std::set<std::size_t> cur(survive.begin(), survive.end());
        for (std::size_t g : prev) REQUIRE(cur.count(g));
        prev = std::move(cur);
    }
    REQUIRE(prev.size() == circ.gates.size());
}

TEST_CASE("disjoint reverse cones certify zero connected correlation") {
    // Brickwall with one sweep: cones of far-apart sites share no gate.
    Lattice lat{{12}, 2, Boundary::Open};
    Ordering ord = brickwall_ordering(lat, 2, 2);
    Circuit circ = plaquette_circuit(lat, ord, 3, Family::Custom);
    Matrix z = pauli_z();
    CorrelationEntry e = correlation_via_lightcone(circ, z, z, 0, 11);
    const cplx ea = expectation_via_lightcone(circ, z, {std::size_t{0}}).value;
    const cplx eb = expectation_via_lightcone(circ, z, {std::size_t{11}}).value;
    REQUIRE(std::abs(e.value - ea * eb) <= 1e-12);
}

TEST_CASE("sweeps needed for full cone coverage on a 12-site chain") {
    Lattice lat{{12}, 2, Boundary::Open};
    REQUIRE(brickwall_min_sweeps(lat, 2, {std::size_t{0}, std::size_t{11}}) == 5);
}

TEST_CASE("sequential-versus-sweep comparison reports consistent counts") {
    Lattice lat{{10}, 2, Boundary::Open};
    BrickwallReport r = compare_with_brickwall(lat, 2, {0}, {std::size_t{0}, std::size_t{9}});
    REQUIRE(r.sequential_gates == 9);
    REQUIRE(r.min_sweeps >= 2);
    REQUIRE(r.brickwall_gates > r.sequential_gates);
    REQUIRE(r.sequential_fraction <= 1.0);
}
