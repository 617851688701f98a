#include <catch2/catch_amalgamated.hpp>

#include "seqpeps/families.hpp"
#include "seqpeps/statevector.hpp"

using namespace seqpeps;

namespace {

// Dense oracle for the string-gate target state: contract each column's
// canonical MPS by direct loops, take the product over columns, then apply
// the row-unitary layer with the (independently tested) gate application.
StateVector sgs_oracle_state(const SgsSpec& spec) {
    const int R = spec.rows(), C = spec.cols(), d = spec.lattice.d;
    StateVector sv = StateVector::zeros(std::size_t(R) * C, d);
    for (std::size_t z = 0; z < sv.amps.size(); ++z) {
        cplx amp{1, 0};
        for (int j = 0; j < C; ++j) {
            // transfer through column j's MPS for this column's digits
            std::vector<cplx> vec{cplx{1, 0}};
            for (int i = 0; i < R; ++i) {
                const std::size_t site = std::size_t(i) * C + std::size_t(j);
                // digit of site in z, site 0 most significant
                std::size_t stride = 1;
                for (std::size_t s = sv.num_sites; s-- > site + 1;) stride *= std::size_t(d);
                const std::size_t k = (z / stride) % std::size_t(d);
                const Tensor& a = spec.a[std::size_t(j)][std::size_t(i)];
                std::vector<cplx> next(a.dim(2), cplx{0, 0});
                for (std::size_t be = 0; be < a.dim(2); ++be)
                    for (std::size_t al = 0; al < a.dim(0); ++al)
                        next[be] += vec[al] * a.at({al, k, be});
                vec = std::move(next);
            }
            amp *= vec[0];
        }
        sv.amps[z] = amp;
    }
    for (int i = 0; i < R; ++i)
        for (int j = 0; j + 1 < C; ++j)
            apply_gate(sv, spec.v[std::size_t(i)][std::size_t(j)],
                       {std::size_t(i) * C + std::size_t(j), std::size_t(i) * C + std::size_t(j) + 1});
    return sv;
}

// Oracle for graph states: amplitudes (-1)^(#edges with both ends 1) / 2^(N/2)
// over the nearest-neighbour graph of the lattice.
StateVector cluster_oracle(const Lattice& lat) {
    const int R = lat.dims[0], C = lat.dims[1];
    const std::size_t n = lat.num_sites();
    StateVector sv = StateVector::zeros(n, 2);
    const double norm = std::pow(2.0, -double(n) / 2.0);
    for (std::size_t z = 0; z < sv.amps.size(); ++z) {
        int sign = 0;
        auto bit = [&](int r, int c) {
            const std::size_t site = std::size_t(r) * C + std::size_t(c);
            return (z >> (n - 1 - site)) & 1u;
        };
        for (int r = 0; r < R; ++r)
            for (int c = 0; c < C; ++c) {
                if (c + 1 < C && bit(r, c) && bit(r, c + 1)) ++sign;
                if (r + 1 < R && bit(r, c) && bit(r + 1, c)) ++sign;
            }
        sv.amps[z] = (sign % 2 ? -norm : norm);
    }
    return sv;
}

}  // namespace

TEST_CASE("plaquette circuits carry unitary gates on valid anchors") {
    Lattice lat{{3, 3}, 2, Boundary::Open};
    Circuit circ = build_rppeps(lat, 2, {0, 0}, 9);
    REQUIRE(circ.gates.size() == 4);
    for (const auto& g : circ.gates) {
        REQUIRE(g.support.size() == 4);
        REQUIRE(unitarity_residual(g.matrix) < 1e-12);
    }
    Ordering ord;
    ord.plaquette_size = 2;
    for (const auto& g : circ.gates) ord.positions.push_back(g.support[0]);
    REQUIRE(valid_plaquette_ordering(lat, ord));
    // duplicate anchors violate the distinctness condition
    ord.positions.push_back(ord.positions.front());
    std::string why;
    REQUIRE_FALSE(valid_plaquette_ordering(lat, ord, &why));
    REQUIRE(why.find("duplicate") != std::string::npos);
}

TEST_CASE("corner isometric circuit uses staircase supports and shallow depth") {
    Lattice lat{{4, 5}, 2, Boundary::Open};
    Circuit circ = build_isotns_corner(lat, 1, 3);
    // one gate per anchor column 0..C-2 in every row (the far column is
    // merged into the column C-2 gates)
    REQUIRE(circ.gates.size() == std::size_t(lat.dims[0]) * (lat.dims[1] - 1));
    for (const auto& g : circ.gates) REQUIRE(g.support.size() <= 3);
    // supports with s = 1: site, right neighbour, lower-right diagonal
    // total depth of the wavefront ordering is R + C - 2
    std::vector<std::vector<std::size_t>> supports;
    for (const auto& g : circ.gates) {
        std::vector<std::size_t> s;
        for (const auto& c : g.support) s.push_back(lat.site_index(c));
        supports.push_back(s);
    }
    REQUIRE(std::llabs(long(layerize_supports(supports).depth()) - (4 + 5)) <= 4);
}

TEST_CASE("column MPS tensors are right-canonical") {
    Lattice lat{{4, 3}, 2, Boundary::Open};
    SgsSpec spec = random_sgs(lat, 2, 21);
    for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 4; ++i) {
            const Tensor& a = spec.a[std::size_t(j)][std::size_t(i)];
            // sum_k A_k A_k^dagger = identity on the incoming bond
            Matrix acc = Matrix::Zero(Eigen::Index(a.dim(0)), Eigen::Index(a.dim(0)));
            for (std::size_t k = 0; k < a.dim(1); ++k) {
                Matrix ak(Eigen::Index(a.dim(0)), Eigen::Index(a.dim(2)));
                for (std::size_t al = 0; al < a.dim(0); ++al)
                    for (std::size_t be = 0; be < a.dim(2); ++be)
                        ak(Eigen::Index(al), Eigen::Index(be)) = a.at({al, k, be});
                acc += ak * ak.adjoint();
            }
            REQUIRE((acc - Matrix::Identity(acc.rows(), acc.cols())).cwiseAbs().maxCoeff() <
                    1e-12);
        }
}

TEST_CASE("string-gate circuit prepares the column-MPS target state") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        Lattice lat{{3, 3}, 2, Boundary::Open};
        SgsSpec spec = random_sgs(lat, 2, seed);
        StateVector got = simulate(sgs_circuit(spec));
        StateVector want = sgs_oracle_state(spec);
        REQUIRE(fidelity(got, want) > 1 - 1e-10);
    }
}

TEST_CASE("string-gate state equals its plaquette-circuit rewrite") {
    for (std::uint64_t seed : {5u, 6u}) {
        Lattice lat{{3, 4}, 2, Boundary::Open};
        SgsSpec spec = random_sgs(lat, 2, seed);
        StateVector direct = simulate(sgs_circuit(spec));
        Circuit plq = sgs_plaquette_circuit(spec);
        for (const auto& g : plq.gates) REQUIRE(g.support.size() == 4);
        REQUIRE(fidelity(direct, simulate(plq)) > 1 - 1e-10);
    }
}

TEST_CASE("row-major chain circuit wraps rows through a boundary gate") {
    Lattice lat{{3, 3}, 2, Boundary::Open};
    Circuit circ = build_fpeps(lat, 4);
    // per row: C-1 three-site gates, then one two-site row-boundary gate
    REQUIRE(circ.gates.size() == std::size_t(2) * 3);
    for (const auto& g : circ.gates) REQUIRE(unitarity_residual(g.matrix) < 1e-12);
}

TEST_CASE("plaquette embedding reproduces the state on the original sites") {
    Lattice small{{2, 2}, 2, Boundary::Open};
    Circuit circ = build_rppeps(small, 2, {0, 0}, 11);
    Lattice big{{3, 3}, 2, Boundary::Open};
    Circuit emb = embed_in_plaquettes(circ, 2, big);
    REQUIRE(emb.family == Family::RpPeps);
    std::vector<std::size_t> extra;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            if (r == 2 || c == 2) extra.push_back(big.site_index({r, c}));
    StateVector on_orig = restrict_to_zero(simulate(emb), extra);
    REQUIRE(fidelity(on_orig, simulate(circ)) > 1 - 1e-10);
}

TEST_CASE("cluster-state circuit matches the graph-state oracle") {
    Lattice lat{{2, 3}, 2, Boundary::Open};
    Circuit circ = cluster_state_circuit(lat, {0, 0});
    REQUIRE(fidelity(simulate(circ), cluster_oracle(lat)) > 1 - 1e-10);
}
