#pragma once

// Exact dense statevector simulation of qudit circuits, plus expectation
// values, reduced density matrices and entanglement entropy.

#include "seqpeps/circuit.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

namespace seqpeps {

// Amplitude-count cap for dense simulation; override with SEQPEPS_MAX_AMPS.
inline std::size_t max_amplitudes() {
    if (const char* env = std::getenv("SEQPEPS_MAX_AMPS")) {
        const unsigned long long v = std::strtoull(env, nullptr, 10);
        if (v > 0) return static_cast<std::size_t>(v);
    }
    return std::size_t{1} << 24;
}

struct StateVector {
    std::size_t num_sites = 0;
    int d = 2;
    std::vector<cplx> amps;  // site 0 most significant (mixed radix)

    static StateVector zeros(std::size_t num_sites, int d) {
        StateVector sv;
        sv.num_sites = num_sites;
        sv.d = d;
        std::size_t n = 1;
        for (std::size_t i = 0; i < num_sites; ++i) {
            if (n > max_amplitudes() / static_cast<std::size_t>(d))
                throw std::runtime_error("statevector exceeds amplitude cap (" +
                                         std::to_string(max_amplitudes()) +
                                         "); raise SEQPEPS_MAX_AMPS to override");
            n *= static_cast<std::size_t>(d);
        }
        sv.amps.assign(n, cplx(0.0, 0.0));
        sv.amps[0] = cplx(1.0, 0.0);
        return sv;
    }

    std::size_t size() const { return amps.size(); }

    double norm2() const {
        double s = 0;
        for (const auto& a : amps) s += std::norm(a);
        return s;
    }

    // Basis-state index from per-site values, site 0 most significant.
    std::size_t index_of(const std::vector<int>& values) const {
        std::size_t idx = 0;
        for (std::size_t i = 0; i < num_sites; ++i)
            idx = idx * static_cast<std::size_t>(d) + static_cast<std::size_t>(values[i]);
        return idx;
    }
};

// Apply a k-site gate. The gate matrix is d^k x d^k, basis ordered with the
// first listed site most significant. Gather/scatter over the complement.
inline void apply_gate(StateVector& sv, const Matrix& u, const std::vector<std::size_t>& sites) {
    const std::size_t k = sites.size();
    const auto d = static_cast<std::size_t>(sv.d);
    std::size_t dk = 1;
    for (std::size_t i = 0; i < k; ++i) dk *= d;
    if (static_cast<std::size_t>(u.rows()) != dk || static_cast<std::size_t>(u.cols()) != dk)
        throw std::invalid_argument("apply_gate: matrix dimension does not match support");

    // Strides of the supported sites in the flat amplitude index.
    std::vector<std::size_t> stride(k);
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t s = 1;
        for (std::size_t j = sites[i] + 1; j < sv.num_sites; ++j) s *= d;
        stride[i] = s;
    }

    std::vector<std::size_t> offsets(dk);  // local pattern -> flat offset
    for (std::size_t p = 0; p < dk; ++p) {
        std::size_t off = 0, rem = p;
        for (std::size_t i = k; i-- > 0;) {
            off += (rem % d) * stride[i];
            rem /= d;
        }
        offsets[p] = off;
    }

    // Enumerate base indices where all supported sites read 0.
    std::vector<std::size_t> other_strides;
    for (std::size_t site = 0; site < sv.num_sites; ++site) {
        bool on = false;
        for (std::size_t s : sites)
            if (s == site) on = true;
        if (!on) {
            std::size_t str = 1;
            for (std::size_t j = site + 1; j < sv.num_sites; ++j) str *= d;
            other_strides.push_back(str);
        }
    }
    std::size_t num_bases = sv.size() / dk;
    std::vector<cplx> in(dk), out(dk);
    for (std::size_t b = 0; b < num_bases; ++b) {
        std::size_t base = 0, rem = b;
        for (std::size_t i = other_strides.size(); i-- > 0;) {
            base += (rem % d) * other_strides[i];
            rem /= d;
        }
        for (std::size_t p = 0; p < dk; ++p) in[p] = sv.amps[base + offsets[p]];
        for (std::size_t p = 0; p < dk; ++p) {
            cplx acc(0.0, 0.0);
            for (std::size_t q = 0; q < dk; ++q) acc += u(static_cast<Eigen::Index>(p),
                                                          static_cast<Eigen::Index>(q)) * in[q];
            out[p] = acc;
        }
        for (std::size_t p = 0; p < dk; ++p) sv.amps[base + offsets[p]] = out[p];
    }
}

inline void apply_gate(StateVector& sv, const Gate& g, const Lattice& lattice) {
    std::vector<std::size_t> sites;
    sites.reserve(g.support.size());
    for (const auto& c : g.support) sites.push_back(lattice.site_index(c));
    Matrix u(static_cast<Eigen::Index>(g.matrix.dim(0)), static_cast<Eigen::Index>(g.matrix.dim(1)));
    for (std::size_t r = 0; r < g.matrix.dim(0); ++r)
        for (std::size_t c = 0; c < g.matrix.dim(1); ++c)
            u(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                g.matrix.data()[r * g.matrix.dim(1) + c];
    apply_gate(sv, u, sites);
}

// Run a circuit from |0...0>.
inline StateVector simulate(const Circuit& circuit) {
    StateVector sv = StateVector::zeros(circuit.lattice.num_sites(), circuit.lattice.d);
    for (const auto& g : circuit.gates) apply_gate(sv, g, circuit.lattice);
    return sv;
}

inline cplx inner(const StateVector& a, const StateVector& b) {
    if (a.size() != b.size()) throw std::invalid_argument("inner: dimension mismatch");
    cplx s(0.0, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a.amps[i]) * b.amps[i];
    return s;
}

inline double fidelity(const StateVector& a, const StateVector& b) {
    return std::norm(inner(a, b));
}

// <psi| O |psi> for O acting on the given sites (same basis convention as
// gates; O need not be unitary).
inline cplx expectation(const StateVector& sv, const Matrix& op,
                        const std::vector<std::size_t>& sites) {
    StateVector tmp = sv;
    apply_gate(tmp, op, sites);
    return inner(sv, tmp);
}

// Reduced density matrix of the listed sites (basis: first listed site most
// significant), by tracing out the complement.
inline Matrix reduced_density_matrix(const StateVector& sv, const std::vector<std::size_t>& sites) {
    const auto d = static_cast<std::size_t>(sv.d);
    const std::size_t k = sites.size();
    std::size_t dk = 1;
    for (std::size_t i = 0; i < k; ++i) dk *= d;

    std::vector<std::size_t> stride(k);
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t s = 1;
        for (std::size_t j = sites[i] + 1; j < sv.num_sites; ++j) s *= d;
        stride[i] = s;
    }
    std::vector<std::size_t> offsets(dk);
    for (std::size_t p = 0; p < dk; ++p) {
        std::size_t off = 0, rem = p;
        for (std::size_t i = k; i-- > 0;) {
            off += (rem % d) * stride[i];
            rem /= d;
        }
        offsets[p] = off;
    }
    std::vector<std::size_t> other_strides;
    for (std::size_t site = 0; site < sv.num_sites; ++site) {
        bool on = false;
        for (std::size_t s : sites)
            if (s == site) on = true;
        if (!on) {
            std::size_t str = 1;
            for (std::size_t j = site + 1; j < sv.num_sites; ++j) str *= d;
            other_strides.push_back(str);
        }
    }
    Matrix rho = Matrix::Zero(static_cast<Eigen::Index>(dk), static_cast<Eigen::Index>(dk));
    const std::size_t num_bases = sv.size() / dk;
    for (std::size_t b = 0; b < num_bases; ++b) {
        std::size_t base = 0, rem = b;
        for (std::size_t i = other_strides.size(); i-- > 0;) {
            base += (rem % d) * other_strides[i];
            rem /= d;
        }
        for (std::size_t p = 0; p < dk; ++p)
            for (std::size_t q = 0; q < dk; ++q)
                rho(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) +=
                    sv.amps[base + offsets[p]] * std::conj(sv.amps[base + offsets[q]]);
    }
    return rho;
}

// Von Neumann entropy S = -tr(rho ln rho), natural log.
inline double entropy_of_density_matrix(const Matrix& rho) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho);
    double s = 0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        const double p = es.eigenvalues()[i];
        if (p > 1e-14) s -= p * std::log(p);
    }
    return s;
}

inline double entanglement_entropy(const StateVector& sv, const std::vector<std::size_t>& sites) {
    return entropy_of_density_matrix(reduced_density_matrix(sv, sites));
}

// Project the listed sites onto |0> and drop them, renormalizing is the
// caller's choice; used to compare embedded circuits that park ancillas in
// |0>. Returned state is over the remaining sites in ascending site order.
inline StateVector restrict_to_zero(const StateVector& sv,
                                    const std::vector<std::size_t>& ancilla_sites) {
    const auto d = static_cast<std::size_t>(sv.d);
    std::vector<bool> is_anc(sv.num_sites, false);
    for (std::size_t s : ancilla_sites) is_anc[s] = true;
    StateVector out;
    out.num_sites = sv.num_sites - ancilla_sites.size();
    out.d = sv.d;
    std::size_t n = 1;
    for (std::size_t i = 0; i < out.num_sites; ++i) n *= d;
    out.amps.assign(n, cplx(0.0, 0.0));
    std::vector<int> values(sv.num_sites, 0);
    for (std::size_t idx = 0; idx < sv.size(); ++idx) {
        std::size_t rem = idx;
        bool keep = true;
        std::size_t sub = 0;
        for (std::size_t i = sv.num_sites; i-- > 0;) {
            values[i] = static_cast<int>(rem % d);
            rem /= d;
        }
        for (std::size_t i = 0; i < sv.num_sites; ++i) {
            if (is_anc[i]) {
                if (values[i] != 0) {
                    keep = false;
                    break;
                }
            } else {
                sub = sub * d + static_cast<std::size_t>(values[i]);
            }
        }
        if (keep) out.amps[sub] = sv.amps[idx];
    }
    return out;
}

}  // namespace seqpeps
