// Command-line surface for the sequential tensor-network-state toolkit.
// Exit codes: 0 success, 1 verification failed, 2 invalid input.

#include <CLI11.hpp>

#include "seqpeps/io.hpp"

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace seqpeps;

namespace {

constexpr int kOk = 0;
constexpr int kVerifyFailed = 1;
constexpr int kInvalidInput = 2;

struct CliError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<int> parse_size(const std::string& s) {
    std::vector<int> dims;
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, 'x')) dims.push_back(std::stoi(part));
    if (dims.empty()) throw CliError("bad --size: " + s);
    return dims;
}

Coord parse_coord(const std::string& s) {
    Coord c;
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, ',')) c.push_back(std::stoi(part));
    return c;
}

Matrix pauli(const std::string& name) {
    Matrix m(2, 2);
    if (name == "z")
        m << 1, 0, 0, -1;
    else if (name == "x")
        m << 0, 1, 1, 0;
    else if (name == "y")
        m << 0, cplx{0, -1}, cplx{0, 1}, 0;
    else if (name == "id")
        m << 1, 0, 0, 1;
    else
        throw CliError("unknown observable '" + name + "' (use z, x, y, id)");
    return m;
}

Circuit load_circuit(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw CliError("cannot open circuit file " + path);
    json j = json::parse(f, nullptr, false);
    if (j.is_discarded()) throw CliError("circuit file " + path + " is not valid JSON");
    try {
        return circuit_from_json(j);
    } catch (const std::exception& e) {
        throw CliError(std::string("circuit file ") + path + ": " + e.what());
    }
}

void save_circuit(const Circuit& circ, const std::string& path,
                  std::optional<std::uint64_t> base_seed = {}) {
    std::ofstream f(path);
    if (!f) throw CliError("cannot open output file " + path);
    f << circuit_to_json(circ, base_seed).dump(2) << "\n";
}

void emit(const json& j, const std::string& out) {
    if (out.empty()) {
        std::cout << j.dump(2) << "\n";
    } else {
        std::ofstream f(out);
        if (!f) throw CliError("cannot open output file " + out);
        f << j.dump(2) << "\n";
    }
}

Circuit build_family(const std::string& family, const Lattice& lattice, int lp, int s,
                     const Coord& source, std::uint64_t seed) {
    if (family == "p-peps") return build_ppeps(lattice, lp, seed);
    if (family == "rp-peps") return build_rppeps(lattice, lp, source, seed);
    if (family == "isotns") return build_isotns_corner(lattice, s, seed);
    if (family == "sgs") return sgs_circuit(random_sgs(lattice, lp, seed));
    if (family == "f-peps") return build_fpeps(lattice, seed);
    if (family == "cluster") return cluster_state_circuit(lattice, source);
    throw CliError("unknown family '" + family + "'");
}

int cmd_gen(const std::string& family, const std::string& size, int d, int lp, int s,
            const std::string& source_str, std::uint64_t seed, const std::string& out) {
    Lattice lattice{parse_size(size), d, Boundary::Open};
    Coord source = source_str.empty() ? Coord(lattice.q(), 0) : parse_coord(source_str);
    Circuit circ = build_family(family, lattice, lp, s, source, seed);
    save_circuit(circ, out, seed);
    std::cout << "wrote " << out << " (" << circ.gates.size() << " gates)\n";
    return kOk;
}

int cmd_schedule(const std::string& family, const std::string& size, int lp, int s,
                 const std::string& source_str, const std::string& out) {
    Lattice lattice{parse_size(size), 2, Boundary::Open};
    Coord source = source_str.empty() ? Coord(lattice.q(), 0) : parse_coord(source_str);
    json j;
    if (family == "isotns") {
        Circuit circ = build_isotns_corner(lattice, s, 1);
        Schedule sched = layerize_supports(circuit_supports(circ));
        j["family"] = family;
        j["ordering"] = "corner wavefront";
        j["depth"] = sched.depth();
        j["formula"] = depth_formula(lattice, lp, DepthFamily::IsoTns);
        j["layers"] = schedule_to_json(sched)["layers"];
    } else {
        Ordering ord = radial_ordering(lattice, lp, source);
        Schedule sched = layerize(lattice, ord);
        j["family"] = family;
        j["ordering"] = ordering_to_json(ord);
        j["depth"] = sched.depth();
        j["formula"] = depth_formula(lattice, lp, DepthFamily::RpPeps);
        j["layers"] = schedule_to_json(sched)["layers"];
    }
    emit(j, out);
    return kOk;
}

int cmd_simulate(const std::string& circuit_path, const std::string& out) {
    Circuit circ = load_circuit(circuit_path);
    StateVector sv = simulate(circ);
    write_state(sv, out);
    std::cout << "wrote " << out << " (" << sv.amps.size() << " amplitudes)\n";
    return kOk;
}

int cmd_convert(const std::string& circuit_path, const std::string& network_dir,
                std::uint64_t pepo_seed, int pepo_lp, int pepo_d, const std::string& out) {
    if (!circuit_path.empty()) {
        if (network_dir.empty())
            throw CliError("convert --circuit requires --network <output dir>");
        Circuit circ = load_circuit(circuit_path);
        ArrowedNetwork net = circuit_to_network(circ);
        save_network(net, network_dir);
        std::cout << "wrote network manifest to " << network_dir << " (" << net.tensors.size()
                  << " tensors)\n";
        return kOk;
    }
    // PEPO decomposition of a single seeded plaquette unitary.
    const int lp = pepo_lp, d = pepo_d;
    const std::size_t dim = detail::ipow(d, static_cast<std::size_t>(lp) * lp);
    Tensor u = random_unitary(dim, pepo_seed);
    Pepo pepo = unitary_to_pepo(u, lp, lp, d);
    const double err = max_abs_diff(u, pepo_to_unitary(pepo));
    json j;
    j["plaquette_size"] = lp;
    j["d"] = d;
    j["seed"] = pepo_seed;
    j["recontraction_error"] = err;
    j["max_bond_dim"] = pepo.max_bond();
    j["single_gate_bond_bound"] = detail::ipow(d, static_cast<std::size_t>(lp) * lp);
    j["whole_state_bond_bound"] =
        detail::ipow(d, static_cast<std::size_t>(lp) * lp * lp * lp);
    emit(j, out);
    return err <= 1e-10 ? kOk : kVerifyFailed;
}

int cmd_verify(const std::string& circuit_path, const std::string& network_dir,
               const std::string& inclusion, const std::string& size, std::uint64_t seed,
               double tol, const std::string& out) {
    json j;
    bool pass = true;
    if (!network_dir.empty()) {
        ArrowedNetwork net = load_network(network_dir);
        NetworkCheck chk = verify_network_isometries(net, tol);
        j["check"] = "network isometries";
        j["max_residual"] = chk.max_residual;
        j["pass"] = chk.ok;
        pass = chk.ok;
    } else if (!circuit_path.empty()) {
        Circuit circ = load_circuit(circuit_path);
        ArrowedNetwork net = circuit_to_network(circ);
        NetworkCheck chk = verify_network_isometries(net, 1e-12);
        const double fid = fidelity(contract_network(net), simulate(circ));
        j["check"] = "conversion soundness";
        j["isometry_max_residual"] = chk.max_residual;
        j["contraction_fidelity"] = fid;
        pass = chk.ok && fid >= 1 - 1e-10;
        j["pass"] = pass;
    } else if (!inclusion.empty()) {
        Lattice lattice{parse_size(size), 2, Boundary::Open};
        if (inclusion == "sgs-rp-peps" || inclusion == "sgs-isotns") {
            SgsSpec spec = random_sgs(lattice, 2, seed);
            StateVector direct = simulate(sgs_circuit(spec));
            StateVector viaNet = contract_network(sgs_to_network(spec));
            StateVector viaPlq = simulate(sgs_plaquette_circuit(spec));
            const double f1 = fidelity(direct, viaNet);
            const double f2 = fidelity(direct, viaPlq);
            j["check"] = "sequentially generated state inclusion";
            j["fidelity_network"] = f1;
            j["fidelity_plaquette_circuit"] = f2;
            pass = f1 >= 1 - 1e-10 && f2 >= 1 - 1e-10;
        } else if (inclusion == "isotns-rp-peps") {
            Circuit iso = build_isotns_corner(lattice, 1, seed);
            Lattice big{{lattice.dims[0] + 2, lattice.dims[1] + 2}, 2, Boundary::Open};
            Circuit emb = embed_in_plaquettes(iso, 3, big);
            std::vector<std::size_t> extra;
            for (int r = 0; r < big.dims[0]; ++r)
                for (int c = 0; c < big.dims[1]; ++c)
                    if (r >= lattice.dims[0] || c >= lattice.dims[1])
                        extra.push_back(big.site_index({r, c}));
            StateVector embOnOrig = restrict_to_zero(simulate(emb), extra);
            const double f = fidelity(simulate(iso), embOnOrig);
            j["check"] = "isometric state embeds as restricted plaquette circuit";
            j["fidelity"] = f;
            pass = f >= 1 - 1e-10;
        } else {
            throw CliError("unknown --inclusion '" + inclusion +
                           "' (use sgs-rp-peps, isotns-rp-peps)");
        }
        j["pass"] = pass;
    } else {
        throw CliError("verify needs --circuit, --network, or --inclusion");
    }
    emit(j, out);
    return pass ? kOk : kVerifyFailed;
}

int cmd_photonic(const std::string& circuit_path, const std::string& size, std::uint64_t seed,
                 int mps_sites, const std::string& out) {
    PhotonicResult res;
    std::size_t m = 0;
    int d = 2;
    StateVector matter;
    if (mps_sites > 0) {
        // Single-source chain protocol: GHZ on the requested number of photons.
        Matrix h(2, 2);
        h << 1, 1, 1, -1;
        h /= std::sqrt(2.0);
        Matrix cnot = Matrix::Zero(4, 4);  // source controls the emitter
        cnot(0, 0) = cnot(1, 1) = cnot(3, 2) = cnot(2, 3) = 1;
        Matrix hI = Matrix::Zero(4, 4);  // H on the source register (most significant)
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
                for (int e = 0; e < 2; ++e) hI(2 * a + e, 2 * b + e) = h(a, b);
        std::vector<Matrix> seq;
        seq.push_back(cnot * hI);  // put the source in (|0>+|1>)/sqrt(2), copy to emitter
        for (int i = 1; i + 1 < mps_sites; ++i) seq.push_back(cnot);
        res = run_mps_protocol(seq, 2);
        m = 1;
    } else {
        Circuit circ;
        if (!circuit_path.empty()) {
            circ = load_circuit(circuit_path);
        } else {
            Lattice lattice{parse_size(size), d, Boundary::Open};
            circ = plaquette_circuit(lattice, row_major_ordering(lattice, 2), seed,
                                     Family::RpPeps);
        }
        matter = simulate(circ);
        res = circ.family == Family::FPeps    ? run_fpeps_protocol(circ)
              : circ.family == Family::IsoTns ? run_lgate_protocol(circ)
                                              : run_plaquette_protocol(circ);
        m = static_cast<std::size_t>(circ.lattice.dims[1]);
        d = circ.lattice.d;
    }
    json j = photonic_report_json(res, m, d);
    bool pass = res.deficit <= 1e-10;
    j["deficit_pass"] = pass;
    if (matter.num_sites > 0) {
        const double f = fidelity(res.photons, matter);
        j["matter_fidelity"] = f;
        pass = pass && f >= 1 - 1e-10;
    }
    j["pass"] = pass;
    emit(j, out);
    return pass ? kOk : kVerifyFailed;
}

int cmd_lightcone(const std::string& circuit_path, const std::string& target_str,
                  const std::string& op_name, const std::string& site_a_str,
                  const std::string& csv_path, const std::string& out) {
    Circuit circ = load_circuit(circuit_path);
    if (!csv_path.empty()) {
        // Connected-correlation scan from site a to every other site.
        const Coord a = parse_coord(site_a_str.empty() ? target_str : site_a_str);
        const Matrix op = pauli(op_name);
        std::vector<CorrelationEntry> rows;
        for (std::size_t b = 0; b < circ.lattice.num_sites(); ++b) {
            const Coord bc = circ.lattice.coord_of(b);
            if (same_coord(bc, a)) continue;
            CorrelationEntry e =
                correlation_via_lightcone(circ, op, op, circ.lattice.site_index(a), b);
            const cplx ea = expectation_via_lightcone(circ, op, {circ.lattice.site_index(a)}).value;
            const cplx eb = expectation_via_lightcone(circ, op, {b}).value;
            e.value -= ea * eb;
            rows.push_back(e);
        }
        write_correlation_csv(rows, csv_path);
        std::cout << "wrote " << csv_path << " (" << rows.size() << " rows)\n";
        return kOk;
    }
    const Coord t = parse_coord(target_str);
    LightconeExpectation r =
        expectation_via_lightcone(circ, pauli(op_name), {circ.lattice.site_index(t)});
    json j;
    j["target"] = t;
    j["observable"] = op_name;
    j["value"] = {r.value.real(), r.value.imag()};
    j["surviving_gates"] = r.surviving_gates;
    j["total_gates"] = r.total_gates;
    j["surviving_fraction"] = r.surviving_fraction;
    j["region_sites"] = r.region_sites;
    emit(j, out);
    return kOk;
}

int cmd_compare_brickwall(const std::string& size, int lp, const std::string& out) {
    Lattice lattice{parse_size(size), 2, Boundary::Open};
    const Coord source(lattice.q(), 0);
    Coord far = source;
    for (std::size_t i = 0; i < lattice.q(); ++i) far[i] = lattice.dims[i] - 1;
    BrickwallReport r = compare_with_brickwall(
        lattice, lp, source, {lattice.site_index(source), lattice.site_index(far)});
    emit(brickwall_report_json(r), out);
    return kOk;
}

int cmd_report(const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    // Gate-count scaling of sequential vs brickwall preparation on chains.
    json scaling = json::array();
    for (int n : {8, 12, 16}) {
        Lattice lattice{{n}, 2, Boundary::Open};
        BrickwallReport r =
            compare_with_brickwall(lattice, 2, {0}, {std::size_t{0}, std::size_t(n - 1)});
        json e = brickwall_report_json(r);
        e["num_sites"] = n;
        e["sequential_gates_per_site"] = double(r.sequential_gates) / n;
        e["brickwall_gates_per_site_length"] = double(r.brickwall_gates) / (double(n) * n);
        scaling.push_back(std::move(e));
    }
    emit(scaling, out_dir + "/brickwall_scaling.json");
    // Connected ZZ correlations from site 0 on a 12-site sequential GHZ chain.
    Circuit seq = ghz_chain_circuit(12);
    const Matrix z = pauli("z");
    std::vector<CorrelationEntry> rows;
    for (std::size_t b = 1; b < 12; ++b) {
        CorrelationEntry e = correlation_via_lightcone(seq, z, z, 0, b);
        const cplx ea = expectation_via_lightcone(seq, z, {0}).value;
        const cplx eb = expectation_via_lightcone(seq, z, {b}).value;
        e.value -= ea * eb;
        rows.push_back(e);
    }
    write_correlation_csv(rows, out_dir + "/ghz_chain_correlations.csv");
    std::cout << "wrote " << out_dir << "/brickwall_scaling.json and ghz_chain_correlations.csv\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sequential tensor-network-state circuit toolkit"};
    app.require_subcommand(1);

    std::string family = "rp-peps", size = "3x3", source_str, out, circuit_path, network_dir;
    std::string inclusion, target_str = "0,0", op_name = "z", site_a_str, csv_path;
    int d = 2, lp = 2, s = 1, mps_sites = 0;
    std::uint64_t seed = 1;
    double tol = kUnitaryTol;

    auto* g = app.add_subcommand("gen", "build a circuit file for a family");
    g->add_option("--family", family);
    g->add_option("--size", size);
    g->add_option("--d", d);
    g->add_option("--lp", lp);
    g->add_option("--s", s);
    g->add_option("--source", source_str);
    g->add_option("--seed", seed);
    g->add_option("--out", out)->required();

    auto* sc = app.add_subcommand("schedule", "layerize an ordering and compare depth to formula");
    sc->add_option("--family", family);
    sc->add_option("--size", size);
    sc->add_option("--lp", lp);
    sc->add_option("--s", s);
    sc->add_option("--source", source_str);
    sc->add_option("--out", out);

    auto* sim = app.add_subcommand("simulate", "exact statevector simulation of a circuit file");
    sim->add_option("--circuit", circuit_path)->required();
    sim->add_option("--out", out)->required();

    auto* cv = app.add_subcommand("convert", "circuit -> arrowed network, or plaquette gate -> operator network");
    cv->add_option("--circuit", circuit_path);
    cv->add_option("--network", network_dir);
    cv->add_option("--pepo-seed", seed);
    cv->add_option("--lp", lp);
    cv->add_option("--d", d);
    cv->add_option("--out", out);

    auto* vf = app.add_subcommand("verify", "isometry / inclusion / soundness checks");
    vf->add_option("--circuit", circuit_path);
    vf->add_option("--network", network_dir);
    vf->add_option("--inclusion", inclusion);
    vf->add_option("--size", size);
    vf->add_option("--seed", seed);
    vf->add_option("--tol", tol);
    vf->add_option("--out", out);

    auto* ph = app.add_subcommand("photonic", "run the source-array protocol and report");
    ph->add_option("--circuit", circuit_path);
    ph->add_option("--size", size);
    ph->add_option("--seed", seed);
    ph->add_option("--mps-sites", mps_sites);
    ph->add_option("--out", out);

    auto* lc = app.add_subcommand("lightcone", "expectation via causal-cone reduction");
    lc->add_option("--circuit", circuit_path)->required();
    lc->add_option("--target", target_str);
    lc->add_option("--op", op_name);
    lc->add_option("--site-a", site_a_str);
    lc->add_option("--csv", csv_path);
    lc->add_option("--out", out);

    auto* cb = app.add_subcommand("compare-brickwall", "sequential vs staggered-sweep gate budget");
    cb->add_option("--size", size);
    cb->add_option("--lp", lp);
    cb->add_option("--out", out);

    auto* rp = app.add_subcommand("report", "aggregate scan reports for plotting");
    rp->add_option("--out", out)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kInvalidInput;
    }

    try {
        if (g->parsed()) return cmd_gen(family, size, d, lp, s, source_str, seed, out);
        if (sc->parsed()) return cmd_schedule(family, size, lp, s, source_str, out);
        if (sim->parsed()) return cmd_simulate(circuit_path, out);
        if (cv->parsed()) return cmd_convert(circuit_path, network_dir, seed, lp, d, out);
        if (vf->parsed()) return cmd_verify(circuit_path, network_dir, inclusion, size, seed, tol, out);
        if (ph->parsed()) return cmd_photonic(circuit_path, size, seed, mps_sites, out);
        if (lc->parsed())
            return cmd_lightcone(circuit_path, target_str, op_name, site_a_str, csv_path, out);
        if (cb->parsed()) return cmd_compare_brickwall(size, lp, out);
        if (rp->parsed()) return cmd_report(out);
    } catch (const CliError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInvalidInput;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInvalidInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kVerifyFailed;
    }
    return kInvalidInput;
}
