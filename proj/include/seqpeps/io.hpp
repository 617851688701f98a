#pragma once

// Serialization: the "TNS1" binary tensor format with JSON sidecars, the
// circuit JSON schema, ordering/schedule JSON, network manifests, state
// export and the report payloads.

#include "seqpeps/families.hpp"
#include "seqpeps/lightcone.hpp"
#include "seqpeps/network.hpp"
#include "seqpeps/photonic.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace seqpeps {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// TNS1 binary tensors

// Layout: magic "TNS1", rank (u32 LE), dims (u32 LE each), then row-major
// data as interleaved (re, im) doubles (64-bit LE).
inline void write_tensor(const Tensor& t, const std::string& path,
                         const std::vector<std::string>& labels = {}) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("write_tensor: cannot open " + path);
    f.write("TNS1", 4);
    const auto rank = static_cast<std::uint32_t>(t.rank());
    f.write(reinterpret_cast<const char*>(&rank), 4);
    for (std::size_t i = 0; i < t.rank(); ++i) {
        const auto d = static_cast<std::uint32_t>(t.dim(i));
        f.write(reinterpret_cast<const char*>(&d), 4);
    }
    for (const auto& v : t.data()) {
        const double re = v.real(), im = v.imag();
        f.write(reinterpret_cast<const char*>(&re), 8);
        f.write(reinterpret_cast<const char*>(&im), 8);
    }
    if (!f) throw std::runtime_error("write_tensor: write failed for " + path);
    json side;
    side["format"] = "TNS1";
    side["rank"] = t.rank();
    side["dims"] = t.shape();
    side["labels"] = labels;
    std::ofstream sf(path + ".json");
    sf << side.dump(2) << "\n";
}

inline Tensor read_tensor(const std::string& path, std::vector<std::string>* labels = nullptr) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("read_tensor: cannot open " + path);
    char magic[4];
    f.read(magic, 4);
    if (!f || std::string(magic, 4) != "TNS1")
        throw std::runtime_error("read_tensor: bad magic in " + path);
    std::uint32_t rank = 0;
    f.read(reinterpret_cast<char*>(&rank), 4);
    std::vector<std::size_t> shape;
    for (std::uint32_t i = 0; i < rank; ++i) {
        std::uint32_t d = 0;
        f.read(reinterpret_cast<char*>(&d), 4);
        shape.push_back(d);
    }
    Tensor t(shape);
    for (auto& v : t.data()) {
        double re = 0, im = 0;
        f.read(reinterpret_cast<char*>(&re), 8);
        f.read(reinterpret_cast<char*>(&im), 8);
        v = cplx{re, im};
    }
    if (!f) throw std::runtime_error("read_tensor: truncated file " + path);
    if (labels) {
        labels->clear();
        std::ifstream sf(path + ".json");
        if (sf) {
            json side = json::parse(sf, nullptr, false);
            if (!side.is_discarded() && side.contains("labels"))
                for (const auto& l : side["labels"]) labels->push_back(l.get<std::string>());
        }
    }
    return t;
}

// ---------------------------------------------------------------------------
// Circuit JSON

inline json matrix_to_json(const Tensor& m) {
    json rows = json::array();
    for (std::size_t r = 0; r < m.dim(0); ++r) {
        json row = json::array();
        for (std::size_t c = 0; c < m.dim(1); ++c) {
            const cplx v = m.data()[r * m.dim(1) + c];
            row.push_back(json::array({v.real(), v.imag()}));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Tensor matrix_from_json(const json& rows) {
    const std::size_t n = rows.size();
    Tensor t({n, n});
    for (std::size_t r = 0; r < n; ++r) {
        if (rows[r].size() != n) throw std::runtime_error("circuit JSON: non-square matrix");
        for (std::size_t c = 0; c < n; ++c)
            t.data()[r * n + c] = cplx{rows[r][c][0].get<double>(), rows[r][c][1].get<double>()};
    }
    return t;
}

inline std::string boundary_name(Boundary b) {
    return b == Boundary::Open ? "open" : "periodic";
}

inline Family family_from_name(const std::string& s) {
    if (s == "p-peps") return Family::PPeps;
    if (s == "rp-peps") return Family::RpPeps;
    if (s == "isotns") return Family::IsoTns;
    if (s == "sgs") return Family::Sgs;
    if (s == "f-peps") return Family::FPeps;
    return Family::Custom;
}

// Schema: { lattice: {dims, d, boundary}, plaquette: {size}, family,
// params: {source, preferred, D, oc}, gates: [ {pos, support_kind,
// custom_support?, gate_kind: seed|matrix, seed?, matrix?} ] }.
// With base_seed set, gates whose matrix is reproducible from the anchor
// seed are stored as seeds instead of explicit matrices.
inline json circuit_to_json(const Circuit& circ, std::optional<std::uint64_t> base_seed = {}) {
    json j;
    j["lattice"] = {{"dims", circ.lattice.dims},
                    {"d", circ.lattice.d},
                    {"boundary", boundary_name(circ.lattice.boundary)}};
    j["plaquette"] = {{"size", circ.params.lp}};
    j["family"] = family_name(circ.family);
    j["params"] = {{"source", circ.params.source},
                   {"preferred", circ.params.preferred},
                   {"D", circ.params.bond_dim},
                   {"oc", circ.params.source}};
    json gates = json::array();
    for (const auto& g : circ.gates) {
        json e;
        e["pos"] = g.support[0];
        const bool is_plq = g.kind == GateKind::Plaquette && circ.params.lp > 0 &&
                            g.support == circ.lattice.plaquette_sites(g.support[0], circ.params.lp);
        const bool is_l = g.kind == GateKind::LShaped && circ.params.s > 0 &&
                          g.support == lgate_support(circ.lattice, g.support[0], circ.params.s);
        if (is_plq) {
            e["support_kind"] = "plaquette";
        } else if (is_l) {
            e["support_kind"] = "L";
        } else {
            e["support_kind"] = "custom";
            e["custom_support"] = g.support;
        }
        bool stored = false;
        if (base_seed) {
            const std::uint64_t seed = anchor_seed(*base_seed, g.support[0]);
            const Tensor ref = random_unitary(g.matrix.dim(0), seed);
            if (max_abs_diff(ref, g.matrix) < 1e-15) {
                e["gate_kind"] = "seed";
                e["seed"] = seed;
                stored = true;
            }
        }
        if (!stored) {
            e["gate_kind"] = "matrix";
            e["matrix"] = matrix_to_json(g.matrix);
        }
        gates.push_back(std::move(e));
    }
    j["gates"] = std::move(gates);
    return j;
}

inline Circuit circuit_from_json(const json& j) {
    Circuit circ;
    circ.lattice.dims = j.at("lattice").at("dims").get<std::vector<int>>();
    circ.lattice.d = j.at("lattice").at("d").get<int>();
    circ.lattice.boundary =
        j.at("lattice").at("boundary").get<std::string>() == "periodic" ? Boundary::Periodic
                                                                        : Boundary::Open;
    circ.params.lp = j.at("plaquette").at("size").get<int>();
    circ.family = family_from_name(j.at("family").get<std::string>());
    const auto& p = j.at("params");
    circ.params.source = p.at("source").get<Coord>();
    circ.params.preferred = p.at("preferred").get<std::vector<int>>();
    circ.params.bond_dim = p.at("D").get<int>();
    int s = 0, dd = 1;
    while (dd < circ.params.bond_dim) {
        dd *= circ.lattice.d;
        ++s;
    }
    circ.params.s = (circ.params.bond_dim > 0 && dd == circ.params.bond_dim) ? s : 0;

    for (const auto& e : j.at("gates")) {
        const Coord pos = e.at("pos").get<Coord>();
        const std::string sk = e.at("support_kind").get<std::string>();
        std::vector<Coord> sup;
        GateKind kind = GateKind::Custom;
        if (sk == "plaquette") {
            sup = circ.lattice.plaquette_sites(pos, circ.params.lp);
            kind = GateKind::Plaquette;
        } else if (sk == "L") {
            sup = lgate_support(circ.lattice, pos, circ.params.s);
            kind = GateKind::LShaped;
        } else {
            sup = e.at("custom_support").get<std::vector<Coord>>();
        }
        std::size_t dim = 1;
        for (std::size_t i = 0; i < sup.size(); ++i) dim *= static_cast<std::size_t>(circ.lattice.d);
        Tensor m;
        if (e.at("gate_kind").get<std::string>() == "seed")
            m = random_unitary(dim, e.at("seed").get<std::uint64_t>());
        else
            m = matrix_from_json(e.at("matrix"));
        circ.gates.push_back(Gate(std::move(m), std::move(sup), kind));
    }
    circ.check_supports();
    return circ;
}

// ---------------------------------------------------------------------------
// Ordering / schedule JSON

inline json ordering_to_json(const Ordering& ord) {
    json j;
    j["positions"] = ord.positions;
    j["plaquette_size"] = ord.plaquette_size;
    j["source"] = ord.source;
    j["preferred"] = ord.preferred;
    return j;
}

inline Ordering ordering_from_json(const json& j) {
    Ordering ord;
    ord.positions = j.at("positions").get<std::vector<Coord>>();
    ord.plaquette_size = j.at("plaquette_size").get<int>();
    ord.source = j.at("source").get<Coord>();
    ord.preferred = j.at("preferred").get<Preferred>();
    return ord;
}

inline json schedule_to_json(const Schedule& s) {
    json j;
    j["layers"] = s.layers;
    j["depth"] = s.depth();
    return j;
}

// ---------------------------------------------------------------------------
// State export

inline void write_state(const StateVector& sv, const std::string& path) {
    Tensor t({sv.amps.size()}, sv.amps);
    write_tensor(t, path);
    json side;
    side["format"] = "TNS1";
    side["rank"] = 1;
    side["dims"] = std::vector<std::size_t>{sv.amps.size()};
    side["labels"] = std::vector<std::string>{"amplitude"};
    side["d"] = sv.d;
    side["num_sites"] = sv.num_sites;
    side["index_convention"] = "site 0 most significant; site order is row-major over the lattice";
    std::ofstream sf(path + ".json");
    sf << side.dump(2) << "\n";
}

inline StateVector read_state(const std::string& path) {
    std::ifstream sf(path + ".json");
    if (!sf) throw std::runtime_error("read_state: missing sidecar for " + path);
    json side = json::parse(sf);
    StateVector sv;
    sv.d = side.at("d").get<int>();
    sv.num_sites = side.at("num_sites").get<std::size_t>();
    sv.amps = read_tensor(path).data();
    return sv;
}

// ---------------------------------------------------------------------------
// Network manifest

// JSON manifest (sites, bonds, arrows, dims) plus one TNS1 file per tensor.
inline void save_network(const ArrowedNetwork& net, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    json j;
    j["d"] = net.d;
    j["num_sites"] = net.num_sites;
    j["oc"] = net.oc;
    json tensors = json::array();
    for (std::size_t t = 0; t < net.tensors.size(); ++t) {
        const auto& nt = net.tensors[t];
        json e;
        e["position"] = nt.position;
        e["file"] = "tensor_" + std::to_string(t) + ".tns";
        json legs = json::array();
        for (const auto& leg : nt.legs) {
            if (leg.kind == NetLeg::Physical)
                legs.push_back({{"kind", "physical"},
                                {"site", leg.site == kNoIndex ? -1 : static_cast<long long>(leg.site)}});
            else
                legs.push_back({{"kind", "bond"}, {"bond", leg.bond}});
        }
        e["legs"] = std::move(legs);
        tensors.push_back(std::move(e));
        write_tensor(nt.tensor, dir + "/tensor_" + std::to_string(t) + ".tns");
    }
    j["tensors"] = std::move(tensors);
    json bonds = json::array();
    for (const auto& b : net.bonds)
        bonds.push_back({{"from", {b.from_tensor, b.from_leg}},
                         {"to", {b.to_tensor, b.to_leg}},
                         {"dim", b.dim}});
    j["bonds"] = std::move(bonds);
    std::ofstream f(dir + "/network.json");
    f << j.dump(2) << "\n";
}

inline ArrowedNetwork load_network(const std::string& dir) {
    std::ifstream f(dir + "/network.json");
    if (!f) throw std::runtime_error("load_network: missing manifest in " + dir);
    json j = json::parse(f);
    ArrowedNetwork net;
    net.d = j.at("d").get<int>();
    net.num_sites = j.at("num_sites").get<std::size_t>();
    net.oc = j.at("oc").get<std::size_t>();
    for (const auto& b : j.at("bonds"))
        net.bonds.push_back({b.at("from")[0].get<std::size_t>(), b.at("from")[1].get<std::size_t>(),
                             b.at("to")[0].get<std::size_t>(), b.at("to")[1].get<std::size_t>(),
                             b.at("dim").get<std::size_t>()});
    for (const auto& e : j.at("tensors")) {
        NetTensor nt;
        nt.position = e.at("position").get<Coord>();
        nt.tensor = read_tensor(dir + "/" + e.at("file").get<std::string>());
        for (const auto& leg : e.at("legs")) {
            if (leg.at("kind").get<std::string>() == "physical") {
                const long long s = leg.at("site").get<long long>();
                nt.legs.push_back(
                    NetLeg{NetLeg::Physical, s < 0 ? kNoIndex : static_cast<std::size_t>(s), kNoIndex});
            } else {
                nt.legs.push_back(NetLeg{NetLeg::Bond, kNoIndex, leg.at("bond").get<std::size_t>()});
            }
        }
        net.tensors.push_back(std::move(nt));
    }
    return net;
}

// ---------------------------------------------------------------------------
// Reports

inline json brickwall_report_json(const BrickwallReport& r) {
    json j;
    j["target_sites"] = r.target_sites;
    j["sequential"] = {{"gates", r.sequential_gates},
                       {"surviving", r.sequential_surviving},
                       {"fraction", r.sequential_fraction},
                       {"depth", r.sequential_depth}};
    j["brickwall"] = {{"min_sweeps", r.min_sweeps},
                      {"gates", r.brickwall_gates},
                      {"surviving", r.brickwall_surviving},
                      {"depth", r.brickwall_depth}};
    return j;
}

inline json photonic_report_json(const PhotonicResult& r, std::size_t m, int d) {
    json j;
    j["sources"] = m;
    j["d"] = d;
    j["photons"] = r.photon_count;
    j["disentangle_deficit"] = r.deficit;
    j["photons_untouched_by_unitaries"] = photons_untouched(r.log, m);
    // photon p is emitted for lattice site p in row-major order
    json map = json::array();
    for (std::size_t p = 0; p < r.photon_count; ++p) map.push_back({p, p});
    j["site_photon_map"] = std::move(map);
    json ops = json::array();
    for (const auto& op : r.log) {
        const char* k = op.kind == PhotonicOp::Unitary ? "unitary"
                        : op.kind == PhotonicOp::Emit  ? "emit"
                                                       : "swap";
        ops.push_back({{"op", k}, {"regs", op.regs}});
    }
    j["trace"] = std::move(ops);
    return j;
}

inline void write_correlation_csv(const std::vector<CorrelationEntry>& rows,
                                  const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("write_correlation_csv: cannot open " + path);
    f << "site_a,site_b,distance,re,im\n";
    for (const auto& r : rows)
        f << r.site_a << "," << r.site_b << "," << r.distance << "," << r.value.real() << ","
          << r.value.imag() << "\n";
}

}  // namespace seqpeps
