#include "qnrg/io/bundle.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace qnrg::io {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json freq_table_to_json(const model::FreqTable& t) {
    ordered_json arr = ordered_json::array();
    auto entries = t.entries();
    std::sort(entries.begin(), entries.end());
    for (const auto& [f, v] : entries) arr.push_back(ordered_json::array({f, v}));
    return arr;
}

model::FreqTable freq_table_from_json(const ordered_json& j) {
    model::FreqTable t;
    for (const auto& e : j) t.set(e.at(0).get<double>(), e.at(1).get<double>());
    return t;
}

}  // namespace

std::string bundle_to_json(const ModelBundle& bundle) {
    ordered_json j;
    j["schema_version"] = bundle.schema_version;
    j["topology"] = {{"sockets", bundle.topology.sockets},
                     {"cores_per_socket", bundle.topology.cores_per_socket}};
    j["cas"] = {{"a", bundle.cas.a},
                {"a_prime", bundle.cas.a_prime},
                {"b_prime", bundle.cas.b_prime}};

    ordered_json stat;
    ordered_json act;
    for (model::Component c : model::kComponents) {
        stat[model::component_name(c)] = bundle.static_active.stat(c);
        act[model::component_name(c)] =
            freq_table_to_json(bundle.static_active.p_act[static_cast<int>(c)]);
    }
    j["static_active"] = {{"p_stat", stat}, {"p_act", act}};

    j["memory"] = {{"rho", bundle.memory.rho},
                   {"rho_prime", bundle.memory.rho_prime},
                   {"rho_uncore", bundle.memory.rho_uncore},
                   {"uncore_linear", bundle.memory.uncore_linear}};
    j["alpha0"] = bundle.alpha0;

    ordered_json impls;
    for (const auto& [id, m] : bundle.impls) {
        ordered_json impl;
        ordered_json lambda = ordered_json::array();
        for (const auto& [n, v] : m.throughput.lambda.entries())
            lambda.push_back(ordered_json::array({n, v}));
        impl["lambda"] = lambda;
        impl["cw_on"] = m.throughput.cw_on;
        impl["cw_off"] = m.throughput.cw_off;
        ordered_json lines = ordered_json::array();
        auto entries = m.throughput.hc_lines.entries();
        std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
            return a.f < b.f || (a.f == b.f && a.pairs < b.pairs);
        });
        for (const auto& e : entries)
            lines.push_back(
                ordered_json::array({e.f, e.pairs, e.line.intercept, e.line.slope}));
        impl["hc_lines"] = lines;
        impl["cpu"] = {{"A", m.cpu.A}, {"B", m.cpu.B}, {"alpha", m.cpu.alpha}};
        impls[id] = impl;
    }
    j["implementations"] = impls;

    ordered_json prov;
    prov["input_digests"] = bundle.provenance.input_digests;
    prov["stats"] = bundle.provenance.stats;
    prov["notes"] = bundle.provenance.notes;
    j["provenance"] = prov;
    return j.dump(2) + "\n";
}

ModelBundle bundle_from_json(const std::string& text) {
    ordered_json j = ordered_json::parse(text);
    ModelBundle b;
    b.schema_version = j.at("schema_version").get<int>();
    if (b.schema_version != 1)
        throw SchemaError("unsupported bundle schema version " +
                          std::to_string(b.schema_version));
    b.topology.sockets = j.at("topology").at("sockets").get<int>();
    b.topology.cores_per_socket = j.at("topology").at("cores_per_socket").get<int>();
    b.cas.a = j.at("cas").at("a").get<double>();
    b.cas.a_prime = j.at("cas").at("a_prime").get<double>();
    b.cas.b_prime = j.at("cas").at("b_prime").get<double>();

    for (model::Component c : model::kComponents) {
        const char* name = model::component_name(c);
        b.static_active.p_stat[static_cast<int>(c)] =
            j.at("static_active").at("p_stat").at(name).get<double>();
        b.static_active.p_act[static_cast<int>(c)] =
            freq_table_from_json(j.at("static_active").at("p_act").at(name));
    }

    b.memory.rho = j.at("memory").at("rho").get<double>();
    b.memory.rho_prime = j.at("memory").at("rho_prime").get<double>();
    b.memory.rho_uncore = j.at("memory").at("rho_uncore").get<double>();
    b.memory.uncore_linear = j.at("memory").at("uncore_linear").get<double>();
    b.alpha0 = j.at("alpha0").get<double>();

    for (const auto& [id, impl] : j.at("implementations").items()) {
        ModelBundle::ImplModels m;
        m.throughput.impl = id;
        for (const auto& e : impl.at("lambda"))
            m.throughput.lambda.set(e.at(0).get<int>(), e.at(1).get<double>());
        m.throughput.cw_on = impl.at("cw_on").get<double>();
        m.throughput.cw_off = impl.at("cw_off").get<double>();
        for (const auto& e : impl.at("hc_lines"))
            m.throughput.hc_lines.set(
                e.at(0).get<double>(), e.at(1).get<int>(),
                {e.at(2).get<double>(), e.at(3).get<double>()});
        m.cpu.A = impl.at("cpu").at("A").get<double>();
        m.cpu.B = impl.at("cpu").at("B").get<double>();
        m.cpu.alpha = impl.at("cpu").at("alpha").get<double>();
        b.impls[id] = std::move(m);
    }

    const auto& prov = j.at("provenance");
    for (const auto& [k, v] : prov.at("input_digests").items())
        b.provenance.input_digests[k] = v.get<std::string>();
    for (const auto& [k, v] : prov.at("stats").items())
        b.provenance.stats[k] = v.get<double>();
    for (const auto& n : prov.at("notes"))
        b.provenance.notes.push_back(n.get<std::string>());
    return b;
}

void save_bundle(const std::string& path, const ModelBundle& bundle) {
    std::ofstream out(path);
    if (!out) throw SchemaError("cannot write '" + path + "'");
    out << bundle_to_json(bundle);
}

ModelBundle load_bundle(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return bundle_from_json(buf.str());
}

std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError("cannot open '" + path + "' for digest");
    std::uint64_t hash = 0xcbf29ce484222325ull;
    char ch;
    while (in.get(ch)) {
        hash ^= static_cast<unsigned char>(ch);
        hash *= 0x100000001b3ull;
    }
    char buf[17];
    snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
    return std::string(buf);
}

}  // namespace qnrg::io
