#pragma once

#include <map>
#include <string>
#include <vector>

#include "qnrg/model/types.hpp"

namespace qnrg::io {

// Everything a prediction needs, serializable as one JSON document.
struct ModelBundle {
    int schema_version = 1;
    model::MachineTopology topology;
    model::CasCostModel cas;
    model::StaticActiveTable static_active;
    model::MemoryPowerModel memory;
    double alpha0 = model::kDefaultAlpha;

    struct ImplModels {
        model::ThroughputModel throughput;
        model::CpuPowerCoefficients cpu;
    };
    std::map<std::string, ImplModels> impls;

    struct Provenance {
        std::map<std::string, std::string> input_digests;
        std::map<std::string, double> stats;
        std::vector<std::string> notes;
    };
    Provenance provenance;

    const ImplModels& impl(const std::string& id) const {
        auto it = impls.find(id);
        if (it == impls.end())
            throw LookupError("bundle has no implementation '" + id + "'");
        return it->second;
    }

    model::PowerModel power_model(const std::string& id) const {
        return model::PowerModel{static_active, impl(id).cpu, memory};
    }
};

std::string bundle_to_json(const ModelBundle& bundle);
ModelBundle bundle_from_json(const std::string& text);
void save_bundle(const std::string& path, const ModelBundle& bundle);
ModelBundle load_bundle(const std::string& path);

// FNV-1a digest of a file's bytes, recorded in bundle provenance.
std::string file_digest(const std::string& path);

}  // namespace qnrg::io
