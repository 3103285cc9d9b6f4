#include "qnrg/model/movidius.hpp"

#include <algorithm>

namespace qnrg::model {

double movidius_power(const MovidiusModel& model, int active_shaves,
                      const std::set<std::string>& units) {
    model.validate();
    if (active_shaves < 0 || active_shaves > 8)
        throw DomainError("movidius_power: active_shaves must be in [0,8]");
    if (active_shaves == 0) return model.p_stat;
    if (units.empty())
        throw DomainError("movidius_power: unit set must be nonempty when shaves are active");

    double dyn = 0.0;
    double max_o = 0.0;
    for (const std::string& id : units) {
        auto it = model.units.find(id);
        if (it == model.units.end())
            throw LookupError("movidius_power: unknown functional unit '" + id + "'");
        dyn += it->second.p_dyn;
        max_o = std::max(max_o, it->second.o_cost);
    }
    if (units.size() == 1) max_o = 0.0;  // inter-operational cost needs a combination
    return model.p_stat + active_shaves * (model.p_act + dyn + max_o);
}

MovidiusModel reference_movidius_model() {
    MovidiusModel m;
    m.p_stat = 62.63;
    m.p_act = 51.4;
    m.units = {
        {"SauXor", {3.05, 1.15}},  {"SauMul", {6.97, 1.83}},  {"VauXor", {17.57, 13.12}},
        {"VauMul", {32.78, 11.62}}, {"IauXor", {4.53, 1.07}},  {"IauMul", {3.98, 4.42}},
        {"CmuCpss", {1.00, 4.60}}, {"CmuCpivr", {6.41, 5.69}},
    };
    return m;
}

}  // namespace qnrg::model
