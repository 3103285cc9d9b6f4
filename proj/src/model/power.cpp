#include "qnrg/model/power.hpp"

#include <cmath>
#include <string>

#include "qnrg/model/throughput.hpp"

namespace qnrg::model {

double cpu_dynamic_power(const CpuPowerCoefficients& coeffs, double f_deci, int threads) {
    coeffs.validate();
    if (!(f_deci >= 1.0 && f_deci <= 100.0))
        throw DomainError("cpu_dynamic_power: frequency " + std::to_string(f_deci) +
                          " deci-GHz outside [1,100]");
    if (threads < 0) throw DomainError("cpu_dynamic_power: threads must be >= 0");
    return threads * (coeffs.A * std::pow(f_deci, coeffs.alpha) + coeffs.B);
}

double memory_dynamic_power(const MemoryPowerModel& model, int threads, double r, bool mixed) {
    model.validate();
    if (!(r >= 0.0 && r <= 1.0)) throw DomainError("memory_dynamic_power: r outside [0,1]");
    double p = model.rho * threads * r;
    if (mixed) p += model.rho_prime * threads * (1.0 - r);
    return p;
}

double uncore_dynamic_power(const MemoryPowerModel& model, int threads, double r) {
    model.validate();
    if (!(r >= 0.0 && r <= 1.0)) throw DomainError("uncore_dynamic_power: r outside [0,1]");
    return model.rho_uncore * threads * r + model.uncore_linear * threads;
}

PowerBreakdown power_breakdown(const WorkloadPoint& point, double r, const PowerModel& pmodel,
                               const MachineTopology& topo, bool mixed) {
    int threads = point.total_threads();
    int sockets = topo.active_sockets(threads);

    PowerBreakdown b;
    for (Component c : kComponents) {
        b.cell(PowerKind::Static, c) = pmodel.static_active.stat(c);
        b.cell(PowerKind::Active, c) = sockets * pmodel.static_active.act(c, point.f);
    }
    b.cell(PowerKind::Dynamic, Component::Cpu) =
        cpu_dynamic_power(pmodel.cpu, point.f * kDeciGhzPerGhz, threads);
    b.cell(PowerKind::Dynamic, Component::Memory) =
        memory_dynamic_power(pmodel.memory, threads, r, mixed);
    b.cell(PowerKind::Dynamic, Component::Uncore) =
        uncore_dynamic_power(pmodel.memory, threads, r);
    return b;
}

PredictionReport predict_power_and_energy(const WorkloadPoint& point,
                                          const ThroughputModel& tmodel,
                                          const PowerModel& pmodel, const CasCostModel& cas,
                                          const MachineTopology& topo, bool mixed) {
    PredictionReport rep;
    rep.regime = contention_regime(point, tmodel, cas, topo);
    rep.throughput = predict_throughput(point, tmodel, cas, topo);
    // The predicted throughput is accurate enough that no measured value is
    // needed to compute the occupancy ratio.
    rep.retry_ratio = retry_ratio(rep.throughput, point, tmodel.lambda.at(point.pairs));
    rep.breakdown = power_breakdown(point, rep.retry_ratio, pmodel, topo, mixed);
    rep.energy_per_op = rep.breakdown.total() / rep.throughput;
    return rep;
}

}  // namespace qnrg::model
