#include "qnrg/synth/machine.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "qnrg/model/power.hpp"
#include "qnrg/model/throughput.hpp"

namespace qnrg::synth {

const model::ThroughputModel& PlantedMachine::throughput_model(const std::string& impl) const {
    auto it = throughput.find(impl);
    if (it == throughput.end())
        throw LookupError("planted machine has no implementation '" + impl + "'");
    return it->second;
}

model::PowerModel PlantedMachine::power_model(const std::string& impl) const {
    auto it = cpu.find(impl);
    if (it == cpu.end())
        throw LookupError("planted machine has no cpu coefficients for '" + impl + "'");
    return model::PowerModel{static_active, it->second, memory};
}

std::vector<std::string> PlantedMachine::impl_ids() const {
    std::vector<std::string> ids;
    for (const auto& [id, unused] : throughput) ids.push_back(id);
    return ids;
}

PlantedMachine default_plant() {
    PlantedMachine m;
    m.topology = {2, 8};
    m.cas = {1.2e-4, 2.0e-4, 2.5e-5};
    m.seed = 0x9e3779b97f4a7c15ull;

    model::LambdaTable lambda;
    for (int n = 1; n <= 8; ++n) lambda.set(n, 250000.0 * (1.0 - 0.015 * (n - 1)));

    auto make_impl = [&](const std::string& id, double cw_on, double cw_off, double scale) {
        model::ThroughputModel t;
        t.impl = id;
        t.lambda = lambda;
        t.cw_on = cw_on;
        t.cw_off = cw_off;
        for (double f : m.frequencies)
            for (int n = 2; n <= 8; ++n)
                t.hc_lines.set(f, n,
                               {500.0 * f * (1.0 + 0.1 * n) * scale, 12.0 * f * scale});
        m.throughput[id] = t;
    };
    make_impl("a0", 3.0, 7.0, 1.0);
    make_impl("a2", 4.5, 9.0, 0.9);

    m.cpu["a0"] = {0.0012, 0.055, model::kDefaultAlpha};
    m.cpu["a2"] = {0.0013, 0.049, model::kDefaultAlpha};

    m.static_active.p_stat = {25.0, 8.0, 10.0};
    for (auto [f, w] : {std::pair{1.2, 2.5}, {2.3, 4.0}, {3.4, 6.5}})
        m.static_active.p_act[static_cast<int>(model::Component::Cpu)].set(f, w);
    // The reference model carries no per-socket activation power for the
    // memory and uncore planes.

    m.memory = {0.35, 0.2, 0.08, 0.05};

    m.instruction_rows["cas"] = {0.001392, 0.0510, 1.6415};
    m.instruction_rows["fpdiv"] = {0.001038, 0.0585, 1.7226};
    m.instruction_rows["add"] = {0.001004, 0.0912, 1.8148};
    m.instruction_rows["pause"] = {0.000854, 0.0736, 1.7920};
    return m;
}

namespace {

struct NoiseStream {
    std::mt19937_64 rng;
    std::normal_distribution<double> normal{0.0, 1.0};
    double sigma = 0.0;

    double apply(double value) {
        if (sigma == 0.0) return value;
        return value * (1.0 + sigma * normal(rng));
    }
};

double blended_throughput(const PlantedMachine& machine, const model::WorkloadPoint& point) {
    const auto& tmodel = machine.throughput_model(point.impl);
    if (machine.transient_width <= 0.0)
        return model::predict_throughput(point, tmodel, machine.cas, machine.topology);

    double crit = model::frontier_pw(point.pairs, point.f, tmodel, machine.cas,
                                     machine.topology);
    double t_ps = model::parallel_section_time(point.pw, tmodel.lambda.at(point.pairs),
                                               point.f);
    double t_rl = model::retry_loop_time_lc(point, tmodel, machine.cas, machine.topology);
    double lc = model::throughput_low_contention(point.pairs, t_ps, t_rl);
    if (point.pairs < 2 || !tmodel.hc_lines.contains(point.f, point.pairs)) return lc;
    const auto& line = tmodel.hc_lines.at(point.f, point.pairs);
    double hc = line.intercept + line.slope * point.pw;
    // Logistic blend across the transient window around the frontier.
    double mix = 1.0 / (1.0 + std::exp(-(point.pw - crit) / machine.transient_width));
    return mix * lc + (1.0 - mix) * hc;
}

io::MeasurementRecord make_record(const PlantedMachine& machine,
                                  const model::WorkloadPoint& point, bool mixed,
                                  NoiseStream& noise) {
    point.validate();
    const auto& tmodel = machine.throughput_model(point.impl);
    double throughput = mixed ? model::predict_throughput(point, tmodel, machine.cas,
                                                          machine.topology)
                              : blended_throughput(machine, point);
    double r = model::retry_ratio(throughput, point, tmodel.lambda.at(point.pairs));
    model::PowerBreakdown b = model::power_breakdown(
        point, r, machine.power_model(point.impl), machine.topology, mixed);

    double mem_dyn = b.cell(model::PowerKind::Dynamic, model::Component::Memory);
    if (machine.mem_step_quantum > 0.0)
        mem_dyn = std::round(mem_dyn / machine.mem_step_quantum) * machine.mem_step_quantum;

    io::MeasurementRecord rec;
    rec.impl = point.impl;
    rec.pairs = point.pairs;
    rec.f = point.f;
    rec.pw = point.pw;
    rec.duration = 1.0;
    rec.ops_ok = noise.apply(throughput) * rec.duration;
    rec.sockets_active = machine.topology.active_sockets(point.total_threads());
    rec.pinning = io::PinningTag::Dense;
    rec.loc = mixed ? io::LocalityTag::Mixed
                    : (machine.topology.intra_socket(point.pairs) ? io::LocalityTag::On
                                                                  : io::LocalityTag::Off);
    rec.p_cpu = noise.apply(b.component_total(model::Component::Cpu));
    rec.p_mem = noise.apply(b.cell(model::PowerKind::Static, model::Component::Memory) +
                            b.cell(model::PowerKind::Active, model::Component::Memory) +
                            mem_dyn);
    rec.p_unc = noise.apply(b.component_total(model::Component::Uncore));
    rec.source = io::RecordSource::Synth;
    return rec;
}

}  // namespace

std::vector<io::MeasurementRecord> synth_measurements(
    const PlantedMachine& machine, const std::vector<model::WorkloadPoint>& points) {
    NoiseStream noise{std::mt19937_64{machine.seed}, {}, machine.noise_sigma};
    std::vector<io::MeasurementRecord> records;
    records.reserve(points.size());
    for (const auto& p : points) records.push_back(make_record(machine, p, false, noise));
    return records;
}

io::MeasurementRecord synth_app_measurement(const PlantedMachine& machine,
                                            const model::WorkloadPoint& point) {
    NoiseStream noise{std::mt19937_64{machine.seed ^ 0xa5a5a5a5ull}, {},
                      machine.noise_sigma};
    return make_record(machine, point, true, noise);
}

std::vector<io::MeasurementRecord> synth_calibration_records(const PlantedMachine& machine,
                                                             double lambda_pw_factor) {
    if (lambda_pw_factor < 100.0)
        throw DomainError("synth_calibration_records: lambda factor below the safe minimum");
    std::vector<model::WorkloadPoint> points;
    const double f0 = *std::max_element(machine.frequencies.begin(), machine.frequencies.end());
    const auto impls = machine.impl_ids();
    const std::string& lambda_impl = impls.front();
    const auto& lead = machine.throughput_model(lambda_impl);

    // Lambda sweeps: one very long parallel section per pair count.
    for (const auto& [n, lambda_n] : lead.lambda.entries()) {
        model::WorkloadPoint p{lambda_impl, n, f0, 0.0};
        double t_rl = model::retry_loop_time_lc(p, lead, machine.cas, machine.topology);
        p.pw = lambda_pw_factor * t_rl * lambda_n * f0;
        points.push_back(p);
    }

    int n_on = machine.topology.cores_per_socket / 2;
    int n_off = lead.lambda.entries().rbegin()->first;
    for (const auto& impl : impls) {
        const auto& tmodel = machine.throughput_model(impl);

        // Low-contention pair at a shared pw comfortably above both frontiers.
        double pw_lc = 2.0 * std::max(model::frontier_pw(n_on, f0, tmodel, machine.cas,
                                                         machine.topology),
                                      model::frontier_pw(n_off, f0, tmodel, machine.cas,
                                                         machine.topology));
        points.push_back({impl, n_on, f0, pw_lc});
        points.push_back({impl, n_off, f0, pw_lc});

        // Two congested points per (frequency, pair count).
        for (double f : machine.frequencies) {
            for (const auto& [n, unused] : tmodel.lambda.entries()) {
                if (n < 2) continue;
                double crit =
                    model::frontier_pw(n, f, tmodel, machine.cas, machine.topology);
                points.push_back({impl, n, f, 0.2 * crit});
                points.push_back({impl, n, f, 0.5 * crit});
            }
        }

        // Powered runs: a frequency pair for the CPU fit plus a second pw at
        // the top frequency to separate the uncore intensity from its linear
        // term.
        double f_lo = *std::min_element(machine.frequencies.begin(),
                                        machine.frequencies.end());
        points.push_back({impl, n_on, f_lo, 1000.0});
        points.push_back({impl, n_on, f0, 1000.0});
        points.push_back({impl, n_on, f0, 2000.0});
    }
    return synth_measurements(machine, points);
}

std::vector<calib::CasSample> synth_cas_samples(const PlantedMachine& machine,
                                                bool off_socket) {
    std::vector<calib::CasSample> samples;
    for (double f : machine.frequencies) {
        double t = off_socket ? machine.cas.b_prime + machine.cas.a_prime / f
                              : machine.cas.a / f;
        samples.push_back({f, t});
    }
    return samples;
}

std::vector<calib::PowerGridCell> synth_reg_grid(const PlantedMachine& machine) {
    const int c = machine.topology.cores_per_socket;
    const struct {
        int sockets;
        int threads;
    } cells[] = {{2, 2 * c}, {2, 2 * c - 2}, {2, c + 2}, {1, c}};

    std::vector<calib::PowerGridCell> grid;
    for (const auto& op : {std::string("add"), std::string("pause")}) {
        const auto& row = machine.instruction_rows.at(op);
        for (double f : machine.frequencies) {
            for (const auto& cell : cells) {
                calib::PowerGridCell g;
                g.op = op;
                g.f = f;
                g.sockets = cell.sockets;
                g.threads = cell.threads;
                for (int x = 0; x < 3; ++x) {
                    auto comp = static_cast<model::Component>(x);
                    g.power[x] = machine.static_active.stat(comp) +
                                 cell.sockets * machine.static_active.act(comp, f);
                }
                // Register operations only heat the CPU plane.
                g.power[0] += model::cpu_dynamic_power(row, f * model::kDeciGhzPerGhz,
                                                       cell.threads);
                grid.push_back(g);
            }
        }
    }
    return grid;
}

std::vector<calib::CpuSample> synth_instruction_sweep(const PlantedMachine& machine,
                                                      const std::string& row) {
    auto it = machine.instruction_rows.find(row);
    if (it == machine.instruction_rows.end())
        throw LookupError("no instruction row '" + row + "'");
    std::vector<calib::CpuSample> samples;
    for (int fd = 12; fd <= 34; fd += 2)
        samples.push_back({static_cast<double>(fd),
                           model::cpu_dynamic_power(it->second, fd, 1)});
    return samples;
}

}  // namespace qnrg::synth
