#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "qnrg/bench/harness.hpp"
#include "qnrg/calib/movidius_fit.hpp"
#include "qnrg/io/csv.hpp"
#include "qnrg/io/pipeline.hpp"
#include "qnrg/model/movidius.hpp"
#include "qnrg/model/throughput.hpp"
#include "qnrg/synth/machine.hpp"

namespace {

using nlohmann::ordered_json;
using namespace qnrg;

model::MachineTopology resolve_topology(int sockets_flag, int cores_flag) {
    model::MachineTopology topo{2, 8};
    if (const char* path = std::getenv("QNRG_TOPOLOGY")) {
        std::ifstream in(path);
        if (!in) throw SchemaError(std::string("QNRG_TOPOLOGY: cannot open ") + path);
        ordered_json j = ordered_json::parse(in);
        topo.sockets = j.at("sockets").get<int>();
        topo.cores_per_socket = j.at("cores_per_socket").get<int>();
    }
    if (sockets_flag > 0) topo.sockets = sockets_flag;
    if (cores_flag > 0) topo.cores_per_socket = cores_flag;
    topo.validate();
    return topo;
}

std::vector<double> parse_pw_range(const std::string& spec) {
    std::vector<double> out;
    auto colon1 = spec.find(':');
    if (colon1 == std::string::npos) {
        std::istringstream ss(spec);
        std::string item;
        while (std::getline(ss, item, ','))
            out.push_back(io::parse_double(item, "pw"));
        return out;
    }
    auto colon2 = spec.find(':', colon1 + 1);
    if (colon2 == std::string::npos)
        throw SchemaError("pw range must be start:stop:step, got '" + spec + "'");
    double start = io::parse_double(spec.substr(0, colon1), "pw start");
    double stop = io::parse_double(spec.substr(colon1 + 1, colon2 - colon1 - 1), "pw stop");
    double step = io::parse_double(spec.substr(colon2 + 1), "pw step");
    if (!(step > 0.0)) throw SchemaError("pw step must be > 0");
    for (double v = start; v <= stop + 1e-9 * step; v += step) out.push_back(v);
    return out;
}

io::RecordFormat format_from_string(const std::string& s) {
    if (s == "csv") return io::RecordFormat::Csv;
    if (s == "jsonl") return io::RecordFormat::JsonLines;
    throw SchemaError("format must be csv or jsonl");
}

ordered_json breakdown_to_json(const model::PowerBreakdown& b) {
    ordered_json j;
    for (model::PowerKind k :
         {model::PowerKind::Static, model::PowerKind::Active, model::PowerKind::Dynamic}) {
        ordered_json row;
        for (model::Component c : model::kComponents)
            row[model::component_name(c)] = b.cell(k, c);
        j[model::power_kind_name(k)] = row;
    }
    j["total"] = b.total();
    return j;
}

int cmd_bench(const std::string& variant, int pairs, double pw, double duration,
              double warmup, double freq, std::size_t capacity, bool no_pin,
              const model::MachineTopology& topo, const std::string& out_path,
              const std::string& format) {
    bench::BenchConfig cfg;
    cfg.variant = variant;
    cfg.pairs = pairs;
    cfg.pw = pw;
    cfg.duration = duration;
    cfg.warmup = warmup;
    cfg.frequency = freq;
    cfg.capacity = capacity;
    cfg.topology = topo;
    cfg.pin_threads = !no_pin;

    bench::BenchStats stats = bench::run_benchmark(cfg);
    if (!out_path.empty())
        io::write_measurements_file(out_path, {stats.record},
                                    format_from_string(format), /*append=*/true);

    ordered_json j;
    j["variant"] = variant;
    j["throughput_ops_per_s"] = stats.record.throughput();
    j["ops_ok"] = stats.record.ops_ok;
    j["duration_s"] = stats.record.duration;
    j["pinning"] = io::to_string(stats.record.pinning);
    j["total_enqueued"] = stats.total_enqueued;
    j["total_dequeued"] = stats.total_dequeued;
    j["residual_items"] = stats.residual_items;
    j["accounting_consistent"] =
        stats.total_enqueued == stats.total_dequeued + stats.residual_items;
    std::cout << j.dump(2) << '\n';
    return 0;
}

int cmd_calibrate(const std::string& records_path, const std::string& format,
                  const std::string& cas_path, const std::string& reggrid_path,
                  const std::string& app_path, const std::string& out_path,
                  const model::MachineTopology& topo, double alpha0, double lambda_factor) {
    auto records = io::parse_measurements_file(records_path, format_from_string(format));
    auto cas = io::parse_cas_samples_file(cas_path);
    auto grid = io::parse_reg_grid_file(reggrid_path);
    std::vector<io::MeasurementRecord> app;
    if (!app_path.empty())
        app = io::parse_measurements_file(app_path, format_from_string(format));

    io::CalibrationConfig cfg;
    cfg.topology = topo;
    cfg.alpha0 = alpha0;
    cfg.lambda_large_factor = lambda_factor;
    io::CalibrationResult result = io::calibrate_full(records, cas.on, cas.off, grid, app, cfg);

    result.bundle.provenance.input_digests["records"] = io::file_digest(records_path);
    result.bundle.provenance.input_digests["cas_samples"] = io::file_digest(cas_path);
    result.bundle.provenance.input_digests["reg_grid"] = io::file_digest(reggrid_path);
    if (!app_path.empty())
        result.bundle.provenance.input_digests["app_records"] = io::file_digest(app_path);
    if (!out_path.empty()) io::save_bundle(out_path, result.bundle);

    ordered_json j;
    j["implementations"] = ordered_json::array();
    for (const auto& [id, unused] : result.bundle.impls) j["implementations"].push_back(id);
    j["measurement_budget"] = result.budget;
    j["coverage_gaps"] = result.gaps;
    if (!out_path.empty()) j["bundle"] = out_path;
    std::cout << j.dump(2) << '\n';
    return result.gaps.empty() ? 0 : 3;
}

int cmd_predict(const std::string& bundle_path, std::vector<std::string> impls, int pairs,
                double freq, const std::string& pw_spec, bool mixed,
                const std::string& out_path, const std::string& csv_path) {
    io::ModelBundle bundle = io::load_bundle(bundle_path);
    if (impls.empty())
        for (const auto& [id, unused] : bundle.impls) impls.push_back(id);
    std::vector<double> pws = parse_pw_range(pw_spec);
    auto rows = io::predict_grid(bundle, impls, pairs, freq, pws, mixed);

    ordered_json report = ordered_json::array();
    for (const auto& row : rows) {
        ordered_json j;
        j["impl"] = row.point.impl;
        j["n"] = row.point.pairs;
        j["f"] = row.point.f;
        j["pw"] = row.point.pw;
        j["regime"] = model::regime_name(row.report.regime);
        j["throughput"] = row.report.throughput;
        j["retry_ratio"] = row.report.retry_ratio;
        j["power"] = breakdown_to_json(row.report.breakdown);
        j["energy_per_op"] = row.report.energy_per_op;
        report.push_back(j);
    }
    if (out_path.empty()) {
        std::cout << report.dump(2) << '\n';
    } else {
        std::ofstream out(out_path);
        if (!out) throw SchemaError("cannot write '" + out_path + "'");
        out << report.dump(2) << '\n';
    }

    if (!csv_path.empty()) {
        std::ofstream csv(csv_path);
        if (!csv) throw SchemaError("cannot write '" + csv_path + "'");
        csv << "impl,n,f,pw,regime,throughput,retry_ratio,p_static_cpu,p_static_memory,"
               "p_static_uncore,p_active_cpu,p_active_memory,p_active_uncore,p_dynamic_cpu,"
               "p_dynamic_memory,p_dynamic_uncore,p_total,energy_per_op\n";
        for (const auto& row : rows) {
            csv << row.point.impl << ',' << row.point.pairs << ','
                << io::format_double(row.point.f) << ',' << io::format_double(row.point.pw)
                << ',' << model::regime_name(row.report.regime) << ','
                << io::format_double(row.report.throughput) << ','
                << io::format_double(row.report.retry_ratio);
            for (model::PowerKind k : {model::PowerKind::Static, model::PowerKind::Active,
                                       model::PowerKind::Dynamic})
                for (model::Component c : model::kComponents)
                    csv << ',' << io::format_double(row.report.breakdown.cell(k, c));
            csv << ',' << io::format_double(row.report.breakdown.total()) << ','
                << io::format_double(row.report.energy_per_op) << '\n';
        }
    }
    return 0;
}

int cmd_synth(const std::string& records_path, const std::string& cas_path,
              const std::string& reggrid_path, const std::string& truth_path,
              const std::string& format, double noise, double quantum, double width,
              std::uint64_t seed, double lambda_factor) {
    synth::PlantedMachine machine = synth::default_plant();
    machine.noise_sigma = noise;
    machine.mem_step_quantum = quantum;
    machine.transient_width = width;
    if (seed) machine.seed = seed;

    auto records = synth::synth_calibration_records(machine, lambda_factor);
    io::write_measurements_file(records_path, records, format_from_string(format));

    io::CasSampleFile cas;
    cas.on = synth::synth_cas_samples(machine, false);
    cas.off = synth::synth_cas_samples(machine, true);
    std::ofstream cas_out(cas_path);
    if (!cas_out) throw SchemaError("cannot write '" + cas_path + "'");
    io::write_cas_samples(cas_out, cas);

    std::ofstream grid_out(reggrid_path);
    if (!grid_out) throw SchemaError("cannot write '" + reggrid_path + "'");
    io::write_reg_grid(grid_out, synth::synth_reg_grid(machine));

    if (!truth_path.empty()) {
        io::ModelBundle truth;
        truth.topology = machine.topology;
        truth.cas = machine.cas;
        truth.static_active = machine.static_active;
        truth.memory = machine.memory;
        for (const auto& id : machine.impl_ids()) {
            io::ModelBundle::ImplModels m;
            m.throughput = machine.throughput_model(id);
            m.cpu = machine.cpu.at(id);
            truth.impls[id] = m;
        }
        truth.provenance.notes.push_back("ground truth of the synthetic machine");
        io::save_bundle(truth_path, truth);
    }

    ordered_json j;
    j["records"] = records_path;
    j["record_count"] = records.size();
    j["cas_samples"] = cas_path;
    j["reg_grid"] = reggrid_path;
    if (!truth_path.empty()) j["truth_bundle"] = truth_path;
    std::cout << j.dump(2) << '\n';
    return 0;
}

int cmd_movidius(const std::vector<std::string>& units, int shaves,
                 const std::string& fit_path, const std::string& synth_path) {
    if (!synth_path.empty()) {
        auto runs = calib::synth_movidius_runs(model::reference_movidius_model(),
                                               calib::default_movidius_benchmarks());
        ordered_json j = ordered_json::array();
        for (const auto& run : runs) {
            ordered_json r;
            r["id"] = run.id;
            r["units"] = run.units;
            ordered_json pts = ordered_json::array();
            for (const auto& [k, p] : run.points) pts.push_back(ordered_json::array({k, p}));
            r["points"] = pts;
            j.push_back(r);
        }
        std::ofstream out(synth_path);
        if (!out) throw SchemaError("cannot write '" + synth_path + "'");
        out << j.dump(2) << '\n';
        std::cout << "wrote " << runs.size() << " benchmark sweeps to " << synth_path << '\n';
        return 0;
    }
    if (!fit_path.empty()) {
        std::ifstream in(fit_path);
        if (!in) throw SchemaError("cannot open '" + fit_path + "'");
        ordered_json j = ordered_json::parse(in);
        std::vector<calib::MovidiusRun> runs;
        for (const auto& r : j) {
            calib::MovidiusRun run;
            run.id = r.at("id").get<std::string>();
            for (const auto& u : r.at("units")) run.units.push_back(u.get<std::string>());
            for (const auto& p : r.at("points"))
                run.points.emplace_back(p.at(0).get<int>(), p.at(1).get<double>());
            runs.push_back(std::move(run));
        }
        calib::MovidiusFit fit = calib::fit_movidius(runs);
        ordered_json out;
        out["p_stat_mw"] = fit.model.p_stat;
        out["p_act_mw"] = fit.model.p_act;
        ordered_json units_json;
        for (const auto& [id, u] : fit.model.units) {
            const char* status = fit.o_status.at(id) == calib::OCostStatus::Exact
                                     ? "exact"
                                     : (fit.o_status.at(id) == calib::OCostStatus::UpperBound
                                            ? "upper_bound"
                                            : "absent");
            units_json[id] = {{"p_dyn_mw", u.p_dyn}, {"o_mw", u.o_cost}, {"o_status", status}};
        }
        out["units"] = units_json;
        out["residual_norm"] = fit.report.residual_norm;
        out["notes"] = fit.report.notes;
        std::cout << out.dump(2) << '\n';
        return 0;
    }
    if (units.empty()) throw SchemaError("movidius: give --units, --fit or --synth-runs");
    std::set<std::string> set(units.begin(), units.end());
    double p = model::movidius_power(model::reference_movidius_model(), shaves, set);
    std::cout << io::format_double(p) << " mW\n";
    return 0;
}

int cmd_selftest() {
    int failures = 0;
    auto check = [&](const std::string& name, bool ok) {
        std::cout << (ok ? "PASS " : "FAIL ") << name << '\n';
        if (!ok) ++failures;
    };
    auto rel_err = [](double a, double b) {
        return std::fabs(a - b) / std::fmax(1e-300, std::fmax(std::fabs(a), std::fabs(b)));
    };

    // Full calibration round trip on the noiseless fixture.
    synth::PlantedMachine machine = synth::default_plant();
    auto records = synth::synth_calibration_records(machine);
    io::CalibrationConfig cfg;
    cfg.topology = machine.topology;
    auto result = io::calibrate_full(records, synth::synth_cas_samples(machine, false),
                                     synth::synth_cas_samples(machine, true),
                                     synth::synth_reg_grid(machine), {}, cfg);
    check("calibration completes without coverage gaps", result.gaps.empty());

    double worst = 0.0;
    for (const auto& id : machine.impl_ids()) {
        const auto& tmodel = machine.throughput_model(id);
        model::PowerModel pmodel = machine.power_model(id);
        for (double f : machine.frequencies) {
            for (int n = 1; n <= 8; ++n) {
                for (double pw : {10.0, 100.0, 400.0, 1500.0}) {
                    model::WorkloadPoint point{id, n, f, pw};
                    auto planted = model::predict_power_and_energy(point, tmodel, pmodel,
                                                                   machine.cas,
                                                                   machine.topology);
                    auto fitted = io::predict_grid(result.bundle, {id}, n, f, {pw});
                    worst = std::max(worst,
                                     rel_err(planted.throughput, fitted[0].report.throughput));
                    worst = std::max(worst, rel_err(planted.energy_per_op,
                                                    fitted[0].report.energy_per_op));
                }
            }
        }
    }
    check("round trip reproduces planted predictions to 1e-9 (worst " +
              io::format_double(worst) + ")",
          worst < 1e-9);

    // Movidius: evaluation anchor and fit round trip.
    auto ref = model::reference_movidius_model();
    check("SauXor x8 evaluates to 498.23 mW",
          std::fabs(model::movidius_power(ref, 8, {"SauXor"}) - 498.23) < 1e-9);
    auto fit = calib::fit_movidius(
        calib::synth_movidius_runs(ref, calib::default_movidius_benchmarks()));
    check("movidius fit recovers static power",
          std::fabs(fit.model.p_stat - ref.p_stat) < 1e-9);
    check("movidius fit recovers activation power",
          std::fabs(fit.model.p_act - ref.p_act) < 1e-9);
    bool predictions_match = true;
    for (const auto& bench : calib::default_movidius_benchmarks()) {
        std::set<std::string> set(bench.begin(), bench.end());
        for (int k : {1, 4, 8})
            predictions_match =
                predictions_match && std::fabs(model::movidius_power(ref, k, set) -
                                               model::movidius_power(fit.model, k, set)) < 1e-9;
    }
    check("fitted movidius model matches reference on every benchmark", predictions_match);

    std::cout << (failures == 0 ? "selftest ok" : "selftest FAILED") << '\n';
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"analytical throughput/power/energy models for concurrent FIFO queues"};
    app.require_subcommand(1);

    int sockets_flag = 0, cores_flag = 0;
    app.add_option("--sockets", sockets_flag, "override topology socket count");
    app.add_option("--cores-per-socket", cores_flag, "override cores per socket");

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "run the queue benchmark");
    std::string variant = "a0", bench_out, bench_format = "csv";
    int pairs = 1;
    double pw = 0.0, duration = 1.0, warmup = 0.2, freq = 1.0;
    std::size_t capacity = std::size_t{1} << 16;
    bool no_pin = false;
    bench_cmd->add_option("--variant", variant, "queue variant id");
    bench_cmd->add_option("--pairs", pairs, "enqueuer/dequeuer pairs");
    bench_cmd->add_option("--pw", pw, "parallel work units");
    bench_cmd->add_option("--duration", duration, "measured seconds");
    bench_cmd->add_option("--warmup", warmup, "warmup seconds (uncounted)");
    bench_cmd->add_option("--freq", freq, "core frequency in GHz (echoed into the record)");
    bench_cmd->add_option("--capacity", capacity, "queue capacity");
    bench_cmd->add_flag("--no-pin", no_pin, "skip thread pinning");
    bench_cmd->add_option("--out", bench_out, "append the record to this file");
    bench_cmd->add_option("--format", bench_format, "csv or jsonl");

    // calibrate
    auto* cal_cmd = app.add_subcommand("calibrate", "fit a model bundle from measurements");
    std::string cal_records, cal_format = "csv", cal_cas, cal_grid, cal_app, cal_out;
    double alpha0 = model::kDefaultAlpha, lambda_factor = 100.0;
    cal_cmd->add_option("--records", cal_records, "measurement records")->required();
    cal_cmd->add_option("--format", cal_format, "csv or jsonl");
    cal_cmd->add_option("--cas", cal_cas, "cas timing samples")->required();
    cal_cmd->add_option("--reggrid", cal_grid, "register-op power grid")->required();
    cal_cmd->add_option("--app-records", cal_app, "mixed-workload runs for rho'");
    cal_cmd->add_option("--out", cal_out, "bundle output path");
    cal_cmd->add_option("--alpha0", alpha0, "fixed CPU power-law exponent");
    cal_cmd->add_option("--lambda-factor", lambda_factor,
                        "required pw margin of lambda runs over the frontier");

    // predict
    auto* pred_cmd = app.add_subcommand("predict", "evaluate a bundle over a pw sweep");
    std::string pred_bundle, pred_pw = "0:2000:50", pred_out, pred_csv;
    std::vector<std::string> pred_impls;
    int pred_pairs = 4;
    double pred_freq = 3.4;
    bool pred_mixed = false;
    pred_cmd->add_option("--bundle", pred_bundle, "model bundle")->required();
    pred_cmd->add_option("--impl", pred_impls, "implementation ids (default: all)");
    pred_cmd->add_option("--pairs", pred_pairs, "enqueuer/dequeuer pairs");
    pred_cmd->add_option("--freq", pred_freq, "frequency in GHz");
    pred_cmd->add_option("--pw", pred_pw, "sweep start:stop:step or comma list");
    pred_cmd->add_flag("--mixed", pred_mixed, "mixed parallel-section memory model");
    pred_cmd->add_option("--out", pred_out, "report JSON path (default stdout)");
    pred_cmd->add_option("--csv", pred_csv, "plot-ready CSV path");

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "generate synthetic measurements");
    std::string synth_records = "records.csv", synth_cas = "cas_samples.csv";
    std::string synth_grid = "reg_grid.csv", synth_truth, synth_format = "csv";
    double noise = 0.0, quantum = 0.0, width = 0.0;
    std::uint64_t seed = 0;
    double synth_lambda_factor = 1e12;
    synth_cmd->add_option("--out-records", synth_records, "records output");
    synth_cmd->add_option("--out-cas", synth_cas, "cas samples output");
    synth_cmd->add_option("--out-reggrid", synth_grid, "register-op grid output");
    synth_cmd->add_option("--out-truth", synth_truth, "ground-truth bundle output");
    synth_cmd->add_option("--format", synth_format, "csv or jsonl");
    synth_cmd->add_option("--noise", noise, "relative noise sigma");
    synth_cmd->add_option("--quantum", quantum, "memory power step quantum in W");
    synth_cmd->add_option("--transient", width, "frontier transient width in work units");
    synth_cmd->add_option("--seed", seed, "noise seed");
    synth_cmd->add_option("--lambda-factor", synth_lambda_factor,
                          "pw margin of the lambda sweeps over the frontier");

    // movidius
    auto* mov_cmd = app.add_subcommand("movidius", "embedded power model");
    std::vector<std::string> mov_units;
    int shaves = 1;
    std::string mov_fit, mov_synth;
    mov_cmd->add_option("--units", mov_units, "functional units to evaluate");
    mov_cmd->add_option("--shaves", shaves, "active SHAVE cores");
    mov_cmd->add_option("--fit", mov_fit, "fit a model from a runs JSON file");
    mov_cmd->add_option("--synth-runs", mov_synth, "write reference benchmark sweeps");

    // selftest
    app.add_subcommand("selftest", "round-trip sanity suite");

    CLI11_PARSE(app, argc, argv);

    try {
        model::MachineTopology topo = resolve_topology(sockets_flag, cores_flag);
        if (bench_cmd->parsed())
            return cmd_bench(variant, pairs, pw, duration, warmup, freq, capacity, no_pin,
                             topo, bench_out, bench_format);
        if (cal_cmd->parsed())
            return cmd_calibrate(cal_records, cal_format, cal_cas, cal_grid, cal_app, cal_out,
                                 topo, alpha0, lambda_factor);
        if (pred_cmd->parsed())
            return cmd_predict(pred_bundle, pred_impls, pred_pairs, pred_freq, pred_pw,
                               pred_mixed, pred_out, pred_csv);
        if (synth_cmd->parsed())
            return cmd_synth(synth_records, synth_cas, synth_grid, synth_truth, synth_format,
                             noise, quantum, width, seed, synth_lambda_factor);
        if (mov_cmd->parsed()) return cmd_movidius(mov_units, shaves, mov_fit, mov_synth);
        return cmd_selftest();
    } catch (const Error& e) {
        ordered_json j;
        j["error"] = {{"kind", e.kind()}, {"message", e.what()}};
        std::cerr << j.dump() << '\n';
        return 2;
    } catch (const std::exception& e) {
        ordered_json j;
        j["error"] = {{"kind", "internal"}, {"message", e.what()}};
        std::cerr << j.dump() << '\n';
        return 2;
    }
}
