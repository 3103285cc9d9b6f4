#include "qnrg/io/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "qnrg/model/throughput.hpp"

namespace qnrg::io {

namespace {

using model::nearly_equal;

double component_baseline(const ModelBundle& bundle, model::Component c, double f,
                          int sockets) {
    return bundle.static_active.stat(c) + sockets * bundle.static_active.act(c, f);
}

struct PowerFits {
    bool have_cpu = false;
    model::CpuPowerCoefficients cpu;
    bool have_rho = false;
    double rho = 0.0;
    bool have_uncore = false;
    double rho_uncore = 0.0;
    double uncore_linear = 0.0;
};

}  // namespace

CalibrationResult calibrate_full(const std::vector<MeasurementRecord>& records,
                                 const std::vector<calib::CasSample>& cas_on,
                                 const std::vector<calib::CasSample>& cas_off,
                                 const std::vector<calib::PowerGridCell>& reg_grid,
                                 const std::vector<MeasurementRecord>& app_records,
                                 const CalibrationConfig& cfg) {
    if (records.empty()) throw CalibrationGapError("calibrate: no measurement records");
    for (const auto& rec : records) rec.validate();

    CalibrationResult out;
    ModelBundle& bundle = out.bundle;
    bundle.topology = cfg.topology;
    bundle.alpha0 = cfg.alpha0;
    bundle.cas = calib::fit_cas_cost(cas_on, cas_off);

    calib::DerivedPower derived = calib::derive_static_active_dynamic(reg_grid, cfg.topology);
    bundle.static_active = derived.table;
    for (const auto& [key, value] : derived.report.spread)
        bundle.provenance.stats[key] = value;

    // Reference frequency and lambda sweeps: the largest-pw record marks both.
    const MeasurementRecord* longest = &records.front();
    for (const auto& rec : records)
        if (rec.pw > longest->pw) longest = &rec;
    const double f0 = longest->f;
    const std::string lambda_impl = longest->impl;

    std::map<int, const MeasurementRecord*> lambda_runs;
    for (const auto& rec : records) {
        if (rec.impl != lambda_impl || !nearly_equal(rec.f, f0)) continue;
        auto it = lambda_runs.find(rec.pairs);
        if (it == lambda_runs.end() || rec.pw > it->second->pw) lambda_runs[rec.pairs] = &rec;
    }
    std::vector<MeasurementRecord> lambda_records;
    std::set<const MeasurementRecord*> consumed;
    for (const auto& [n, rec] : lambda_runs) {
        lambda_records.push_back(*rec);
        consumed.insert(rec);
    }
    model::LambdaTable lambda = calib::fit_lambda(lambda_records);

    std::set<std::string> impl_ids;
    for (const auto& rec : records) impl_ids.insert(rec.impl);

    for (const auto& impl : impl_ids) {
        // Low-contention on/off pair: the largest pw measured both intra- and
        // inter-socket for this implementation.
        std::vector<const MeasurementRecord*> candidates;
        for (const auto& rec : records)
            if (rec.impl == impl && nearly_equal(rec.f, f0) && !consumed.count(&rec))
                candidates.push_back(&rec);
        std::sort(candidates.begin(), candidates.end(),
                  [](const MeasurementRecord* a, const MeasurementRecord* b) {
                      return a->pw > b->pw;
                  });
        const MeasurementRecord* rec_on = nullptr;
        const MeasurementRecord* rec_off = nullptr;
        for (size_t i = 0; i < candidates.size() && !rec_off; ++i) {
            for (size_t k = 0; k < candidates.size(); ++k) {
                if (i == k || !nearly_equal(candidates[i]->pw, candidates[k]->pw)) continue;
                const auto *a = candidates[i], *b = candidates[k];
                if (!cfg.topology.intra_socket(a->pairs)) std::swap(a, b);
                if (cfg.topology.intra_socket(a->pairs) &&
                    !cfg.topology.intra_socket(b->pairs)) {
                    rec_on = a;
                    rec_off = b;
                    break;
                }
            }
        }
        if (!rec_on) {
            out.gaps.push_back(impl + ": no low-contention on/off pair at f0");
            continue;
        }
        consumed.insert(rec_on);
        consumed.insert(rec_off);

        ModelBundle::ImplModels models;
        models.throughput.impl = impl;
        models.throughput.lambda = lambda;
        auto [cw_on, cw_off] =
            calib::fit_cw_pair(*rec_on, *rec_off, lambda, bundle.cas, f0, cfg.topology);
        models.throughput.cw_on = cw_on;
        models.throughput.cw_off = cw_off;
        bundle.impls[impl] = std::move(models);
    }
    if (bundle.impls.empty())
        throw CalibrationGapError("calibrate: no implementation has a usable record set");

    // Congested lines: everything below the fitted frontier, least squares
    // per (f, n) cell (exact for the two-point protocol).
    for (auto& [impl, models] : bundle.impls) {
        std::map<std::pair<long long, int>, std::vector<const MeasurementRecord*>> cells;
        std::map<std::pair<long long, int>, double> cell_f;
        for (const auto& rec : records) {
            if (rec.impl != impl || consumed.count(&rec)) continue;
            if (!lambda.contains(rec.pairs)) {
                out.gaps.push_back(impl + ": no lambda for n=" + std::to_string(rec.pairs));
                continue;
            }
            double crit = model::frontier_pw(rec.pairs, rec.f, models.throughput, bundle.cas,
                                             cfg.topology);
            if (rec.pw >= crit) continue;  // low-contention leftovers
            long long fkey = std::llround(rec.f * 1e6);
            cells[{fkey, rec.pairs}].push_back(&rec);
            cell_f[{fkey, rec.pairs}] = rec.f;
        }
        for (const auto& [key, cell] : cells) {
            if (cell.size() < 2) {
                out.gaps.push_back(impl + ": only one congested run for f=" +
                                   std::to_string(cell_f[key]) + " n=" +
                                   std::to_string(key.second));
                continue;
            }
            model::HcLine line;
            if (cell.size() == 2) {
                line = calib::fit_high_contention_line(
                    {cell[0]->pw, cell[0]->throughput()}, {cell[1]->pw, cell[1]->throughput()});
            } else {
                double sx = 0, sy = 0;
                for (const auto* r : cell) {
                    sx += r->pw;
                    sy += r->throughput();
                }
                double mx = sx / cell.size(), my = sy / cell.size();
                double sxx = 0, sxy = 0;
                for (const auto* r : cell) {
                    sxx += (r->pw - mx) * (r->pw - mx);
                    sxy += (r->pw - mx) * (r->throughput() - my);
                }
                line.slope = sxy / sxx;
                line.intercept = my - line.slope * mx;
            }
            models.throughput.hc_lines.set(cell_f[key], key.second, line);
        }
    }

    // The lambda sweeps must dwarf the frontier-scale retry-loop effects.
    if (bundle.impls.count(lambda_impl)) {
        const auto& tmodel = bundle.impls.at(lambda_impl).throughput;
        for (const auto& rec : lambda_records) {
            double crit =
                model::frontier_pw(rec.pairs, f0, tmodel, bundle.cas, cfg.topology);
            if (rec.pw < cfg.lambda_large_factor * crit)
                throw DomainError("calibrate: lambda run at n=" + std::to_string(rec.pairs) +
                                  " has pw=" + std::to_string(rec.pw) +
                                  ", below " + std::to_string(cfg.lambda_large_factor) +
                                  "x the frontier " + std::to_string(crit));
        }
    }

    // Power fits.
    std::vector<double> rhos, rho_uncores, linears;
    for (auto& [impl, models] : bundle.impls) {
        std::vector<const MeasurementRecord*> powered;
        for (const auto& rec : records)
            if (rec.impl == impl && rec.has_power()) powered.push_back(&rec);
        std::sort(powered.begin(), powered.end(),
                  [](const MeasurementRecord* a, const MeasurementRecord* b) {
                      if (a->pairs != b->pairs) return a->pairs < b->pairs;
                      if (a->pw != b->pw) return a->pw < b->pw;
                      return a->f < b->f;
                  });
        if (powered.empty()) {
            out.gaps.push_back(impl + ": no powered runs; cpu/memory fits skipped");
            continue;
        }

        PowerFits fits;
        // CPU pair: same workload at two frequencies.
        for (size_t i = 0; i < powered.size() && !fits.have_cpu; ++i) {
            for (size_t k = i + 1; k < powered.size(); ++k) {
                const auto *lo = powered[i], *hi = powered[k];
                if (lo->pairs != hi->pairs || !nearly_equal(lo->pw, hi->pw)) continue;
                if (nearly_equal(lo->f, hi->f)) continue;
                if (lo->f > hi->f) std::swap(lo, hi);
                int threads = 2 * lo->pairs;
                double d_lo = *lo->p_cpu - component_baseline(bundle, model::Component::Cpu,
                                                              lo->f, lo->sockets_active);
                double d_hi = *hi->p_cpu - component_baseline(bundle, model::Component::Cpu,
                                                              hi->f, hi->sockets_active);
                fits.cpu = calib::fit_cpu_coeffs_closed(
                    d_lo, lo->f * model::kDeciGhzPerGhz, d_hi,
                    hi->f * model::kDeciGhzPerGhz, threads, cfg.alpha0);
                fits.have_cpu = true;

                // Memory intensity from the high-frequency run of the pair.
                model::WorkloadPoint point{impl, hi->pairs, hi->f, hi->pw};
                double r = model::retry_ratio(hi->throughput(), point,
                                              lambda.at(hi->pairs));
                fits.rho = calib::fit_rho(
                    *hi->p_mem,
                    component_baseline(bundle, model::Component::Memory, hi->f,
                                       hi->sockets_active),
                    2 * hi->pairs, r);
                fits.have_rho = true;
                break;
            }
        }
        if (!fits.have_cpu)
            out.gaps.push_back(impl + ": no same-workload frequency pair; cpu fit skipped");

        // Uncore pair: same frequency and pair count, different pw.
        for (size_t i = 0; i < powered.size() && !fits.have_uncore; ++i) {
            for (size_t k = i + 1; k < powered.size(); ++k) {
                const auto *p1 = powered[i], *p2 = powered[k];
                if (p1->pairs != p2->pairs || !nearly_equal(p1->f, p2->f)) continue;
                if (nearly_equal(p1->pw, p2->pw)) continue;
                model::WorkloadPoint w1{impl, p1->pairs, p1->f, p1->pw};
                model::WorkloadPoint w2{impl, p2->pairs, p2->f, p2->pw};
                double r1 = model::retry_ratio(p1->throughput(), w1, lambda.at(p1->pairs));
                double r2 = model::retry_ratio(p2->throughput(), w2, lambda.at(p2->pairs));
                if (nearly_equal(r1, r2, 1e-9)) continue;
                double base = component_baseline(bundle, model::Component::Uncore, p1->f,
                                                 p1->sockets_active);
                double base2 = component_baseline(bundle, model::Component::Uncore, p2->f,
                                                  p2->sockets_active);
                auto [rho_u, linear] = calib::fit_uncore_pair(
                    *p1->p_unc, base, 2 * p1->pairs, r1, *p2->p_unc, base2, 2 * p2->pairs,
                    r2);
                fits.rho_uncore = rho_u;
                fits.uncore_linear = linear;
                fits.have_uncore = true;
                break;
            }
        }
        if (!fits.have_uncore)
            out.gaps.push_back(impl + ": no retry-ratio spread in powered runs; "
                                      "uncore fit skipped");

        if (fits.have_cpu) models.cpu = fits.cpu;
        if (fits.have_rho) rhos.push_back(fits.rho);
        if (fits.have_uncore) {
            rho_uncores.push_back(fits.rho_uncore);
            linears.push_back(fits.uncore_linear);
        }
    }

    auto mean_of = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
    };
    if (!rhos.empty()) {
        // One intensity shared by all implementations; the per-impl values
        // only differ by noise, so keep the mean and report the spread.
        bundle.memory.rho = mean_of(rhos);
        double spread = 0.0;
        for (double v : rhos) spread = std::max(spread, std::fabs(v - bundle.memory.rho));
        bundle.provenance.stats["rho_spread"] = spread;
    } else {
        out.gaps.push_back("no memory-intensity fit anywhere");
    }
    if (!rho_uncores.empty()) {
        bundle.memory.rho_uncore = mean_of(rho_uncores);
        bundle.memory.uncore_linear = mean_of(linears);
    }

    // Application profile: mixed-parallel-section memory intensity.
    if (!app_records.empty()) {
        std::vector<double> rho_primes;
        for (const auto& rec : app_records) {
            rec.validate();
            if (!rec.has_power())
                throw CalibrationGapError("application record lacks power columns");
            model::WorkloadPoint point{rec.impl, rec.pairs, rec.f, rec.pw};
            double r = model::retry_ratio(rec.throughput(), point, lambda.at(rec.pairs));
            rho_primes.push_back(calib::fit_rho_prime(
                *rec.p_mem,
                component_baseline(bundle, model::Component::Memory, rec.f,
                                   rec.sockets_active),
                2 * rec.pairs, r, bundle.memory.rho));
        }
        bundle.memory.rho_prime = mean_of(rho_primes);
    }

    // Budget of the protocol this record set instantiates.
    std::set<int> n_levels;
    for (const auto& [n, unused] : lambda.entries()) n_levels.insert(n);
    std::set<long long> freqs;
    for (const auto& rec : records) freqs.insert(std::llround(rec.f * 1e6));
    out.budget = calib::measurement_budget(
        static_cast<long long>(n_levels.size()), static_cast<long long>(bundle.impls.size()),
        static_cast<long long>(freqs.size()));
    bundle.provenance.stats["measurement_budget"] = static_cast<double>(out.budget);
    bundle.provenance.stats["records_used"] = static_cast<double>(records.size());
    for (const auto& g : out.gaps) bundle.provenance.notes.push_back("gap: " + g);
    return out;
}

std::vector<PredictionRow> predict_grid(const ModelBundle& bundle,
                                        const std::vector<std::string>& impls, int pairs,
                                        double f, const std::vector<double>& pws,
                                        bool mixed) {
    std::vector<PredictionRow> rows;
    for (const auto& impl : impls) {
        const auto& models = bundle.impl(impl);
        model::PowerModel pmodel = bundle.power_model(impl);
        for (double pw : pws) {
            model::WorkloadPoint point{impl, pairs, f, pw};
            PredictionRow row;
            row.point = point;
            row.report = model::predict_power_and_energy(point, models.throughput, pmodel,
                                                         bundle.cas, bundle.topology, mixed);
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

}  // namespace qnrg::io
