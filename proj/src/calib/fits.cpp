#include "qnrg/calib/fits.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace qnrg::calib {

using model::nearly_equal;

model::LambdaTable fit_lambda(const std::vector<io::MeasurementRecord>& records, double min_pw) {
    if (records.empty()) throw CalibrationGapError("fit_lambda: no records");
    model::LambdaTable table;
    double f0 = records.front().f;
    std::set<int> seen;
    for (const auto& rec : records) {
        rec.validate();
        if (!nearly_equal(rec.f, f0))
            throw InconsistentMeasurementError("fit_lambda: records span multiple frequencies");
        if (min_pw > 0.0 && rec.pw < min_pw)
            throw DomainError("fit_lambda: pw=" + std::to_string(rec.pw) +
                              " below the large-work threshold " + std::to_string(min_pw));
        if (!seen.insert(rec.pairs).second)
            throw CalibrationGapError("fit_lambda: two records for n=" +
                                      std::to_string(rec.pairs) + " (ambiguous input)");
        double lambda = (rec.throughput() / rec.pairs) * (rec.pw / f0);
        table.set(rec.pairs, lambda);
    }
    return table;
}

std::pair<double, double> fit_cw_pair(const io::MeasurementRecord& rec_on,
                                      const io::MeasurementRecord& rec_off,
                                      const model::LambdaTable& lambda,
                                      const model::CasCostModel& cas, double f0,
                                      const model::MachineTopology& topo) {
    rec_on.validate();
    rec_off.validate();
    cas.validate();
    if (!topo.intra_socket(rec_on.pairs))
        throw InconsistentMeasurementError("fit_cw_pair: on-socket record spans sockets");
    if (topo.intra_socket(rec_off.pairs))
        throw InconsistentMeasurementError("fit_cw_pair: off-socket record fits one socket");
    if (!nearly_equal(rec_on.pw, rec_off.pw))
        throw InconsistentMeasurementError("fit_cw_pair: records differ in pw");
    if (!nearly_equal(rec_on.f, f0) || !nearly_equal(rec_off.f, f0))
        throw InconsistentMeasurementError("fit_cw_pair: records not at f0");

    double pw = rec_on.pw;
    double n_on = rec_on.pairs, n_off = rec_off.pairs;
    double t_on = rec_on.throughput(), t_off = rec_off.throughput();

    double cw_on = n_on * f0 / (cas.a * t_on) - pw / (cas.a * lambda.at(rec_on.pairs));
    double cw_off = (n_off / t_off - pw / (lambda.at(rec_off.pairs) * f0)) /
                    (cas.b_prime + cas.a_prime / f0);
    if (cw_on < 0.0 || cw_off < 0.0)
        throw InconsistentMeasurementError("fit_cw_pair: negative retry-loop work (cw_on=" +
                                           std::to_string(cw_on) + ", cw_off=" +
                                           std::to_string(cw_off) + ")");
    return {cw_on, cw_off};
}

model::HcLine fit_high_contention_line(std::pair<double, double> p1,
                                       std::pair<double, double> p2) {
    if (nearly_equal(p1.first, p2.first))
        throw DegenerateInputError("fit_high_contention_line: both points at pw=" +
                                   std::to_string(p1.first));
    model::HcLine line;
    line.slope = (p2.second - p1.second) / (p2.first - p1.first);
    line.intercept = p1.second - line.slope * p1.first;
    return line;
}

namespace {

void check_cas_samples(const std::vector<CasSample>& samples, const char* which) {
    if (samples.size() < 2)
        throw CalibrationGapError(std::string("fit_cas_cost: need >= 2 ") + which + " samples");
    std::set<double> freqs;
    for (const auto& s : samples) {
        if (!(s.f > 0.0) || !(s.t > 0.0))
            throw DomainError("fit_cas_cost: samples must have positive f and t");
        freqs.insert(s.f);
    }
    if (freqs.size() < 2)
        throw CalibrationGapError(std::string("fit_cas_cost: ") + which +
                                  " samples need distinct frequencies");
}

}  // namespace

model::CasCostModel fit_cas_cost(const std::vector<CasSample>& on_samples,
                                 const std::vector<CasSample>& off_samples) {
    check_cas_samples(on_samples, "on-socket");
    check_cas_samples(off_samples, "off-socket");

    model::CasCostModel cas;
    // t = a/f  =>  t*f should be the constant a; least squares gives its mean.
    double sum = 0.0;
    for (const auto& s : on_samples) sum += s.t * s.f;
    cas.a = sum / static_cast<double>(on_samples.size());

    // t = b' + a'/f: ordinary least squares of t against x = 1/f.
    double sx = 0.0, sy = 0.0;
    for (const auto& s : off_samples) {
        sx += 1.0 / s.f;
        sy += s.t;
    }
    double n = static_cast<double>(off_samples.size());
    double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& s : off_samples) {
        double dx = 1.0 / s.f - mx;
        sxx += dx * dx;
        sxy += dx * (s.t - my);
    }
    cas.a_prime = sxy / sxx;
    cas.b_prime = my - cas.a_prime * mx;
    return cas;
}

model::CpuPowerCoefficients fit_cpu_coeffs_closed(double p0, double f0_deci, double p1,
                                                  double f1_deci, int threads, double alpha0) {
    if (threads < 1) throw DomainError("fit_cpu_coeffs_closed: threads must be >= 1");
    if (nearly_equal(f0_deci, f1_deci))
        throw DegenerateInputError("fit_cpu_coeffs_closed: f0 == f1");
    double q0 = p0 / threads, q1 = p1 / threads;
    double g0 = std::pow(f0_deci, alpha0), g1 = std::pow(f1_deci, alpha0);
    model::CpuPowerCoefficients c;
    c.alpha = alpha0;
    c.A = (q1 - q0) / (g1 - g0);
    c.B = (q0 * g1 - q1 * g0) / (g1 - g0);
    if (c.A < 0.0)
        throw InconsistentMeasurementError(
            "fit_cpu_coeffs_closed: dynamic power decreases with frequency (A=" +
            std::to_string(c.A) + ")");
    return c;
}

namespace {

double cpu_residual_norm(const std::vector<CpuSample>& samples, double A, double B,
                         double alpha) {
    double s = 0.0;
    for (const auto& p : samples) {
        double est = A * std::pow(p.f_deci, alpha) + B;
        s += (p.p_dyn - est) * (p.p_dyn - est);
    }
    return std::sqrt(s);
}

}  // namespace

std::pair<model::CpuPowerCoefficients, FitReport> fit_cpu_coeffs_full(
    const std::vector<CpuSample>& samples, const SimplexConfig& cfg) {
    std::set<double> freqs;
    for (const auto& s : samples) freqs.insert(s.f_deci);
    if (freqs.size() < 4)
        throw CalibrationGapError("fit_cpu_coeffs_full: need >= 4 distinct frequencies");

    std::vector<CpuSample> sorted = samples;
    std::sort(sorted.begin(), sorted.end(),
              [](const CpuSample& a, const CpuSample& b) { return a.f_deci < b.f_deci; });

    // Seed with the fixed-exponent closed form between the endpoint samples.
    double a0 = 0.0, b0 = 0.0;
    try {
        auto seed = fit_cpu_coeffs_closed(sorted.front().p_dyn, sorted.front().f_deci,
                                          sorted.back().p_dyn, sorted.back().f_deci, 1);
        a0 = seed.A;
        b0 = std::max(seed.B, 0.0);
    } catch (const InconsistentMeasurementError&) {
        b0 = std::max(sorted.front().p_dyn, 0.0);  // flat or decreasing data
    }

    auto objective = [&](const std::vector<double>& x) {
        double A = x[0], B = x[1], alpha = x[2];
        if (A < 0.0 || B < 0.0 || alpha < 1.0 || alpha > 3.0) {
            double viol = std::max(0.0, -A) + std::max(0.0, -B) +
                          std::max(0.0, 1.0 - alpha) + std::max(0.0, alpha - 3.0);
            return 1e100 * (1.0 + viol);
        }
        return cpu_residual_norm(samples, A, B, alpha);
    };

    SimplexConfig nm = cfg;
    if (nm.tol_objective <= 0.0) nm.tol_objective = 1e-12;
    if (nm.initial_step.empty())
        nm.initial_step = {std::max(0.5 * a0, 1e-6), std::max(0.5 * b0, 1e-4), 0.2};

    std::vector<double> start{a0, b0, model::kDefaultAlpha};
    double seed_residual = objective(start);

    SimplexResult best = nelder_mead(objective, start, nm);
    // Deterministic restart policy: re-seed from the incumbent with a finer
    // simplex until the objective stops improving.
    for (int restart = 0; restart < 4; ++restart) {
        SimplexConfig finer = nm;
        finer.initial_step.clear();
        for (double s : nm.initial_step)
            finer.initial_step.push_back(s * std::pow(0.1, restart + 1));
        SimplexResult next = nelder_mead(objective, best.argmin, finer);
        if (next.value >= best.value - nm.tol_objective) {
            if (next.value < best.value) best = next;
            break;
        }
        best = next;
    }

    model::CpuPowerCoefficients coeffs;
    coeffs.A = best.argmin[0];
    coeffs.B = best.argmin[1];
    coeffs.alpha = best.argmin[2];

    FitReport report;
    report.what = "cpu_power_law";
    report.residual_norm = best.value;
    report.measurements_used = static_cast<int>(samples.size());
    report.converged = best.converged;
    if (best.value > seed_residual)
        report.notes.push_back("simplex ended above the closed-form seed residual");
    return {coeffs, report};
}

double fit_rho(double p_mem, double baseline, int threads, double r) {
    if (threads < 1) throw DomainError("fit_rho: threads must be >= 1");
    if (r < 1e-6)
        throw CalibrationGapError("fit_rho: retry-loop occupancy too small (r=" +
                                  std::to_string(r) + ")");
    return (p_mem - baseline) / (threads * r);
}

double fit_rho_prime(double p_mem, double baseline, int threads, double r, double rho) {
    if (threads < 1) throw DomainError("fit_rho_prime: threads must be >= 1");
    if (1.0 - r < 1e-6)
        throw CalibrationGapError("fit_rho_prime: parallel-section occupancy too small (r=" +
                                  std::to_string(r) + ")");
    return (p_mem - baseline - rho * threads * r) / (threads * (1.0 - r));
}

std::pair<double, double> fit_uncore_pair(double p_unc_1, double baseline_1, int threads_1,
                                          double r_1, double p_unc_2, double baseline_2,
                                          int threads_2, double r_2) {
    if (threads_1 < 1 || threads_2 < 1)
        throw DomainError("fit_uncore_pair: threads must be >= 1");
    if (nearly_equal(r_1, r_2, 1e-12))
        throw DegenerateInputError("fit_uncore_pair: equal retry ratios cannot separate "
                                   "intensity from the linear term");
    double y1 = (p_unc_1 - baseline_1) / threads_1;
    double y2 = (p_unc_2 - baseline_2) / threads_2;
    double rho_u = (y1 - y2) / (r_1 - r_2);
    double linear = y1 - rho_u * r_1;
    return {rho_u, linear};
}

namespace {

struct GridIndex {
    std::vector<PowerGridCell> cells;

    const PowerGridCell* find(const std::string& op, double f, int sockets, int threads) const {
        for (const auto& c : cells)
            if (c.op == op && c.sockets == sockets && c.threads == threads &&
                nearly_equal(c.f, f))
                return &c;
        return nullptr;
    }
};

}  // namespace

DerivedPower derive_static_active_dynamic(const std::vector<PowerGridCell>& grid,
                                          const model::MachineTopology& topo) {
    topo.validate();
    if (grid.empty()) throw CalibrationGapError("derive: empty power grid");
    const int c = topo.cores_per_socket;

    GridIndex index{grid};

    // Canonical (op, f) combinations present in the grid.
    std::vector<std::pair<std::string, double>> keys;
    for (const auto& cell : grid) {
        bool found = false;
        for (const auto& k : keys)
            if (k.first == cell.op && nearly_equal(k.second, cell.f)) found = true;
        if (!found) keys.emplace_back(cell.op, cell.f);
    }

    DerivedPower out;
    out.report.what = "static_active_dynamic";
    out.report.measurements_used = static_cast<int>(grid.size());

    std::vector<std::string> missing;
    auto need = [&](const std::string& op, double f, int soc, int thr) -> const PowerGridCell* {
        const PowerGridCell* cell = index.find(op, f, soc, thr);
        if (!cell)
            missing.push_back(op + " f=" + std::to_string(f) + " soc=" + std::to_string(soc) +
                              " thr=" + std::to_string(thr));
        return cell;
    };

    std::map<std::pair<std::string, double>, std::array<double, 3>> pact_per_key;
    for (const auto& [op, f] : keys) {
        const PowerGridCell* full = need(op, f, 2, 2 * c);
        const PowerGridCell* step = need(op, f, 2, 2 * c - 2);
        const PowerGridCell* cross = need(op, f, 2, c + 2);
        const PowerGridCell* single = need(op, f, 1, c);
        if (!full || !step || !cross || !single) continue;

        std::array<double, 3> pdyn{}, pact{};
        for (int x = 0; x < 3; ++x) {
            pdyn[x] = 0.5 * (full->power[x] - step->power[x]);
            pact[x] = cross->power[x] - single->power[x] - 2.0 * pdyn[x];
        }
        out.dynamic[{op, f}] = pdyn;
        pact_per_key[{op, f}] = pact;
    }
    if (!missing.empty()) {
        std::string msg = "derive: missing grid cells:";
        for (const auto& m : missing) msg += " [" + m + "]";
        throw CalibrationGapError(msg);
    }

    // Active power depends on frequency only: average over operations.
    std::vector<double> freqs;
    for (const auto& [key, unused] : pact_per_key) {
        bool found = false;
        for (double f : freqs)
            if (nearly_equal(f, key.second)) found = true;
        if (!found) freqs.push_back(key.second);
    }
    for (double f : freqs) {
        for (int x = 0; x < 3; ++x) {
            double sum = 0.0;
            int count = 0;
            for (const auto& [key, pact] : pact_per_key) {
                if (!nearly_equal(key.second, f)) continue;
                sum += pact[x];
                ++count;
            }
            out.table.p_act[x].set(f, sum / count);
        }
    }

    // Static power: residual of every grid cell, averaged; spread reported.
    std::array<std::vector<double>, 3> residuals;
    for (const auto& cell : grid) {
        std::pair<std::string, double> key{cell.op, cell.f};
        for (const auto& [k, unused] : pact_per_key)
            if (k.first == cell.op && nearly_equal(k.second, cell.f)) key = k;
        const auto& pdyn = out.dynamic.at(key);
        for (int x = 0; x < 3; ++x) {
            double act = out.table.p_act[x].at(key.second);
            residuals[x].push_back(cell.power[x] - cell.sockets * act - cell.threads * pdyn[x]);
        }
    }
    for (int x = 0; x < 3; ++x) {
        double mean = 0.0;
        for (double v : residuals[x]) mean += v;
        mean /= static_cast<double>(residuals[x].size());
        double var = 0.0;
        for (double v : residuals[x]) var += (v - mean) * (v - mean);
        var /= static_cast<double>(residuals[x].size());
        out.table.p_stat[x] = mean;
        out.stat_spread[x] = std::sqrt(var);
        out.report.spread["p_stat_" + std::string(model::component_name(
                              static_cast<model::Component>(x)))] = out.stat_spread[x];
    }
    return out;
}

long long measurement_budget(long long N, long long A, long long F) {
    if (N < 1 || A < 1 || F < 1)
        throw DomainError("measurement_budget: N, A and F must all be >= 1");
    return N + 2 * A + 2 * A * F * N;
}

}  // namespace qnrg::calib
