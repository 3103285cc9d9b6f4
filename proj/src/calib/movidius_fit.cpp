#include "qnrg/calib/movidius_fit.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace qnrg::calib {

namespace {

struct Line {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;
};

Line shave_sweep_line(const MovidiusRun& run) {
    if (run.points.size() < 2)
        throw CalibrationGapError("fit_movidius: benchmark '" + run.id +
                                  "' needs >= 2 shave counts");
    double n = static_cast<double>(run.points.size());
    double sx = 0.0, sy = 0.0;
    for (const auto& [k, p] : run.points) {
        sx += k;
        sy += p;
    }
    double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [k, p] : run.points) {
        sxx += (k - mx) * (k - mx);
        sxy += (k - mx) * (p - my);
    }
    if (sxx == 0.0)
        throw DegenerateInputError("fit_movidius: benchmark '" + run.id +
                                   "' sampled at a single shave count");
    Line line;
    line.slope = sxy / sxx;
    line.intercept = my - line.slope * mx;
    for (const auto& [k, p] : run.points) {
        double e = p - (line.intercept + line.slope * k);
        line.residual += e * e;
    }
    line.residual = std::sqrt(line.residual);
    return line;
}

std::set<std::string> unit_set(const std::vector<std::string>& units) {
    return {units.begin(), units.end()};
}

}  // namespace

MovidiusFit fit_movidius(const std::vector<MovidiusRun>& runs, double p_act_fallback,
                         double tolerance) {
    if (runs.empty()) throw CalibrationGapError("fit_movidius: no runs");

    MovidiusFit out;
    out.report.what = "movidius";
    out.report.measurements_used = 0;

    std::map<std::string, Line> singles;                       // unit -> line
    std::vector<std::pair<std::set<std::string>, Line>> combos;
    double intercept_sum = 0.0;
    double line_residual = 0.0;
    for (const auto& run : runs) {
        Line line = shave_sweep_line(run);
        out.report.measurements_used += static_cast<int>(run.points.size());
        line_residual += line.residual * line.residual;
        intercept_sum += line.intercept;
        if (run.units.empty())
            throw SchemaError("fit_movidius: benchmark '" + run.id + "' lists no units");
        if (run.units.size() == 1) {
            if (singles.count(run.units[0]))
                throw InconsistentMeasurementError("fit_movidius: duplicate single-unit run '" +
                                                   run.units[0] + "'");
            singles[run.units[0]] = line;
        } else {
            combos.emplace_back(unit_set(run.units), line);
        }
    }
    out.model.p_stat = intercept_sum / static_cast<double>(runs.size());

    for (const auto& [units, line] : combos)
        for (const auto& u : units)
            if (!singles.count(u))
                throw CalibrationGapError("fit_movidius: combination uses unit '" + u +
                                          "' with no single-unit benchmark");

    // Combination residual as a function of the activation power:
    //   M_c(pact) = s_c - sum(s_u) + (|c|-1) * pact.
    // A pair's residual shifts by pact, a triple's by 2*pact, so a triple
    // together with all three of its pairs determines pact:
    //   pact = max over sub-pairs of M_p(0) - M_t(0).
    auto m_at_zero = [&](const std::set<std::string>& units, const Line& line) {
        double s = line.slope;
        for (const auto& u : units) s -= singles.at(u).slope;
        return s;
    };

    std::vector<double> pact_estimates;
    for (const auto& [tunits, tline] : combos) {
        if (tunits.size() != 3) continue;
        std::vector<std::string> u(tunits.begin(), tunits.end());
        double best_pair = 0.0;
        int pairs_found = 0;
        for (int drop = 0; drop < 3; ++drop) {
            std::set<std::string> pair;
            for (int i = 0; i < 3; ++i)
                if (i != drop) pair.insert(u[i]);
            for (const auto& [cunits, cline] : combos) {
                if (cunits != pair) continue;
                double m = m_at_zero(cunits, cline);
                best_pair = pairs_found == 0 ? m : std::max(best_pair, m);
                ++pairs_found;
                break;
            }
        }
        if (pairs_found == 3) pact_estimates.push_back(best_pair - m_at_zero(tunits, tline));
    }

    if (!pact_estimates.empty()) {
        double sum = 0.0;
        for (double v : pact_estimates) sum += v;
        out.model.p_act = sum / static_cast<double>(pact_estimates.size());
        double var = 0.0;
        for (double v : pact_estimates) var += (v - out.model.p_act) * (v - out.model.p_act);
        out.report.spread["p_act"] =
            std::sqrt(var / static_cast<double>(pact_estimates.size()));
    } else {
        out.model.p_act = p_act_fallback;
        out.report.notes.push_back(
            "p_act: no triple with all three sub-pairs measured; using fallback value");
    }

    for (const auto& [unit, line] : singles) {
        model::MovidiusModel::UnitPower up;
        up.p_dyn = line.slope - out.model.p_act;
        out.model.units[unit] = up;
        out.o_status[unit] = OCostStatus::Absent;
    }

    // Residual of each combination under the max rule, then the tightest
    // bound per unit.
    std::vector<std::pair<std::set<std::string>, double>> residuals;
    for (const auto& [units, line] : combos) {
        double m = m_at_zero(units, line) + (static_cast<double>(units.size()) - 1.0) *
                                                out.model.p_act;
        if (m < -tolerance)
            out.report.notes.push_back("combination residual below zero; data inconsistent");
        residuals.emplace_back(units, std::max(m, 0.0));
    }
    for (const auto& [units, m] : residuals) {
        for (const auto& u : units) {
            auto& entry = out.model.units.at(u);
            if (out.o_status[u] == OCostStatus::Absent || m < entry.o_cost) {
                entry.o_cost = m;
                out.o_status[u] = OCostStatus::UpperBound;
            }
        }
    }
    // A unit is pinned only when it alone can realize a combination's
    // residual; ties leave every tied unit with just an upper bound.
    double check_residual = 0.0;
    for (const auto& [units, m] : residuals) {
        double realized = 0.0;
        std::vector<std::string> at_bound;
        for (const auto& u : units) {
            double o = out.model.units.at(u).o_cost;
            realized = std::max(realized, o);
            if (std::fabs(o - m) <= tolerance) at_bound.push_back(u);
        }
        check_residual += (realized - m) * (realized - m);
        if (std::fabs(realized - m) > tolerance) {
            out.report.notes.push_back("combination residual not realized by any member unit");
            continue;
        }
        if (at_bound.size() == 1) out.o_status[at_bound.front()] = OCostStatus::Exact;
    }
    out.report.residual_norm = std::sqrt(line_residual + check_residual);
    out.report.converged = true;
    return out;
}

std::vector<MovidiusRun> synth_movidius_runs(
    const model::MovidiusModel& model,
    const std::vector<std::vector<std::string>>& benchmarks) {
    static const int kShaveCounts[] = {1, 2, 4, 6, 8};
    std::vector<MovidiusRun> runs;
    for (const auto& units : benchmarks) {
        MovidiusRun run;
        run.units = units;
        for (const auto& u : units) run.id += u;
        std::set<std::string> set(units.begin(), units.end());
        for (int k : kShaveCounts)
            run.points.emplace_back(k, model::movidius_power(model, k, set));
        runs.push_back(std::move(run));
    }
    return runs;
}

std::vector<std::vector<std::string>> default_movidius_benchmarks() {
    return {
        // every functional-unit operation alone
        {"SauXor"}, {"SauMul"}, {"VauXor"}, {"VauMul"},
        {"IauXor"}, {"IauMul"}, {"CmuCpss"}, {"CmuCpivr"},
        // published combinations
        {"SauXor", "CmuCpss"},
        {"SauXor", "CmuCpivr"},
        {"SauXor", "IauXor"},
        {"IauXor", "CmuCpss"},
        {"SauXor", "VauXor"},
        {"SauXor", "VauMul"},
        {"SauXor", "CmuCpss", "IauXor"},
        // coverage for the units the published set leaves out
        {"SauXor", "SauMul"},
        {"SauXor", "IauMul"},
    };
}

}  // namespace qnrg::calib
