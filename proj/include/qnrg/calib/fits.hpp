#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qnrg/calib/nelder_mead.hpp"
#include "qnrg/io/records.hpp"
#include "qnrg/model/types.hpp"

namespace qnrg::calib {

// Diagnostics attached to the non-trivial fits.
struct FitReport {
    std::string what;
    double residual_norm = 0.0;
    int measurements_used = 0;
    bool converged = true;
    std::map<std::string, double> spread;  // per-parameter spread where averaging is used
    std::vector<std::string> notes;
};

// lambda(n) = (T_inf / n) * (pw_inf / f0) from one very-large-pw run per
// pair count. All records must share the frequency f0; duplicate pair
// counts are ambiguous and rejected. min_pw, when positive, rejects runs
// whose parallel section is too small to qualify as "very large".
model::LambdaTable fit_lambda(const std::vector<io::MeasurementRecord>& records,
                              double min_pw = 0.0);

// Closed-form retry-loop work from one intra-socket and one inter-socket
// low-contention run at the same (pw, f0).
std::pair<double, double> fit_cw_pair(const io::MeasurementRecord& rec_on,
                                      const io::MeasurementRecord& rec_off,
                                      const model::LambdaTable& lambda,
                                      const model::CasCostModel& cas, double f0,
                                      const model::MachineTopology& topo);

// Exact line through two congested measurements (pw, throughput).
model::HcLine fit_high_contention_line(std::pair<double, double> p1,
                                       std::pair<double, double> p2);

struct CasSample {
    double f = 0.0;  // GHz
    double t = 0.0;  // seconds per CAS
};

// On-socket cost t = a/f and off-socket cost t = b' + a'/f, least squares
// over >= 2 samples each. Reduces to exact inversion on noiseless pairs.
model::CasCostModel fit_cas_cost(const std::vector<CasSample>& on_samples,
                                 const std::vector<CasSample>& off_samples);

// Two-point closed form for the CPU power law with a fixed exponent.
// p0, p1 are total dynamic powers of `threads` threads at f0, f1 (deci-GHz).
model::CpuPowerCoefficients fit_cpu_coeffs_closed(double p0, double f0_deci, double p1,
                                                  double f1_deci, int threads,
                                                  double alpha0 = model::kDefaultAlpha);

struct CpuSample {
    double f_deci = 0.0;  // deci-GHz
    double p_dyn = 0.0;   // W, per thread
};

// Full (A, B, alpha) fit over a frequency sweep: simplex minimization of the
// Euclidean residual, seeded with the two-point closed form at alpha = 1.7.
// Deterministic: restarts from the converged point until no improvement.
std::pair<model::CpuPowerCoefficients, FitReport> fit_cpu_coeffs_full(
    const std::vector<CpuSample>& samples, const SimplexConfig& cfg = {});

// Memory intensity from one run: rho = residual power / (threads * r).
// `baseline` is the non-dynamic memory power (static plus any active part).
double fit_rho(double p_mem, double baseline, int threads, double r);

// Parallel-section intensity of a mixed workload, given rho.
double fit_rho_prime(double p_mem, double baseline, int threads, double r, double rho);

// Uncore intensity and per-thread linear term from two runs with different
// retry ratios: y/n = rho_u * r + linear.
std::pair<double, double> fit_uncore_pair(double p_unc_1, double baseline_1, int threads_1,
                                          double r_1, double p_unc_2, double baseline_2,
                                          int threads_2, double r_2);

// One cell of the register-operation micro-benchmark grid.
struct PowerGridCell {
    std::string op;
    double f = 0.0;  // GHz
    int sockets = 1;
    int threads = 1;
    std::array<double, 3> power{};  // W per Component
};

struct DerivedPower {
    model::StaticActiveTable table;
    std::array<double, 3> stat_spread{};  // std dev of the per-cell static residuals
    // per (op, f): derived per-thread dynamic power of each component
    std::map<std::pair<std::string, double>, std::array<double, 3>> dynamic;
    FitReport report;
};

// Static / active / dynamic decomposition from a dense-pinned thread-count
// grid: pdyn from the 2c vs 2c-2 increment, pact from the cross-socket
// difference, pstat as the grid-mean residual.
DerivedPower derive_static_active_dynamic(const std::vector<PowerGridCell>& grid,
                                          const model::MachineTopology& topo);

// Number of runs needed to instantiate the throughput model over N thread
// levels, A implementations and F frequencies.
long long measurement_budget(long long N, long long A, long long F);

}  // namespace qnrg::calib
