#include "qnrg/model/throughput.hpp"

#include <algorithm>
#include <string>

namespace qnrg::model {

double parallel_section_time(double pw, double lambda_n, double f) {
    if (!(lambda_n > 0.0)) throw DomainError("parallel_section_time: lambda must be > 0");
    if (!(f > 0.0)) throw DomainError("parallel_section_time: frequency must be > 0");
    if (pw < 0.0) throw DomainError("parallel_section_time: pw must be >= 0");
    if (pw == 0.0) return 0.0;
    return pw / (lambda_n * f);
}

double retry_loop_time(double cw, double f, bool off_socket, const CasCostModel& cas) {
    if (!(cw > 0.0)) throw DomainError("retry_loop_time: cw must be > 0");
    if (!(f > 0.0)) throw DomainError("retry_loop_time: frequency must be > 0");
    cas.validate();
    if (off_socket) return cw * (cas.b_prime + cas.a_prime / f);
    return cw * cas.a / f;
}

double throughput_low_contention(int pairs, double t_ps, double t_rl) {
    if (pairs < 1) throw DomainError("throughput_low_contention: pairs must be >= 1");
    double cycle = t_ps + t_rl;
    if (!(cycle > 0.0)) throw DomainError("throughput_low_contention: zero cycle length");
    return static_cast<double>(pairs) / cycle;
}

double throughput_high_contention(double intercept, double slope, double pw) {
    double t = intercept + slope * pw;
    if (!(t > 0.0))
        throw ExtrapolationError("congested line gives non-positive throughput at pw=" +
                                 std::to_string(pw));
    return t;
}

double retry_loop_time_lc(const WorkloadPoint& point, const ThroughputModel& model,
                          const CasCostModel& cas, const MachineTopology& topo) {
    bool off = !topo.intra_socket(point.pairs);
    return retry_loop_time(off ? model.cw_off : model.cw_on, point.f, off, cas);
}

double frontier_pw(int pairs, double f, const ThroughputModel& model, const CasCostModel& cas,
                   const MachineTopology& topo) {
    WorkloadPoint p{model.impl, pairs, f, 0.0};
    double t_rl = retry_loop_time_lc(p, model, cas, topo);
    // t_PS = pw/(lambda f) crosses (n-1) t_RL at this pw.
    return (pairs - 1) * t_rl * model.lambda.at(pairs) * f;
}

Regime contention_regime(const WorkloadPoint& point, const ThroughputModel& model,
                         const CasCostModel& cas, const MachineTopology& topo) {
    point.validate();
    double t_ps = parallel_section_time(point.pw, model.lambda.at(point.pairs), point.f);
    double t_rl = retry_loop_time_lc(point, model, cas, topo);
    double threshold = (point.pairs - 1) * t_rl;
    return t_ps >= threshold ? Regime::NonCongested : Regime::Congested;
}

double predict_throughput(const WorkloadPoint& point, const ThroughputModel& model,
                          const CasCostModel& cas, const MachineTopology& topo) {
    Regime regime = contention_regime(point, model, cas, topo);
    if (regime == Regime::NonCongested) {
        double t_ps = parallel_section_time(point.pw, model.lambda.at(point.pairs), point.f);
        double t_rl = retry_loop_time_lc(point, model, cas, topo);
        return throughput_low_contention(point.pairs, t_ps, t_rl);
    }
    const HcLine& line = model.hc_lines.at(point.f, point.pairs);
    return throughput_high_contention(line.intercept, line.slope, point.pw);
}

double retry_ratio(double throughput, const WorkloadPoint& point, double lambda_n) {
    if (throughput < 0.0) throw DomainError("retry_ratio: throughput must be >= 0");
    if (!(lambda_n > 0.0)) throw DomainError("retry_ratio: lambda must be > 0");
    double r = 1.0 - (throughput * point.pw) / (point.pairs * lambda_n * point.f);
    // Measured throughput is noisy; Eq. rat can stray slightly outside [0,1].
    return std::clamp(r, 0.0, 1.0);
}

}  // namespace qnrg::model
