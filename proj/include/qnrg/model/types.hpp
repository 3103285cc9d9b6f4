#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qnrg/errors.hpp"

namespace qnrg::model {

// Frequencies are in GHz throughout the library. The only exception is
// CpuPowerCoefficients, whose power law operates on deci-GHz (tenths of
// GHz) so that published instruction coefficients plug in unchanged.
inline constexpr double kDeciGhzPerGhz = 10.0;

// Default exponent used when the CPU power law is fitted from two points
// instead of a full frequency sweep.
inline constexpr double kDefaultAlpha = 1.7;

inline bool nearly_equal(double a, double b, double rel_tol = 1e-9) {
    double scale = std::fmax(1.0, std::fmax(std::fabs(a), std::fabs(b)));
    return std::fabs(a - b) <= rel_tol * scale;
}

struct MachineTopology {
    int sockets = 2;
    int cores_per_socket = 8;

    int total_cores() const { return sockets * cores_per_socket; }

    // Dense pinning fills sockets in order, so the number of active sockets
    // for t threads is the ceiling of t over the socket width.
    int active_sockets(int threads) const {
        return static_cast<int>((threads + cores_per_socket - 1) / cores_per_socket);
    }

    // Both roles of every pair fit on one socket.
    bool intra_socket(int pairs) const { return 2 * pairs <= cores_per_socket; }

    void validate() const {
        if (sockets < 1 || cores_per_socket < 1)
            throw DomainError("topology: sockets and cores_per_socket must be >= 1");
    }
};

// Cost of one compare-and-swap equivalent, split by operand locality.
// On-socket cost scales as a/f; off-socket cost keeps a non-scalable
// component b' contributed by the inter-socket link.
struct CasCostModel {
    double a = 0.0;        // seconds * GHz
    double a_prime = 0.0;  // seconds * GHz
    double b_prime = 0.0;  // seconds

    void validate() const {
        if (!(a > 0.0) || !(a_prime > 0.0) || b_prime < 0.0)
            throw DomainError("cas cost model: require a > 0, a' > 0, b' >= 0");
    }
};

// Work-units executed per second per GHz in the parallel section, keyed by
// the number of enqueuer/dequeuer pairs. The factor depends on the thread
// count because of the serialization primitives in the timed work loop.
class LambdaTable {
public:
    LambdaTable() = default;

    void set(int pairs, double lambda) {
        if (!(lambda > 0.0)) throw DomainError("lambda must be > 0");
        table_[pairs] = lambda;
    }

    bool contains(int pairs) const { return table_.count(pairs) != 0; }

    double at(int pairs) const {
        auto it = table_.find(pairs);
        if (it == table_.end())
            throw CalibrationGapError("lambda not calibrated for n=" + std::to_string(pairs));
        return it->second;
    }

    const std::map<int, double>& entries() const { return table_; }
    bool empty() const { return table_.empty(); }

private:
    std::map<int, double> table_;
};

// Intercept/slope of the congested-regime throughput line for one
// (frequency, pair-count) cell.
struct HcLine {
    double intercept = 0.0;  // ops/s
    double slope = 0.0;      // ops/s per work-unit
};

class HcLineTable {
public:
    void set(double f, int pairs, HcLine line) {
        if (line.slope < 0.0) throw DomainError("high-contention slope must be >= 0");
        for (auto& e : entries_) {
            if (e.pairs == pairs && nearly_equal(e.f, f)) {
                e.line = line;
                return;
            }
        }
        entries_.push_back({f, pairs, line});
    }

    bool contains(double f, int pairs) const { return find(f, pairs) != nullptr; }

    const HcLine& at(double f, int pairs) const {
        const HcLine* line = find(f, pairs);
        if (!line)
            throw CalibrationGapError("no congested line for f=" + std::to_string(f) +
                                      " n=" + std::to_string(pairs));
        return *line;
    }

    struct Entry {
        double f;
        int pairs;
        HcLine line;
    };
    const std::vector<Entry>& entries() const { return entries_; }

private:
    const HcLine* find(double f, int pairs) const {
        for (const auto& e : entries_)
            if (e.pairs == pairs && nearly_equal(e.f, f)) return &e.line;
        return nullptr;
    }

    std::vector<Entry> entries_;
};

// Calibrated throughput model of one queue implementation.
struct ThroughputModel {
    std::string impl;
    LambdaTable lambda;
    double cw_on = 0.0;   // retry-loop work, intra-socket (CAS equivalents)
    double cw_off = 0.0;  // retry-loop work, inter-socket
    HcLineTable hc_lines;

    void validate() const {
        if (!(cw_on > 0.0) || !(cw_off > 0.0))
            throw DomainError("throughput model: cw_on and cw_off must be > 0");
    }
};

// CPU dynamic power law P = A * f^alpha + B per thread, with f in deci-GHz.
struct CpuPowerCoefficients {
    double A = 0.0;      // W per (deci-GHz)^alpha
    double B = 0.0;      // W
    double alpha = kDefaultAlpha;

    void validate() const {
        if (A < 0.0 || B < 0.0 || !(alpha >= 1.0 && alpha <= 3.0))
            throw DomainError("cpu coefficients: require A >= 0, B >= 0, alpha in [1,3]");
    }
};

// Per-frequency table with tolerant key matching (frequencies come from a
// small calibrated grid, not a continuum).
class FreqTable {
public:
    void set(double f, double value) {
        for (auto& e : entries_) {
            if (nearly_equal(e.first, f)) {
                e.second = value;
                return;
            }
        }
        entries_.emplace_back(f, value);
    }

    bool contains(double f) const {
        for (const auto& e : entries_)
            if (nearly_equal(e.first, f)) return true;
        return false;
    }

    double at(double f) const {
        for (const auto& e : entries_)
            if (nearly_equal(e.first, f)) return e.second;
        throw CalibrationGapError("no table entry for f=" + std::to_string(f));
    }

    const std::vector<std::pair<double, double>>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }

private:
    std::vector<std::pair<double, double>> entries_;
};

enum class Component { Cpu = 0, Memory = 1, Uncore = 2 };
inline constexpr std::array<Component, 3> kComponents{Component::Cpu, Component::Memory,
                                                      Component::Uncore};
inline const char* component_name(Component c) {
    switch (c) {
        case Component::Cpu: return "cpu";
        case Component::Memory: return "memory";
        default: return "uncore";
    }
}

// Static baseline and per-socket activation power for each measured component.
struct StaticActiveTable {
    std::array<double, 3> p_stat{0.0, 0.0, 0.0};  // W, indexed by Component
    std::array<FreqTable, 3> p_act;               // W per active socket

    double stat(Component c) const { return p_stat[static_cast<int>(c)]; }
    double act(Component c, double f) const {
        const FreqTable& t = p_act[static_cast<int>(c)];
        return t.empty() ? 0.0 : t.at(f);
    }

    void validate() const {
        for (double v : p_stat)
            if (v < 0.0) throw DomainError("static power must be >= 0");
        for (const auto& t : p_act)
            for (const auto& e : t.entries())
                if (e.second < 0.0) throw DomainError("active power must be >= 0");
    }
};

// Memory/uncore access-intensity parameters. rho drives the retry-loop
// fraction of time, rho_prime the parallel-section fraction (mixed
// workloads only). The uncore adds a per-thread linear term on top.
struct MemoryPowerModel {
    double rho = 0.0;            // W per thread at full retry-loop occupancy
    double rho_prime = 0.0;      // W per thread at full parallel-section occupancy
    double rho_uncore = 0.0;     // uncore analog of rho
    double uncore_linear = 0.0;  // W per thread, occupancy-independent

    void validate() const {
        if (rho < 0.0 || rho_prime < 0.0 || rho_uncore < 0.0 || uncore_linear < 0.0)
            throw DomainError("memory power model: all intensities must be >= 0");
    }
};

// Bytes per second accessed in main or remote memory; the micro-benchmark
// level memory/uncore power is proportional to this rate.
struct MemoryAccessRate {
    double bytes_per_second = 0.0;

    void validate() const {
        if (bytes_per_second < 0.0) throw DomainError("memory access rate must be >= 0");
    }
};

// One point of the workload space the models predict over.
struct WorkloadPoint {
    std::string impl;
    int pairs = 1;    // n: enqueuer/dequeuer pairs (threads per role)
    double f = 1.0;   // GHz
    double pw = 0.0;  // parallel work units (bunches of 10 fp divisions)

    int total_threads() const { return 2 * pairs; }

    void validate() const {
        if (pairs < 1) throw DomainError("workload: pairs must be >= 1");
        if (!(f > 0.0)) throw DomainError("workload: frequency must be > 0");
        if (pw < 0.0) throw DomainError("workload: pw must be >= 0");
    }
};

enum class PowerKind { Static = 0, Active = 1, Dynamic = 2 };
inline const char* power_kind_name(PowerKind k) {
    switch (k) {
        case PowerKind::Static: return "static";
        case PowerKind::Active: return "active";
        default: return "dynamic";
    }
}

// The 3x3 decomposition {static, active, dynamic} x {CPU, memory, uncore}.
struct PowerBreakdown {
    // cells[kind][component], W
    std::array<std::array<double, 3>, 3> cells{};

    double& cell(PowerKind k, Component c) {
        return cells[static_cast<int>(k)][static_cast<int>(c)];
    }
    double cell(PowerKind k, Component c) const {
        return cells[static_cast<int>(k)][static_cast<int>(c)];
    }

    double total() const {
        double sum = 0.0;
        for (const auto& row : cells)
            for (double v : row) sum += v;
        return sum;
    }

    double component_total(Component c) const {
        double sum = 0.0;
        for (const auto& row : cells) sum += row[static_cast<int>(c)];
        return sum;
    }

    double kind_total(PowerKind k) const {
        double sum = 0.0;
        for (double v : cells[static_cast<int>(k)]) sum += v;
        return sum;
    }

    void validate() const {
        for (const auto& row : cells)
            for (double v : row)
                if (v < 0.0) throw DomainError("power breakdown cells must be >= 0");
    }
};

enum class Regime { Congested, NonCongested };
inline const char* regime_name(Regime r) {
    return r == Regime::Congested ? "congested" : "non_congested";
}

// Full prediction for one workload point.
struct PredictionReport {
    double throughput = 0.0;  // ops/s
    Regime regime = Regime::NonCongested;
    double retry_ratio = 0.0;  // r in [0,1]
    PowerBreakdown breakdown;
    double energy_per_op = 0.0;  // J
};

// Embedded-platform power model: static power, per-active-core power, and
// per-functional-unit dynamic power plus inter-operational cost, all in mW.
struct MovidiusModel {
    struct UnitPower {
        double p_dyn = 0.0;  // mW when the unit runs alone on a core
        double o_cost = 0.0; // mW surcharge when combined with other units
    };

    double p_stat = 0.0;  // mW
    double p_act = 0.0;   // mW per active SHAVE
    std::map<std::string, UnitPower> units;

    void validate() const {
        if (p_stat < 0.0 || p_act < 0.0)
            throw DomainError("movidius model: powers must be >= 0");
        for (const auto& [id, u] : units)
            if (u.p_dyn < 0.0 || u.o_cost < 0.0)
                throw DomainError("movidius model: unit powers must be >= 0 (" + id + ")");
    }
};

// Bundle of everything needed to predict power for one implementation.
struct PowerModel {
    StaticActiveTable static_active;
    CpuPowerCoefficients cpu;
    MemoryPowerModel memory;
};

}  // namespace qnrg::model
