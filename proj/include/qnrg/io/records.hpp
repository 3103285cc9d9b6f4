#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qnrg/errors.hpp"

namespace qnrg::io {

enum class PinningTag { Dense, Custom, Unpinned };
enum class LocalityTag { On, Off, Mixed };
enum class RecordSource { Bench, Synth, External };

const char* to_string(PinningTag t);
const char* to_string(LocalityTag t);
const char* to_string(RecordSource s);
PinningTag pinning_from_string(const std::string& s);
LocalityTag locality_from_string(const std::string& s);
RecordSource source_from_string(const std::string& s);

// one benchmark run: the workload point, the observed operation count and
// optionally the three component powers attached by an external meter.
struct MeasurementRecord {
    std::string impl;
    int pairs = 1;
    double f = 0.0;         // GHz
    double pw = 0.0;        // work units
    double duration = 0.0;  // seconds
    double ops_ok = 0.0;    // successful dequeues in the measured window
    int sockets_active = 1;
    PinningTag pinning = PinningTag::Dense;
    LocalityTag loc = LocalityTag::On;
    std::optional<double> p_cpu;  // W
    std::optional<double> p_mem;  // W
    std::optional<double> p_unc;  // W
    RecordSource source = RecordSource::Bench;

    double throughput() const { return ops_ok / duration; }

    bool has_power() const { return p_cpu.has_value(); }

    void validate() const {
        if (!(duration > 0.0)) throw SchemaError("record: duration must be > 0");
        if (ops_ok < 0.0) throw SchemaError("record: ops_ok must be >= 0");
        if (pairs < 1) throw SchemaError("record: pairs must be >= 1");
        if (!(f > 0.0)) throw SchemaError("record: frequency must be > 0");
        if (pw < 0.0) throw SchemaError("record: pw must be >= 0");
        if (sockets_active < 1) throw SchemaError("record: sockets_active must be >= 1");
        bool c = p_cpu.has_value(), m = p_mem.has_value(), u = p_unc.has_value();
        if (c != m || m != u)
            throw SchemaError("record: power columns must be jointly present or absent");
    }
};

}  // namespace qnrg::io
