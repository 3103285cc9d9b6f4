#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "qnrg/calib/fits.hpp"
#include "qnrg/io/records.hpp"

namespace qnrg::io {

enum class RecordFormat { Csv, JsonLines };

// Shortest-round-trip decimal rendering; parse(format(x)) == x bit for bit.
std::string format_double(double v);
double parse_double(const std::string& s, const std::string& what);

// All-or-nothing parse: any malformed row fails the whole file, with line
// numbers in the message. The CSV header is mandatory and fixed-order.
std::vector<MeasurementRecord> parse_measurements(std::istream& in, RecordFormat format);
std::vector<MeasurementRecord> parse_measurements_file(const std::string& path,
                                                       RecordFormat format);

void write_measurements(std::ostream& out, const std::vector<MeasurementRecord>& records,
                        RecordFormat format, bool with_header = true);
void write_measurements_file(const std::string& path,
                             const std::vector<MeasurementRecord>& records,
                             RecordFormat format, bool append = false);

// CAS timing samples: header "locality,f,t" with locality in {on, off}.
struct CasSampleFile {
    std::vector<calib::CasSample> on;
    std::vector<calib::CasSample> off;
};
CasSampleFile parse_cas_samples(std::istream& in);
CasSampleFile parse_cas_samples_file(const std::string& path);
void write_cas_samples(std::ostream& out, const CasSampleFile& samples);

// Register-operation power grid: header "op,f,sockets,threads,p_cpu,p_mem,p_unc".
std::vector<calib::PowerGridCell> parse_reg_grid(std::istream& in);
std::vector<calib::PowerGridCell> parse_reg_grid_file(const std::string& path);
void write_reg_grid(std::ostream& out, const std::vector<calib::PowerGridCell>& grid);

}  // namespace qnrg::io
