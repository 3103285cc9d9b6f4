#include "qnrg/io/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace qnrg::io {

const char* to_string(PinningTag t) {
    switch (t) {
        case PinningTag::Dense: return "dense";
        case PinningTag::Custom: return "custom";
        default: return "unpinned";
    }
}

const char* to_string(LocalityTag t) {
    switch (t) {
        case LocalityTag::On: return "on";
        case LocalityTag::Off: return "off";
        default: return "mixed";
    }
}

const char* to_string(RecordSource s) {
    switch (s) {
        case RecordSource::Bench: return "bench";
        case RecordSource::Synth: return "synth";
        default: return "external";
    }
}

PinningTag pinning_from_string(const std::string& s) {
    if (s == "dense") return PinningTag::Dense;
    if (s == "custom") return PinningTag::Custom;
    if (s == "unpinned") return PinningTag::Unpinned;
    throw SchemaError("unknown pinning tag '" + s + "'");
}

LocalityTag locality_from_string(const std::string& s) {
    if (s == "on") return LocalityTag::On;
    if (s == "off") return LocalityTag::Off;
    if (s == "mixed") return LocalityTag::Mixed;
    throw SchemaError("unknown locality tag '" + s + "'");
}

RecordSource source_from_string(const std::string& s) {
    if (s == "bench") return RecordSource::Bench;
    if (s == "synth") return RecordSource::Synth;
    if (s == "external") return RecordSource::External;
    throw SchemaError("unknown record source '" + s + "'");
}

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s, const std::string& what) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw SchemaError("bad numeric value '" + s + "' for " + what);
    return v;
}

namespace {

constexpr const char* kRecordHeader =
    "impl,n,f,pw,duration,ops_ok,sockets_active,pinning,loc,p_cpu,p_mem,p_unc,source";

long parse_int(const std::string& s, const std::string& what) {
    long v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw SchemaError("bad integer value '" + s + "' for " + what);
    return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    fields.push_back(cur);
    return fields;
}

MeasurementRecord record_from_fields(const std::vector<std::string>& f) {
    if (f.size() != 13)
        throw SchemaError("expected 13 columns, got " + std::to_string(f.size()));
    MeasurementRecord rec;
    rec.impl = f[0];
    rec.pairs = static_cast<int>(parse_int(f[1], "n"));
    rec.f = parse_double(f[2], "f");
    rec.pw = parse_double(f[3], "pw");
    rec.duration = parse_double(f[4], "duration");
    rec.ops_ok = parse_double(f[5], "ops_ok");
    rec.sockets_active = static_cast<int>(parse_int(f[6], "sockets_active"));
    rec.pinning = pinning_from_string(f[7]);
    rec.loc = locality_from_string(f[8]);
    if (!f[9].empty()) rec.p_cpu = parse_double(f[9], "p_cpu");
    if (!f[10].empty()) rec.p_mem = parse_double(f[10], "p_mem");
    if (!f[11].empty()) rec.p_unc = parse_double(f[11], "p_unc");
    rec.source = source_from_string(f[12]);
    rec.validate();
    return rec;
}

MeasurementRecord record_from_json(const nlohmann::json& j) {
    MeasurementRecord rec;
    rec.impl = j.at("impl").get<std::string>();
    rec.pairs = j.at("n").get<int>();
    rec.f = j.at("f").get<double>();
    rec.pw = j.at("pw").get<double>();
    rec.duration = j.at("duration").get<double>();
    rec.ops_ok = j.at("ops_ok").get<double>();
    rec.sockets_active = j.at("sockets_active").get<int>();
    rec.pinning = pinning_from_string(j.at("pinning").get<std::string>());
    rec.loc = locality_from_string(j.at("loc").get<std::string>());
    auto opt = [&](const char* key) -> std::optional<double> {
        if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
        return j.at(key).get<double>();
    };
    rec.p_cpu = opt("p_cpu");
    rec.p_mem = opt("p_mem");
    rec.p_unc = opt("p_unc");
    rec.source = source_from_string(j.at("source").get<std::string>());
    rec.validate();
    return rec;
}

}  // namespace

std::vector<MeasurementRecord> parse_measurements(std::istream& in, RecordFormat format) {
    std::vector<MeasurementRecord> records;
    std::vector<std::string> errors;
    std::string line;
    long line_no = 0;

    if (format == RecordFormat::Csv) {
        if (!std::getline(in, line)) throw SchemaError("empty input: missing header row");
        ++line_no;
        if (line != kRecordHeader) {
            // Name the first column that deviates.
            auto expect = split_csv_line(kRecordHeader);
            auto got = split_csv_line(line);
            for (size_t i = 0; i < expect.size(); ++i) {
                if (i >= got.size() || got[i] != expect[i])
                    throw SchemaError("header mismatch at column " + std::to_string(i + 1) +
                                      ": expected '" + expect[i] + "'");
            }
            throw SchemaError("header has trailing columns");
        }
    }

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            if (format == RecordFormat::Csv)
                records.push_back(record_from_fields(split_csv_line(line)));
            else
                records.push_back(record_from_json(nlohmann::json::parse(line)));
        } catch (const std::exception& e) {
            errors.push_back("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (!errors.empty()) {
        std::string msg = "malformed rows (parse is all-or-nothing):";
        for (const auto& e : errors) msg += "\n  " + e;
        throw SchemaError(msg);
    }
    return records;
}

std::vector<MeasurementRecord> parse_measurements_file(const std::string& path,
                                                       RecordFormat format) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open '" + path + "'");
    return parse_measurements(in, format);
}

namespace {

std::string record_to_csv(const MeasurementRecord& rec) {
    std::string out;
    out += rec.impl;
    out += ',' + std::to_string(rec.pairs);
    out += ',' + format_double(rec.f);
    out += ',' + format_double(rec.pw);
    out += ',' + format_double(rec.duration);
    out += ',' + format_double(rec.ops_ok);
    out += ',' + std::to_string(rec.sockets_active);
    out += ',';
    out += to_string(rec.pinning);
    out += ',';
    out += to_string(rec.loc);
    out += ',';
    if (rec.p_cpu) out += format_double(*rec.p_cpu);
    out += ',';
    if (rec.p_mem) out += format_double(*rec.p_mem);
    out += ',';
    if (rec.p_unc) out += format_double(*rec.p_unc);
    out += ',';
    out += to_string(rec.source);
    return out;
}

nlohmann::ordered_json record_to_json(const MeasurementRecord& rec) {
    nlohmann::ordered_json j;
    j["impl"] = rec.impl;
    j["n"] = rec.pairs;
    j["f"] = rec.f;
    j["pw"] = rec.pw;
    j["duration"] = rec.duration;
    j["ops_ok"] = rec.ops_ok;
    j["sockets_active"] = rec.sockets_active;
    j["pinning"] = to_string(rec.pinning);
    j["loc"] = to_string(rec.loc);
    j["p_cpu"] = rec.p_cpu ? nlohmann::ordered_json(*rec.p_cpu) : nullptr;
    j["p_mem"] = rec.p_mem ? nlohmann::ordered_json(*rec.p_mem) : nullptr;
    j["p_unc"] = rec.p_unc ? nlohmann::ordered_json(*rec.p_unc) : nullptr;
    j["source"] = to_string(rec.source);
    return j;
}

}  // namespace

void write_measurements(std::ostream& out, const std::vector<MeasurementRecord>& records,
                        RecordFormat format, bool with_header) {
    if (format == RecordFormat::Csv && with_header) out << kRecordHeader << '\n';
    for (const auto& rec : records) {
        rec.validate();
        if (format == RecordFormat::Csv)
            out << record_to_csv(rec) << '\n';
        else
            out << record_to_json(rec).dump() << '\n';
    }
}

void write_measurements_file(const std::string& path,
                             const std::vector<MeasurementRecord>& records,
                             RecordFormat format, bool append) {
    bool exists = false;
    if (append) {
        std::ifstream probe(path);
        exists = probe.good() && probe.peek() != std::ifstream::traits_type::eof();
    }
    std::ofstream out(path, append ? std::ios::app : std::ios::trunc);
    if (!out) throw SchemaError("cannot write '" + path + "'");
    write_measurements(out, records, format, !(append && exists));
}

CasSampleFile parse_cas_samples(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "locality,f,t")
        throw SchemaError("cas samples: expected header 'locality,f,t'");
    CasSampleFile out;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != 3)
            throw SchemaError("cas samples line " + std::to_string(line_no) +
                              ": expected 3 columns");
        calib::CasSample s{parse_double(fields[1], "f"), parse_double(fields[2], "t")};
        if (fields[0] == "on")
            out.on.push_back(s);
        else if (fields[0] == "off")
            out.off.push_back(s);
        else
            throw SchemaError("cas samples line " + std::to_string(line_no) +
                              ": locality must be on or off");
    }
    return out;
}

CasSampleFile parse_cas_samples_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open '" + path + "'");
    return parse_cas_samples(in);
}

void write_cas_samples(std::ostream& out, const CasSampleFile& samples) {
    out << "locality,f,t\n";
    for (const auto& s : samples.on)
        out << "on," << format_double(s.f) << ',' << format_double(s.t) << '\n';
    for (const auto& s : samples.off)
        out << "off," << format_double(s.f) << ',' << format_double(s.t) << '\n';
}

std::vector<calib::PowerGridCell> parse_reg_grid(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "op,f,sockets,threads,p_cpu,p_mem,p_unc")
        throw SchemaError("reg grid: expected header 'op,f,sockets,threads,p_cpu,p_mem,p_unc'");
    std::vector<calib::PowerGridCell> grid;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != 7)
            throw SchemaError("reg grid line " + std::to_string(line_no) +
                              ": expected 7 columns");
        calib::PowerGridCell cell;
        cell.op = fields[0];
        cell.f = parse_double(fields[1], "f");
        cell.sockets = static_cast<int>(parse_int(fields[2], "sockets"));
        cell.threads = static_cast<int>(parse_int(fields[3], "threads"));
        cell.power[0] = parse_double(fields[4], "p_cpu");
        cell.power[1] = parse_double(fields[5], "p_mem");
        cell.power[2] = parse_double(fields[6], "p_unc");
        grid.push_back(cell);
    }
    return grid;
}

std::vector<calib::PowerGridCell> parse_reg_grid_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open '" + path + "'");
    return parse_reg_grid(in);
}

void write_reg_grid(std::ostream& out, const std::vector<calib::PowerGridCell>& grid) {
    out << "op,f,sockets,threads,p_cpu,p_mem,p_unc\n";
    for (const auto& cell : grid) {
        out << cell.op << ',' << format_double(cell.f) << ',' << cell.sockets << ','
            << cell.threads << ',' << format_double(cell.power[0]) << ','
            << format_double(cell.power[1]) << ',' << format_double(cell.power[2]) << '\n';
    }
}

}  // namespace qnrg::io
