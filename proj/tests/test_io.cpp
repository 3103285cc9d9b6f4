#include <doctest.h>

#include <random>
#include <sstream>

#include "qnrg/io/bundle.hpp"
#include "qnrg/io/csv.hpp"
#include "qnrg/synth/machine.hpp"

using namespace qnrg;
using namespace qnrg::io;

namespace {

MeasurementRecord random_record(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(1e-6, 1e9);
    std::uniform_int_distribution<int> small(1, 16);
    std::uniform_int_distribution<int> coin(0, 1);
    MeasurementRecord rec;
    rec.impl = "a" + std::to_string(small(rng) % 7);
    rec.pairs = small(rng);
    rec.f = u(rng);
    rec.pw = u(rng);
    rec.duration = u(rng);
    rec.ops_ok = u(rng);
    rec.sockets_active = 1 + small(rng) % 2;
    rec.pinning = static_cast<PinningTag>(small(rng) % 3);
    rec.loc = static_cast<LocalityTag>(small(rng) % 3);
    if (coin(rng)) {
        rec.p_cpu = u(rng);
        rec.p_mem = u(rng);
        rec.p_unc = u(rng);
    }
    rec.source = static_cast<RecordSource>(small(rng) % 3);
    return rec;
}

bool equal(const MeasurementRecord& a, const MeasurementRecord& b) {
    return a.impl == b.impl && a.pairs == b.pairs && a.f == b.f && a.pw == b.pw &&
           a.duration == b.duration && a.ops_ok == b.ops_ok &&
           a.sockets_active == b.sockets_active && a.pinning == b.pinning &&
           a.loc == b.loc && a.p_cpu == b.p_cpu && a.p_mem == b.p_mem &&
           a.p_unc == b.p_unc && a.source == b.source;
}

}  // namespace

TEST_CASE("double formatting round-trips bit for bit") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1e12, 1e12);
    for (int i = 0; i < 1000; ++i) {
        double v = u(rng) * std::pow(10.0, static_cast<int>(u(rng)) % 30);
        CHECK(parse_double(format_double(v), "x") == v);
    }
    CHECK(parse_double("0.1", "x") == 0.1);
    CHECK_THROWS_AS(parse_double("1,5", "x"), SchemaError);
    CHECK_THROWS_AS(parse_double("", "x"), SchemaError);
}

TEST_CASE_TEMPLATE_DEFINE("record round trip identity", F, record_roundtrip) {
    constexpr RecordFormat format = F::value;
    std::mt19937_64 rng(11);
    std::vector<MeasurementRecord> records;
    for (int i = 0; i < 10000; ++i) records.push_back(random_record(rng));

    std::stringstream buf;
    write_measurements(buf, records, format);
    auto parsed = parse_measurements(buf, format);
    REQUIRE(parsed.size() == records.size());
    for (size_t i = 0; i < records.size(); ++i) CHECK(equal(records[i], parsed[i]));
}
using CsvTag = std::integral_constant<RecordFormat, RecordFormat::Csv>;
using JsonlTag = std::integral_constant<RecordFormat, RecordFormat::JsonLines>;
TEST_CASE_TEMPLATE_INVOKE(record_roundtrip, CsvTag, JsonlTag);

TEST_CASE("csv is bit-exact text") {
    MeasurementRecord rec;
    rec.impl = "a0";
    rec.pairs = 4;
    rec.f = 3.4;
    rec.pw = 0.5;
    rec.duration = 1.0;
    rec.ops_ok = 12345.0;
    rec.sockets_active = 1;
    std::stringstream buf;
    write_measurements(buf, {rec}, RecordFormat::Csv);
    std::string text = buf.str();
    CHECK(text ==
          "impl,n,f,pw,duration,ops_ok,sockets_active,pinning,loc,p_cpu,p_mem,p_unc,source\n"
          "a0,4,3.4,0.5,1,12345,1,dense,on,,,,bench\n");
}

TEST_CASE("schema violations are named") {
    std::stringstream missing_header("impl,n,f\n");
    CHECK_THROWS_WITH_AS(parse_measurements(missing_header, RecordFormat::Csv),
                         doctest::Contains("pw"), SchemaError);

    std::stringstream bad_rows(
        "impl,n,f,pw,duration,ops_ok,sockets_active,pinning,loc,p_cpu,p_mem,p_unc,source\n"
        "a0,4,3.4,0,1,10,1,dense,on,,,,bench\n"
        "a0,4,3.4,0,1,10,1,dense,on,1.5,,,bench\n");
    CHECK_THROWS_WITH_AS(parse_measurements(bad_rows, RecordFormat::Csv),
                         doctest::Contains("line 3"), SchemaError);

    std::stringstream negative(
        "impl,n,f,pw,duration,ops_ok,sockets_active,pinning,loc,p_cpu,p_mem,p_unc,source\n"
        "a0,4,3.4,0,-1,10,1,dense,on,,,,bench\n");
    CHECK_THROWS_AS(parse_measurements(negative, RecordFormat::Csv), SchemaError);
}

TEST_CASE("bundle json round trip is lossless") {
    synth::PlantedMachine m = synth::default_plant();
    ModelBundle bundle;
    bundle.topology = m.topology;
    bundle.cas = m.cas;
    bundle.static_active = m.static_active;
    bundle.memory = m.memory;
    for (const auto& id : m.impl_ids()) {
        ModelBundle::ImplModels impl;
        impl.throughput = m.throughput_model(id);
        impl.cpu = m.cpu.at(id);
        bundle.impls[id] = impl;
    }
    bundle.provenance.input_digests["records"] = "0123456789abcdef";
    bundle.provenance.stats["rho_spread"] = 1.25e-17;
    bundle.provenance.notes.push_back("note");

    std::string text = bundle_to_json(bundle);
    ModelBundle back = bundle_from_json(text);

    CHECK(back.topology.sockets == bundle.topology.sockets);
    CHECK(back.cas.a == bundle.cas.a);
    CHECK(back.cas.b_prime == bundle.cas.b_prime);
    CHECK(back.memory.rho == bundle.memory.rho);
    for (const auto& id : m.impl_ids()) {
        const auto& a = bundle.impls.at(id);
        const auto& b = back.impls.at(id);
        CHECK(b.cpu.A == a.cpu.A);
        CHECK(b.throughput.cw_on == a.throughput.cw_on);
        CHECK(b.throughput.lambda.at(4) == a.throughput.lambda.at(4));
        CHECK(b.throughput.hc_lines.at(3.4, 4).slope ==
              a.throughput.hc_lines.at(3.4, 4).slope);
    }
    CHECK(back.provenance.stats.at("rho_spread") == 1.25e-17);

    // Canonical form: serializing again yields the identical document.
    CHECK(bundle_to_json(back) == text);
}
