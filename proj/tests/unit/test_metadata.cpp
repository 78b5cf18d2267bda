#include <catch_amalgamated.hpp>

#include "generators.hpp"
#include "sdi/error.hpp"
#include "sdi/metadata.hpp"

using namespace sdi;

namespace {

MetadataRecord full_record() {
    testing::Rng rng(testing::kDefaultSeed);
    return testing::random_record(rng, 1);
}

bool has_violation(const ValidationReport& r, const std::string& field) {
    for (const auto& v : r.violations)
        if (v.field == field) return true;
    return false;
}

}  // namespace

TEST_CASE("box invariants") {
    CHECK(is_valid(GeoBox{-180, 180, -90, 90}));
    CHECK(is_valid(GeoBox{10, 10, 5, 5}));
    CHECK_FALSE(is_valid(GeoBox{10, -10, 0, 1}));
    auto v = box_violations(GeoBox{0, 1, 0, 95});
    REQUIRE(v.size() == 1);
    CHECK(v[0].field == "bbox.north");
    auto order = box_violations(GeoBox{10, -10, 0, 1});
    REQUIRE(order.size() == 1);
    CHECK(order[0].field == "bbox");
    CHECK_FALSE(is_valid(GeoBox{std::nan(""), 0, 0, 0}));
}

TEST_CASE("closed-set predicates") {
    GeoBox a{0, 10, 0, 10};
    CHECK(intersects(a, GeoBox{10, 20, 10, 20}));
    CHECK_FALSE(intersects(a, GeoBox{10.5, 20, 0, 10}));
    CHECK(covered_by(a, a));
    CHECK(covered_by(GeoBox{0, 0, 0, 0}, a));
    CHECK_FALSE(covered_by(GeoBox{-1, 5, 0, 5}, a));
}

TEST_CASE("sdi-basic profile fields") {
    const auto& p = MetadataProfile::sdi_basic();
    CHECK(p.name() == "sdi-basic");
    CHECK(p.mandatory().size() == 6);
    CHECK(p.recommended().size() == 7);
}

TEST_CASE("profile construction rejects overlap and duplicates") {
    using F = RecordField;
    CHECK_THROWS_AS(MetadataProfile("p", {F::title, F::title}, {}), SchemaError);
    CHECK_THROWS_AS(MetadataProfile("p", {F::title}, {F::title}), SchemaError);
    CHECK_THROWS_AS(MetadataProfile::from_json_text(R"({"mandatory":["nope"]})"), SchemaError);
    auto p = MetadataProfile::from_json_text(R"({"name":"mini","mandatory":["title"],"recommended":["bbox"]})");
    CHECK(p.name() == "mini");
    CHECK(p.mandatory().size() == 1);
}

TEST_CASE("fully populated record is valid and complete") {
    auto report = validate_record(full_record(), MetadataProfile::sdi_basic());
    CHECK(report.valid);
    CHECK(report.completeness == 1.0);
    CHECK(report.missing_mandatory.empty());
    CHECK(report.missing_recommended.empty());
}

TEST_CASE("missing title is reported") {
    auto r = full_record();
    r.title.clear();
    auto report = validate_record(r, MetadataProfile::sdi_basic());
    CHECK_FALSE(report.valid);
    CHECK(report.missing_mandatory == std::vector<std::string>{"title"});
}

TEST_CASE("inverted box is a violation") {
    auto r = full_record();
    r.bbox = GeoBox{10, -10, 0, 1};
    auto report = validate_record(r, MetadataProfile::sdi_basic());
    CHECK_FALSE(report.valid);
    CHECK(has_violation(report, "bbox"));
}

TEST_CASE("temporal order and endpoint urls are checked") {
    auto r = full_record();
    r.temporal_extent = TemporalExtent{Timestamp{std::chrono::seconds{10}}, Timestamp{std::chrono::seconds{5}}};
    r.access_endpoints = {{"WMS", "https://ok.example.org/wms"}, {"WMS", "not a url"}};
    auto report = validate_record(r, MetadataProfile::sdi_basic());
    CHECK(has_violation(report, "temporal_extent"));
    CHECK(has_violation(report, "access_endpoints[1].url"));
    CHECK_FALSE(has_violation(report, "access_endpoints[0].url"));
}

TEST_CASE("url syntax") {
    CHECK(is_absolute_url("http://a.b"));
    CHECK(is_absolute_url("https://maps.example.org:8443/wms?SERVICE=WMS"));
    CHECK(is_absolute_url("ftp://host/path"));
    CHECK_FALSE(is_absolute_url("/relative/path"));
    CHECK_FALSE(is_absolute_url("http://"));
    CHECK_FALSE(is_absolute_url("http://host with space/"));
}

TEST_CASE("completeness score formula") {
    using F = RecordField;
    MetadataProfile p("four-two", {F::title, F::abstract, F::publisher, F::bbox}, {F::lineage, F::contact});
    MetadataRecord r;
    CHECK(completeness_score(r, p) == 0.0);
    r.title = "t";
    r.abstract = "a";
    // (2 + 0) / (4 + 2 * 0.5)
    CHECK(completeness_score(r, p) == Catch::Approx(2.0 / 5.0).epsilon(1e-15));
    r.lineage = "l";
    CHECK(completeness_score(r, p) == Catch::Approx(2.5 / 5.0).epsilon(1e-15));
    CHECK(completeness_score(r, MetadataProfile("empty", {}, {})) == 1.0);
}

TEST_CASE("completeness is monotone in populated fields") {
    testing::Rng rng(7);
    const auto& p = MetadataProfile::sdi_basic();
    auto source = testing::random_record(rng, 0);
    MetadataRecord r;
    double last = completeness_score(r, p);
    // Copy fields over one at a time.
    for (auto f : kAllRecordFields) {
        switch (f) {
            case RecordField::id: r.id = source.id; break;
            case RecordField::resource_type: r.resource_type = source.resource_type; break;
            case RecordField::title: r.title = source.title; break;
            case RecordField::abstract: r.abstract = source.abstract; break;
            case RecordField::keywords: r.keywords = source.keywords; break;
            case RecordField::topic_category: r.topic_category = source.topic_category; break;
            case RecordField::bbox: r.bbox = source.bbox; break;
            case RecordField::temporal_extent: r.temporal_extent = source.temporal_extent; break;
            case RecordField::crs_list: r.crs_list = source.crs_list; break;
            case RecordField::lineage: r.lineage = source.lineage; break;
            case RecordField::publisher: r.publisher = source.publisher; break;
            case RecordField::contact: r.contact = source.contact; break;
            case RecordField::access_endpoints: r.access_endpoints = source.access_endpoints; break;
            case RecordField::created: r.created = source.created; break;
            case RecordField::modified: r.modified = source.modified; break;
        }
        double now = completeness_score(r, p);
        CHECK(now >= last);
        last = now;
    }
    CHECK(last == 1.0);
}

TEST_CASE("validation is pure") {
    testing::Rng rng(11);
    for (int i = 0; i < 50; ++i) {
        auto r = testing::random_any_record(rng, i);
        CHECK(validate_record(r, MetadataProfile::sdi_basic()) ==
              validate_record(r, MetadataProfile::sdi_basic()));
    }
}

TEST_CASE("field names round-trip") {
    for (auto f : kAllRecordFields) CHECK(parse_field_name(field_name(f)) == f);
    CHECK_FALSE(parse_field_name("colour"));
}
