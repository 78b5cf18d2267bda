#include <catch_amalgamated.hpp>

#include <set>

#include "fixtures.hpp"
#include "sdi/capabilities.hpp"

using namespace sdi;
using Catch::Matchers::WithinAbs;

namespace {

const std::string kSource = "http://example.org/wms";

ServiceDescription radar() {
    return parse_capabilities(testing::read_text(testing::data_path("radar_capabilities.xml")), kSource);
}

void check_box(const GeoBox& b, double west, double east, double south, double north) {
    CHECK_THAT(b.west, WithinAbs(west, 1e-9));
    CHECK_THAT(b.east, WithinAbs(east, 1e-9));
    CHECK_THAT(b.south, WithinAbs(south, 1e-9));
    CHECK_THAT(b.north, WithinAbs(north, 1e-9));
}

std::string wrap(const std::string& layer_body, const std::string& extra_request = "") {
    return "<WMS_Capabilities><Capability><Request><GetCapabilities/>" + extra_request +
           "</Request><Layer>" + layer_body + "</Layer></Capability></WMS_Capabilities>";
}

CapabilitiesError::Kind error_kind(const std::string& xml) {
    try {
        parse_capabilities(xml, kSource);
    } catch (const CapabilitiesError& e) {
        return e.kind();
    }
    FAIL("expected CapabilitiesError");
    return CapabilitiesError::Kind::structure;
}

}  // namespace

TEST_CASE("radar capabilities parse to the golden value") {
    auto s = radar();
    CHECK(s.source_url == kSource);
    CHECK(s.operations == std::set<Operation>{Operation::GetCapabilities, Operation::GetMap,
                                              Operation::GetFeatureInfo, Operation::GetStyles});
    CHECK(s.other_operations.empty());
    REQUIRE(s.layers.size() == 1);
    const auto& layer = s.layers[0];
    CHECK(layer.title == testing::kRadarTitle);
    CHECK(layer.crs_list == std::vector<std::string>{"CRS:84", "EPSG:4326", "EPSG:3857", "EPSG:102100"});
    REQUIRE(layer.geographic_bbox);
    check_box(*layer.geographic_bbox, -179.999996, 179.999996, -89.0, 89.0);
    REQUIRE(layer.crs_bboxes.size() == 3);
    CHECK(layer.crs_bboxes[0].crs == "CRS:84");
    const auto& latlon = layer.crs_bboxes[1];
    CHECK(latlon.crs == "EPSG:4326");
    CHECK_THAT(latlon.minx, WithinAbs(-89.0, 1e-9));
    CHECK_THAT(latlon.miny, WithinAbs(-179.999996, 1e-9));
    CHECK_THAT(latlon.maxx, WithinAbs(89.0, 1e-9));
    CHECK_THAT(latlon.maxy, WithinAbs(179.999996, 1e-9));
    CHECK(layer.crs_bboxes[2].crs == "EPSG:3857");
    CHECK_THAT(layer.crs_bboxes[2].maxy, WithinAbs(30240971.458386, 1e-9));
}

TEST_CASE("capability as document root without layers") {
    auto s = parse_capabilities("<Capability><Request><GetCapabilities/></Request></Capability>", kSource);
    CHECK(s.operations == std::set<Operation>{Operation::GetCapabilities});
    CHECK(s.layers.empty());
}

TEST_CASE("unknown operations are kept as other labels") {
    auto s = parse_capabilities(wrap("<Title>t</Title>", "<ogc:DescribeLayer/>"), kSource);
    CHECK(s.other_operations == std::vector<std::string>{"DescribeLayer"});
}

TEST_CASE("extent derivations agree on the radar layer") {
    auto layer = radar().layers.at(0);
    GeoBox from_geo = geographic_extent(layer);

    auto only_crs84 = layer;
    only_crs84.geographic_bbox.reset();
    GeoBox from_crs84 = geographic_extent(only_crs84);

    auto only_4326 = only_crs84;
    only_4326.crs_bboxes.erase(only_4326.crs_bboxes.begin());
    GeoBox from_4326 = geographic_extent(only_4326);

    for (const auto* b : {&from_geo, &from_crs84, &from_4326})
        check_box(*b, -179.999996, 179.999996, -89.0, 89.0);
    CHECK(geographic_extent(layer) == from_geo);
}

TEST_CASE("layer with only a latitude-first EPSG:4326 box") {
    auto s = parse_capabilities(
        wrap("<Title>t</Title><CRS>EPSG:4326</CRS>"
             R"(<BoundingBox CRS="EPSG:4326" minx="-89" miny="-179.999996" maxx="89" maxy="179.999996"/>)"),
        kSource);
    check_box(geographic_extent(s.layers.at(0)), -179.999996, 179.999996, -89.0, 89.0);
}

TEST_CASE("layer without extent information") {
    auto s = parse_capabilities(wrap("<Title>t</Title><CRS>EPSG:3857</CRS>"), kSource);
    CHECK_THROWS_AS(geographic_extent(s.layers.at(0)), NoExtentError);
}

TEST_CASE("bounding box crs missing from the crs list is appended with a warning") {
    auto s = parse_capabilities(
        wrap(R"(<Title>t</Title><BoundingBox CRS="CRS:84" minx="0" miny="0" maxx="1" maxy="1"/>)"), kSource);
    CHECK(s.layers.at(0).crs_list == std::vector<std::string>{"CRS:84"});
    CHECK_FALSE(s.warnings.empty());
}

TEST_CASE("child layers inherit and grandchildren are skipped") {
    std::string xml = wrap(
        "<Title>parent</Title><CRS>EPSG:4326</CRS>"
        "<EX_GeographicBoundingBox><westBoundLongitude>1</westBoundLongitude>"
        "<eastBoundLongitude>2</eastBoundLongitude><southBoundLatitude>3</southBoundLatitude>"
        "<northBoundLatitude>4</northBoundLatitude></EX_GeographicBoundingBox>"
        "<Layer><Title>child</Title><Layer><Title>grandchild</Title></Layer></Layer>"
        "<Style><Name>default</Name></Style>");
    auto s = parse_capabilities(xml, kSource);
    REQUIRE(s.layers.size() == 2);
    CHECK(s.layers[1].title == "child");
    CHECK(s.layers[1].crs_list == s.layers[0].crs_list);
    CHECK(s.layers[1].geographic_bbox == s.layers[0].geographic_bbox);
    CHECK(s.warnings.size() >= 2);
}

TEST_CASE("error kinds") {
    CHECK(error_kind("<Capability><Request>") == CapabilitiesError::Kind::xml_syntax);
    CHECK(error_kind("<Root><Service/></Root>") == CapabilitiesError::Kind::structure);
    CHECK(error_kind("<Capability><Request/></Capability>") == CapabilitiesError::Kind::structure);
    CHECK(error_kind(wrap("<Title>t</Title><EX_GeographicBoundingBox><westBoundLongitude>1</westBoundLongitude>"
                          "</EX_GeographicBoundingBox>")) == CapabilitiesError::Kind::structure);
    CHECK(error_kind(wrap("<Title>t</Title><EX_GeographicBoundingBox><westBoundLongitude>west</westBoundLongitude>"
                          "<eastBoundLongitude>2</eastBoundLongitude><southBoundLatitude>3</southBoundLatitude>"
                          "<northBoundLatitude>4</northBoundLatitude></EX_GeographicBoundingBox>")) ==
          CapabilitiesError::Kind::numeric);
    CHECK(error_kind(wrap(R"(<Title>t</Title><BoundingBox CRS="CRS:84" minx="a" miny="0" maxx="1" maxy="1"/>)")) ==
          CapabilitiesError::Kind::numeric);
}

TEST_CASE("syntax errors carry a line") {
    try {
        parse_capabilities("<Capability>\n<Request>\n<GetMap>\n</Request>", kSource);
        FAIL("expected CapabilitiesError");
    } catch (const CapabilitiesError& e) {
        CHECK(e.kind() == CapabilitiesError::Kind::xml_syntax);
        CHECK(e.line() >= 3);
    }
}

TEST_CASE("record ids are the md5 of url and title") {
    CHECK(layer_record_id("http://example.org/wms", "NOAA Weather Radar Mosaic") ==
          "c2770ef65514ee873f2d01440e6a2a84");
    CHECK(layer_record_id("", "") == "b99834bc19bbad24580b3adfa04fb947");
    CHECK(layer_record_id("https://a.b/c", "Straße") == "1641e02b4c6e39f9a60a8464defe6217");
}

TEST_CASE("radar layer to record") {
    auto s = radar();
    auto r = layer_to_record(s, s.layers.at(0), "NOAA");
    CHECK(r.resource_type == ResourceType::service);
    CHECK(r.title == testing::kRadarTitle);
    REQUIRE(r.bbox);
    check_box(*r.bbox, -179.999996, 179.999996, -89.0, 89.0);
    CHECK(r.crs_list.size() == 4);
    CHECK(r.access_endpoints == std::vector<AccessEndpoint>{{"WMS", kSource}});
    CHECK(r.abstract == "Layer 'NOAA Weather Radar Mosaic' served by http://example.org/wms");
    CHECK(r.publisher == "NOAA");
    CHECK(r.id == layer_record_id(kSource, testing::kRadarTitle));
    CHECK(layer_to_record(s, s.layers.at(0), "NOAA").id == r.id);
    CHECK(validate_record(r, MetadataProfile::sdi_basic()).valid);
}

TEST_CASE("distinct titles give distinct ids") {
    std::set<std::string> ids;
    for (int i = 0; i < 5000; ++i) ids.insert(layer_record_id(kSource, "layer " + std::to_string(i)));
    CHECK(ids.size() == 5000);
}
