#include "sdi/metadata.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <regex>
#include <set>
#include <utility>

#include <json.hpp>

#include "sdi/error.hpp"

namespace sdi {

namespace {

constexpr std::array<std::pair<RecordField, std::string_view>, 15> kFieldNames{{
    {RecordField::id, "id"},
    {RecordField::resource_type, "resource_type"},
    {RecordField::title, "title"},
    {RecordField::abstract, "abstract"},
    {RecordField::keywords, "keywords"},
    {RecordField::topic_category, "topic_category"},
    {RecordField::bbox, "bbox"},
    {RecordField::temporal_extent, "temporal_extent"},
    {RecordField::crs_list, "crs_list"},
    {RecordField::lineage, "lineage"},
    {RecordField::publisher, "publisher"},
    {RecordField::contact, "contact"},
    {RecordField::access_endpoints, "access_endpoints"},
    {RecordField::created, "created"},
    {RecordField::modified, "modified"},
}};

bool in_range(double v, double lo, double hi) { return std::isfinite(v) && v >= lo && v <= hi; }

}  // namespace

std::vector<Violation> box_violations(const GeoBox& box, std::string_view prefix) {
    std::vector<Violation> out;
    auto qualified = [&](std::string_view member) {
        return std::string(prefix) + "." + std::string(member);
    };
    if (!in_range(box.west, -180.0, 180.0))
        out.push_back({qualified("west"), "longitude must be within [-180, 180]"});
    if (!in_range(box.east, -180.0, 180.0))
        out.push_back({qualified("east"), "longitude must be within [-180, 180]"});
    if (!in_range(box.south, -90.0, 90.0))
        out.push_back({qualified("south"), "latitude must be within [-90, 90]"});
    if (!in_range(box.north, -90.0, 90.0))
        out.push_back({qualified("north"), "latitude must be within [-90, 90]"});
    if (box.west > box.east)
        out.push_back({std::string(prefix),
                       "west must not exceed east (antimeridian-crossing boxes are not supported)"});
    if (box.south > box.north)
        out.push_back({std::string(prefix), "south must not exceed north"});
    return out;
}

std::string_view to_string(ResourceType type) {
    switch (type) {
        case ResourceType::dataset: return "dataset";
        case ResourceType::service: return "service";
        case ResourceType::map: return "map";
        case ResourceType::tool: return "tool";
    }
    return "dataset";
}

std::optional<ResourceType> parse_resource_type(std::string_view text) {
    for (auto t : {ResourceType::dataset, ResourceType::service, ResourceType::map,
                   ResourceType::tool})
        if (to_string(t) == text) return t;
    return std::nullopt;
}

std::string_view field_name(RecordField field) {
    for (const auto& [f, name] : kFieldNames)
        if (f == field) return name;
    return "";
}

std::optional<RecordField> parse_field_name(std::string_view name) {
    for (const auto& [f, n] : kFieldNames)
        if (n == name) return f;
    return std::nullopt;
}

bool is_populated(const MetadataRecord& r, RecordField field) {
    switch (field) {
        case RecordField::id: return !r.id.empty();
        case RecordField::resource_type: return r.resource_type.has_value();
        case RecordField::title: return !r.title.empty();
        case RecordField::abstract: return !r.abstract.empty();
        case RecordField::keywords: return !r.keywords.empty();
        case RecordField::topic_category: return !r.topic_category.empty();
        case RecordField::bbox: return r.bbox.has_value();
        case RecordField::temporal_extent: return r.temporal_extent.has_value();
        case RecordField::crs_list: return !r.crs_list.empty();
        case RecordField::lineage: return !r.lineage.empty();
        case RecordField::publisher: return !r.publisher.empty();
        case RecordField::contact: return !r.contact.empty();
        case RecordField::access_endpoints: return !r.access_endpoints.empty();
        case RecordField::created: return r.created.has_value();
        case RecordField::modified: return r.modified.has_value();
    }
    return false;
}

bool is_absolute_url(std::string_view url) {
    static const std::regex pattern(R"(^[A-Za-z][A-Za-z0-9+.\-]*://[^\s/?#]+([/?#][^\s]*)?$)");
    return std::regex_match(url.begin(), url.end(), pattern);
}

MetadataProfile::MetadataProfile(std::string name, std::vector<RecordField> mandatory,
                                 std::vector<RecordField> recommended)
    : name_(std::move(name)), mandatory_(std::move(mandatory)), recommended_(std::move(recommended)) {
    std::set<RecordField> seen;
    for (auto f : mandatory_)
        if (!seen.insert(f).second)
            throw SchemaError("mandatory", "duplicate field " + std::string(field_name(f)));
    for (auto f : recommended_)
        if (!seen.insert(f).second)
            throw SchemaError("recommended", "field " + std::string(field_name(f)) +
                                                 " listed twice or also mandatory");
}

const MetadataProfile& MetadataProfile::sdi_basic() {
    using F = RecordField;
    static const MetadataProfile profile(
        "sdi-basic",
        {F::id, F::title, F::abstract, F::resource_type, F::bbox, F::publisher},
        {F::keywords, F::topic_category, F::temporal_extent, F::crs_list, F::lineage,
         F::access_endpoints, F::contact});
    return profile;
}

MetadataProfile MetadataProfile::from_json_text(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("profile is not valid JSON: ") + e.what(), 0, 0);
    }
    if (!doc.is_object()) throw SchemaError("profile", "expected a JSON object");
    auto fields = [&](const char* key) {
        std::vector<RecordField> out;
        if (!doc.contains(key)) return out;
        if (!doc[key].is_array()) throw SchemaError(key, "expected an array of field names");
        for (const auto& item : doc[key]) {
            if (!item.is_string()) throw SchemaError(key, "expected field name strings");
            auto f = parse_field_name(item.get<std::string>());
            if (!f) throw SchemaError(key, "unknown field " + item.get<std::string>());
            out.push_back(*f);
        }
        return out;
    };
    std::string name = doc.value("name", std::string("custom"));
    return MetadataProfile(std::move(name), fields("mandatory"), fields("recommended"));
}

std::vector<Violation> record_violations(const MetadataRecord& r) {
    std::vector<Violation> out;
    if (r.bbox) {
        auto v = box_violations(*r.bbox);
        out.insert(out.end(), v.begin(), v.end());
    }
    if (r.temporal_extent && r.temporal_extent->start > r.temporal_extent->end)
        out.push_back({"temporal_extent", "start must not be after end"});
    for (std::size_t i = 0; i < r.access_endpoints.size(); ++i) {
        if (!is_absolute_url(r.access_endpoints[i].url))
            out.push_back({"access_endpoints[" + std::to_string(i) + "].url",
                           "not a syntactically valid absolute URL"});
    }
    return out;
}

double completeness_score(const MetadataRecord& record, const MetadataProfile& profile) {
    double populated = 0.0;
    double total = 0.0;
    for (auto f : profile.mandatory()) {
        total += 1.0;
        if (is_populated(record, f)) populated += 1.0;
    }
    for (auto f : profile.recommended()) {
        total += kRecommendedWeight;
        if (is_populated(record, f)) populated += kRecommendedWeight;
    }
    return total == 0.0 ? 1.0 : populated / total;
}

ValidationReport validate_record(const MetadataRecord& record, const MetadataProfile& profile) {
    ValidationReport report;
    for (auto f : profile.mandatory())
        if (!is_populated(record, f)) report.missing_mandatory.emplace_back(field_name(f));
    for (auto f : profile.recommended())
        if (!is_populated(record, f)) report.missing_recommended.emplace_back(field_name(f));
    bool id_mandatory = std::find(profile.mandatory().begin(), profile.mandatory().end(),
                                  RecordField::id) != profile.mandatory().end();
    if (record.id.empty() && !id_mandatory)
        report.violations.push_back({"id", "must be non-empty"});
    auto v = record_violations(record);
    report.violations.insert(report.violations.end(), v.begin(), v.end());
    report.completeness = completeness_score(record, profile);
    report.valid = report.missing_mandatory.empty() && report.violations.empty();
    return report;
}

}  // namespace sdi
