#include "sdi/canonical.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "sdi/error.hpp"

namespace sdi {

namespace {

using ordered_json = nlohmann::ordered_json;
using json = nlohmann::json;

ordered_json optional_time(const std::optional<Timestamp>& t) {
    return t ? ordered_json(format_iso8601(*t)) : ordered_json(nullptr);
}

// Line and column of a 1-based byte offset reported by the JSON parser.
std::pair<std::size_t, std::size_t> locate(std::string_view text, std::size_t byte) {
    std::size_t line = 1, column = 1;
    std::size_t end = std::min(byte == 0 ? 0 : byte - 1, text.size());
    for (std::size_t i = 0; i < end; ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    return {line, column};
}

class Reader {
public:
    explicit Reader(std::vector<std::string>& warnings) : warnings_(warnings) {}

    void check_keys(const json& obj, std::initializer_list<std::string_view> known,
                    const std::string& path) {
        for (const auto& [key, value] : obj.items()) {
            if (std::find(known.begin(), known.end(), key) == known.end())
                warnings_.push_back("ignoring unknown field " +
                                    (path.empty() ? key : path + "." + key));
        }
    }

    std::string string(const json& obj, const char* key, const std::string& path) {
        auto it = obj.find(key);
        if (it == obj.end() || it->is_null()) return {};
        if (!it->is_string()) throw SchemaError(path, "expected a string");
        return it->get<std::string>();
    }

    std::vector<std::string> strings(const json& obj, const char* key) {
        std::vector<std::string> out;
        auto it = obj.find(key);
        if (it == obj.end() || it->is_null()) return out;
        if (!it->is_array()) throw SchemaError(key, "expected an array of strings");
        for (std::size_t i = 0; i < it->size(); ++i) {
            const auto& item = (*it)[i];
            if (!item.is_string())
                throw SchemaError(std::string(key) + "[" + std::to_string(i) + "]",
                                  "expected a string");
            out.push_back(item.get<std::string>());
        }
        return out;
    }

    double number(const json& obj, const char* key, const std::string& path, double lo,
                  double hi) {
        auto it = obj.find(key);
        if (it == obj.end() || it->is_null()) throw SchemaError(path, "missing coordinate");
        if (!it->is_number()) throw SchemaError(path, "expected a number");
        double v = it->get<double>();
        if (!std::isfinite(v) || v < lo || v > hi)
            throw SchemaError(path, "value " + it->dump() + " outside [" + json(lo).dump() +
                                        ", " + json(hi).dump() + "]");
        return v;
    }

    std::optional<Timestamp> instant(const json& obj, const char* key, const std::string& path) {
        auto it = obj.find(key);
        if (it == obj.end() || it->is_null()) return std::nullopt;
        if (!it->is_string()) throw SchemaError(path, "expected an ISO-8601 string");
        auto t = parse_iso8601(it->get<std::string>());
        if (!t) throw SchemaError(path, "expected YYYY-MM-DDTHH:MM:SSZ, got " + it->dump());
        return t;
    }

private:
    std::vector<std::string>& warnings_;
};

}  // namespace

ordered_json to_json(const GeoBox& box) {
    ordered_json out;
    out["west"] = box.west;
    out["east"] = box.east;
    out["south"] = box.south;
    out["north"] = box.north;
    return out;
}

ordered_json to_canonical_json(const MetadataRecord& r) {
    ordered_json doc;
    doc["id"] = r.id;
    doc["resource_type"] =
        r.resource_type ? ordered_json(std::string(to_string(*r.resource_type))) : nullptr;
    doc["title"] = r.title;
    doc["abstract"] = r.abstract;
    doc["keywords"] = r.keywords;
    doc["topic_category"] = r.topic_category;
    doc["bbox"] = r.bbox ? to_json(*r.bbox) : ordered_json(nullptr);
    if (r.temporal_extent) {
        doc["temporal_extent"] = {{"start", format_iso8601(r.temporal_extent->start)},
                                  {"end", format_iso8601(r.temporal_extent->end)}};
    } else {
        doc["temporal_extent"] = nullptr;
    }
    doc["crs_list"] = r.crs_list;
    doc["lineage"] = r.lineage;
    doc["publisher"] = r.publisher;
    doc["contact"] = r.contact;
    doc["access_endpoints"] = ordered_json::array();
    for (const auto& e : r.access_endpoints)
        doc["access_endpoints"].push_back({{"protocol", e.protocol}, {"url", e.url}});
    doc["created"] = optional_time(r.created);
    doc["modified"] = optional_time(r.modified);
    return doc;
}

std::string to_canonical(const MetadataRecord& record) {
    return to_canonical_json(record).dump(-1, ' ', false, json::error_handler_t::replace);
}

ParsedRecord from_canonical(std::string_view document) {
    json doc;
    try {
        doc = json::parse(document);
    } catch (const json::parse_error& e) {
        auto [line, column] = locate(document, e.byte);
        throw ParseError(std::string("malformed record document: ") + e.what(), line, column);
    }
    return from_canonical_json(doc);
}

ParsedRecord from_canonical_json(const json& doc) {
    if (!doc.is_object()) throw SchemaError("$", "record document must be a JSON object");
    ParsedRecord out;
    Reader rd(out.warnings);
    MetadataRecord& r = out.record;

    rd.check_keys(doc,
                  {"id", "resource_type", "title", "abstract", "keywords", "topic_category",
                   "bbox", "temporal_extent", "crs_list", "lineage", "publisher", "contact",
                   "access_endpoints", "created", "modified"},
                  "");

    r.id = rd.string(doc, "id", "id");
    if (auto t = rd.string(doc, "resource_type", "resource_type"); !t.empty()) {
        r.resource_type = parse_resource_type(t);
        if (!r.resource_type)
            throw SchemaError("resource_type", "expected one of dataset, service, map, tool");
    }
    r.title = rd.string(doc, "title", "title");
    r.abstract = rd.string(doc, "abstract", "abstract");
    r.keywords = rd.strings(doc, "keywords");
    r.topic_category = rd.string(doc, "topic_category", "topic_category");

    if (auto it = doc.find("bbox"); it != doc.end() && !it->is_null()) {
        if (!it->is_object()) throw SchemaError("bbox", "expected an object");
        rd.check_keys(*it, {"west", "east", "south", "north"}, "bbox");
        GeoBox box;
        box.west = rd.number(*it, "west", "bbox.west", -180.0, 180.0);
        box.east = rd.number(*it, "east", "bbox.east", -180.0, 180.0);
        box.south = rd.number(*it, "south", "bbox.south", -90.0, 90.0);
        box.north = rd.number(*it, "north", "bbox.north", -90.0, 90.0);
        r.bbox = box;
    }

    if (auto it = doc.find("temporal_extent"); it != doc.end() && !it->is_null()) {
        if (!it->is_object()) throw SchemaError("temporal_extent", "expected an object");
        rd.check_keys(*it, {"start", "end"}, "temporal_extent");
        auto start = rd.instant(*it, "start", "temporal_extent.start");
        auto end = rd.instant(*it, "end", "temporal_extent.end");
        if (!start) throw SchemaError("temporal_extent.start", "missing");
        if (!end) throw SchemaError("temporal_extent.end", "missing");
        r.temporal_extent = TemporalExtent{*start, *end};
    }

    r.crs_list = rd.strings(doc, "crs_list");
    r.lineage = rd.string(doc, "lineage", "lineage");
    r.publisher = rd.string(doc, "publisher", "publisher");
    r.contact = rd.string(doc, "contact", "contact");

    if (auto it = doc.find("access_endpoints"); it != doc.end() && !it->is_null()) {
        if (!it->is_array()) throw SchemaError("access_endpoints", "expected an array");
        for (std::size_t i = 0; i < it->size(); ++i) {
            const auto& item = (*it)[i];
            std::string path = "access_endpoints[" + std::to_string(i) + "]";
            if (!item.is_object()) throw SchemaError(path, "expected an object");
            rd.check_keys(item, {"protocol", "url"}, path);
            r.access_endpoints.push_back(
                {rd.string(item, "protocol", path + ".protocol"), rd.string(item, "url", path + ".url")});
        }
    }

    r.created = rd.instant(doc, "created", "created");
    r.modified = rd.instant(doc, "modified", "modified");
    return out;
}

ordered_json to_json(const ValidationReport& report) {
    ordered_json out;
    out["valid"] = report.valid;
    out["missing_mandatory"] = report.missing_mandatory;
    out["missing_recommended"] = report.missing_recommended;
    out["violations"] = ordered_json::array();
    for (const auto& v : report.violations)
        out["violations"].push_back({{"field", v.field}, {"message", v.message}});
    out["completeness"] = report.completeness;
    return out;
}

}  // namespace sdi
