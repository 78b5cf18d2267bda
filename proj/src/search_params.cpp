#include "sdi/search_api.hpp"

#include <charconv>
#include <cmath>

#include "sdi/canonical.hpp"

namespace sdi {

namespace {

std::size_t parse_count(const std::string& name, const std::string& raw) {
    std::size_t value = 0;
    auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), value);
    if (raw.empty() || ec != std::errc() || ptr != raw.data() + raw.size())
        throw InvalidQuery(name + " must be a non-negative integer, got '" + raw + "'");
    return value;
}

double parse_coordinate(const std::string& raw) {
    double value = 0.0;
    const char* begin = raw.data();
    const char* end = raw.data() + raw.size();
    if (begin != end && *begin == '+') ++begin;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (raw.empty() || ec != std::errc() || ptr != end || !std::isfinite(value))
        throw InvalidQuery("bbox coordinate '" + raw + "' is not a decimal number");
    return value;
}

GeoBox parse_bbox(const std::string& raw) {
    std::vector<double> parts;
    std::size_t pos = 0;
    while (true) {
        auto comma = raw.find(',', pos);
        parts.push_back(parse_coordinate(raw.substr(pos, comma == std::string::npos
                                                             ? std::string::npos
                                                             : comma - pos)));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (parts.size() != 4)
        throw InvalidQuery("bbox must be 'west,south,east,north', got '" + raw + "'");
    GeoBox box{parts[0], parts[2], parts[1], parts[3]};
    auto v = box_violations(box, "bbox");
    if (!v.empty()) throw InvalidQuery(v.front().field + ": " + v.front().message);
    return box;
}

Timestamp parse_time(const std::string& name, const std::string& raw) {
    auto t = parse_iso8601(raw);
    if (!t) throw InvalidQuery(name + " must be YYYY-MM-DDTHH:MM:SSZ, got '" + raw + "'");
    return *t;
}

}  // namespace

SearchQuery parse_search_params(const QueryParams& params) {
    SearchQuery q;
    std::optional<GeoBox> box;
    std::optional<SpatialRelation> relation;
    TemporalFilter temporal;
    for (const auto& [key, value] : params) {
        if (key == "q") {
            q.text = value;
        } else if (key == "mode") {
            if (value.empty()) continue;
            auto mode = parse_search_mode(value);
            if (!mode) throw InvalidQuery("mode must be keyword or semantic");
            q.mode = *mode;
        } else if (key == "bbox") {
            if (!value.empty()) box = parse_bbox(value);
        } else if (key == "relation") {
            if (value.empty()) continue;
            relation = parse_spatial_relation(value);
            if (!relation) throw InvalidQuery("relation must be intersects or within");
        } else if (key == "time_start") {
            if (!value.empty()) temporal.start = parse_time(key, value);
        } else if (key == "time_end") {
            if (!value.empty()) temporal.end = parse_time(key, value);
        } else if (key == "page") {
            q.page = parse_count(key, value);
        } else if (key == "page_size") {
            q.page_size = parse_count(key, value);
        } else if (key.rfind("facet.", 0) == 0) {
            auto field = parse_facet_field(key.substr(6));
            if (!field) throw InvalidQuery("'" + key.substr(6) + "' is not a facetable field");
            q.facet_filters.push_back({*field, value});
        } else {
            throw InvalidQuery("unknown search parameter '" + key + "'");
        }
    }
    if (relation && !box) throw InvalidQuery("relation given without bbox");
    if (box) q.spatial = SpatialFilter{*box, relation.value_or(SpatialRelation::intersects)};
    if (temporal.start || temporal.end) q.temporal = temporal;
    validate(q);
    return q;
}

nlohmann::ordered_json search_envelope(const CatalogView& catalog, const SearchQuery& query,
                                       const Thesaurus& thesaurus, const RankingConfig& config) {
    using ordered_json = nlohmann::ordered_json;
    auto response = search(catalog, query, thesaurus, config);

    ordered_json envelope;
    envelope["total"] = response.total;
    envelope["page"] = query.page;
    envelope["page_size"] = query.page_size;
    envelope["results"] = ordered_json::array();
    for (const auto& hit : response.page) {
        const auto* record = catalog.find(hit.id);
        ordered_json item;
        item["id"] = hit.id;
        item["title"] = record ? record->title : "";
        item["score"] = hit.score;
        item["snippet"] = hit.snippet;
        item["bbox"] = record && record->bbox ? to_json(*record->bbox) : ordered_json(nullptr);
        envelope["results"].push_back(std::move(item));
    }
    ordered_json facets = ordered_json::object();
    for (auto field : {FacetField::resource_type, FacetField::publisher}) {
        ordered_json counts = ordered_json::array();
        for (const auto& fc : facet_counts(catalog, query, field, thesaurus, config))
            counts.push_back({{"value", fc.value}, {"count", fc.count}});
        facets[std::string(to_string(field))] = std::move(counts);
    }
    envelope["facets"] = std::move(facets);
    return envelope;
}

std::string render_envelope(const nlohmann::ordered_json& envelope) {
    return envelope.dump(-1, ' ', false, nlohmann::ordered_json::error_handler_t::replace);
}

}  // namespace sdi
