#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sdi/time.hpp"

namespace sdi {

/// Axis-aligned lon/lat rectangle in decimal degrees. Closed on all sides;
/// degenerate point and line boxes are legal. Boxes never cross the
/// antimeridian: west <= east always holds for a valid box.
struct GeoBox {
    double west = 0.0;
    double east = 0.0;
    double south = 0.0;
    double north = 0.0;

    bool operator==(const GeoBox&) const = default;
};

/// Field-qualified messages ("bbox.north", ...) for every broken invariant.
/// Empty when the box is valid.
struct Violation {
    std::string field;
    std::string message;

    bool operator==(const Violation&) const = default;
};
std::vector<Violation> box_violations(const GeoBox& box, std::string_view prefix = "bbox");
inline bool is_valid(const GeoBox& box) { return box_violations(box).empty(); }

/// Closed-set predicates: touching edges intersect, a box covers itself.
inline bool intersects(const GeoBox& a, const GeoBox& b) {
    return a.west <= b.east && b.west <= a.east && a.south <= b.north && b.south <= a.north;
}
inline bool covered_by(const GeoBox& inner, const GeoBox& outer) {
    return outer.west <= inner.west && inner.east <= outer.east && outer.south <= inner.south &&
           inner.north <= outer.north;
}

enum class ResourceType { dataset, service, map, tool };

std::string_view to_string(ResourceType type);
std::optional<ResourceType> parse_resource_type(std::string_view text);

struct TemporalExtent {
    Timestamp start;
    Timestamp end;

    bool operator==(const TemporalExtent&) const = default;
};

struct AccessEndpoint {
    std::string protocol;
    std::string url;

    bool operator==(const AccessEndpoint&) const = default;
};

/// One catalogued resource. Optional members are "absent" rather than
/// defaulted so that profile completeness can tell the difference.
struct MetadataRecord {
    std::string id;
    std::optional<ResourceType> resource_type;
    std::string title;
    std::string abstract;
    std::vector<std::string> keywords;
    std::string topic_category;
    std::optional<GeoBox> bbox;
    std::optional<TemporalExtent> temporal_extent;
    std::vector<std::string> crs_list;
    std::string lineage;
    std::string publisher;
    std::string contact;
    std::vector<AccessEndpoint> access_endpoints;
    std::optional<Timestamp> created;
    std::optional<Timestamp> modified;

    bool operator==(const MetadataRecord&) const = default;
};

enum class RecordField {
    id,
    resource_type,
    title,
    abstract,
    keywords,
    topic_category,
    bbox,
    temporal_extent,
    crs_list,
    lineage,
    publisher,
    contact,
    access_endpoints,
    created,
    modified,
};

inline constexpr RecordField kAllRecordFields[] = {
    RecordField::id,        RecordField::resource_type,   RecordField::title,
    RecordField::abstract,  RecordField::keywords,        RecordField::topic_category,
    RecordField::bbox,      RecordField::temporal_extent, RecordField::crs_list,
    RecordField::lineage,   RecordField::publisher,       RecordField::contact,
    RecordField::access_endpoints, RecordField::created,  RecordField::modified,
};

std::string_view field_name(RecordField field);
std::optional<RecordField> parse_field_name(std::string_view name);

/// Non-empty string, non-empty list, or present optional.
bool is_populated(const MetadataRecord& record, RecordField field);

/// Syntactic check for an absolute URL: scheme "://" authority [path].
bool is_absolute_url(std::string_view url);

/// Named set of mandatory and recommended fields. The constructor enforces
/// that the two sets are disjoint and free of duplicates.
class MetadataProfile {
public:
    MetadataProfile(std::string name, std::vector<RecordField> mandatory,
                    std::vector<RecordField> recommended);

    /// The default reduced profile shipped with the catalog.
    static const MetadataProfile& sdi_basic();

    /// {"name": ..., "mandatory": [...], "recommended": [...]}.
    /// Throws SchemaError on unknown field names or overlap.
    static MetadataProfile from_json_text(std::string_view text);

    const std::string& name() const noexcept { return name_; }
    std::span<const RecordField> mandatory() const noexcept { return mandatory_; }
    std::span<const RecordField> recommended() const noexcept { return recommended_; }

private:
    std::string name_;
    std::vector<RecordField> mandatory_;
    std::vector<RecordField> recommended_;
};

/// Weight of a recommended field relative to a mandatory one.
inline constexpr double kRecommendedWeight = 0.5;

struct ValidationReport {
    bool valid = false;
    std::vector<std::string> missing_mandatory;
    std::vector<std::string> missing_recommended;
    std::vector<Violation> violations;
    double completeness = 0.0;

    bool operator==(const ValidationReport&) const = default;
};

/// Every invariant of the record itself, independent of any profile.
std::vector<Violation> record_violations(const MetadataRecord& record);

ValidationReport validate_record(const MetadataRecord& record, const MetadataProfile& profile);

/// (mandatory populated + 0.5 * recommended populated) /
/// (mandatory total + 0.5 * recommended total); 1.0 for an empty profile.
double completeness_score(const MetadataRecord& record, const MetadataProfile& profile);

}  // namespace sdi
