#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "sdi/error.hpp"
#include "sdi/metadata.hpp"

namespace sdi {

/// Operations advertised under <Request>. Namespace prefixes are stripped
/// before matching; anything unrecognised is kept as an "other" label.
enum class Operation { GetCapabilities, GetMap, GetFeatureInfo, GetStyles };

std::string_view to_string(Operation op);

/// <BoundingBox CRS=".." minx miny maxx maxy/>, stored exactly as written.
/// For EPSG:4326 the x values are latitudes.
struct CrsBoundingBox {
    std::string crs;
    double minx = 0.0;
    double miny = 0.0;
    double maxx = 0.0;
    double maxy = 0.0;

    bool operator==(const CrsBoundingBox&) const = default;
};

struct LayerDescription {
    std::string title;
    std::vector<std::string> crs_list;
    std::optional<GeoBox> geographic_bbox;
    std::vector<CrsBoundingBox> crs_bboxes;

    bool operator==(const LayerDescription&) const = default;
};

struct ServiceDescription {
    std::string source_url;
    std::set<Operation> operations;
    std::vector<std::string> other_operations;
    std::vector<LayerDescription> layers;
    std::vector<std::string> warnings;
};

class CapabilitiesError : public Error {
public:
    enum class Kind { xml_syntax, structure, numeric };

    CapabilitiesError(Kind kind, const std::string& message, std::size_t line = 0)
        : Error(message), kind_(kind), line_(line) {}

    Kind kind() const noexcept { return kind_; }
    /// 1-based line of an XML syntax error, 0 otherwise.
    std::size_t line() const noexcept { return line_; }

private:
    Kind kind_;
    std::size_t line_;
};

class NoExtentError : public Error {
public:
    using Error::Error;
};

/// Parses a WMS-style capabilities document. The <Capability> element may be
/// the root or nested anywhere below it. Top-level layers and their direct
/// child layers are returned; children inherit CRS and extent from their
/// parent when they declare none. Deeper nesting, styles and exception
/// formats are skipped with a warning.
ServiceDescription parse_capabilities(std::string_view xml, std::string source_url);

/// geographic_bbox, else the CRS:84 box, else the EPSG:4326 box with its
/// axes swapped. Throws NoExtentError when none exists.
GeoBox geographic_extent(const LayerDescription& layer);

/// Lowercase hex of the 128-bit digest of "source_url|layer_title".
std::string layer_record_id(std::string_view source_url, std::string_view layer_title);

/// Service record for one layer, ready to publish.
MetadataRecord layer_to_record(const ServiceDescription& service, const LayerDescription& layer,
                               std::string publisher);

}  // namespace sdi
