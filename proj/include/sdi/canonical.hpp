#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sdi/metadata.hpp"

namespace sdi {

/// Result of reading a canonical document. Unknown keys are dropped and
/// reported as warnings.
struct ParsedRecord {
    MetadataRecord record;
    std::vector<std::string> warnings;
};

/// Canonical record document: one line of UTF-8 JSON with the record fields
/// in declaration order. Absent optionals are written as null.
std::string to_canonical(const MetadataRecord& record);
nlohmann::ordered_json to_canonical_json(const MetadataRecord& record);

/// Throws ParseError (with line/column) on malformed JSON and SchemaError
/// naming the offending field ("bbox.north", "keywords[2]", ...) on
/// type or range errors. Missing keys leave the field absent/empty.
ParsedRecord from_canonical(std::string_view document);
ParsedRecord from_canonical_json(const nlohmann::json& document);

nlohmann::ordered_json to_json(const ValidationReport& report);
nlohmann::ordered_json to_json(const GeoBox& box);

}  // namespace sdi
