#pragma once

#include <map>
#include <string>

#include <json.hpp>

#include "sdi/search.hpp"

namespace sdi {

/// Decoded URL query parameters; keys may repeat (facet.FIELD).
using QueryParams = std::multimap<std::string, std::string>;

/// Maps /search parameters onto a SearchQuery:
///   q, mode (keyword|semantic), bbox (west,south,east,north), relation
///   (intersects|within), time_start, time_end (ISO-8601), facet.FIELD,
///   page (>= 0), page_size (1..100).
/// Throws InvalidQuery on malformed or unknown values.
SearchQuery parse_search_params(const QueryParams& params);

/// {total, page, page_size, results:[{id,title,score,snippet,bbox}],
///  facets:{resource_type:[{value,count}], publisher:[...]}}.
nlohmann::ordered_json search_envelope(const CatalogView& catalog, const SearchQuery& query,
                                       const Thesaurus& thesaurus,
                                       const RankingConfig& config = {});

/// Serialized envelope. The HTTP API and the CLI both emit exactly this.
std::string render_envelope(const nlohmann::ordered_json& envelope);

}  // namespace sdi
