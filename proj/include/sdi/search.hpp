#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "sdi/catalog.hpp"
#include "sdi/metadata.hpp"
#include "sdi/thesaurus.hpp"

namespace sdi {

enum class SearchMode { keyword, semantic };

std::string_view to_string(SearchMode mode);
std::optional<SearchMode> parse_search_mode(std::string_view text);

enum class FacetField { resource_type, publisher, topic_category };

std::string_view to_string(FacetField field);
std::optional<FacetField> parse_facet_field(std::string_view text);

struct SpatialFilter {
    GeoBox box;
    SpatialRelation relation = SpatialRelation::intersects;
};

/// Closed interval; a missing bound is open-ended.
struct TemporalFilter {
    std::optional<Timestamp> start;
    std::optional<Timestamp> end;
};

struct FacetFilter {
    FacetField field;
    std::string value;
};

inline constexpr std::size_t kMaxPageSize = 100;
inline constexpr std::size_t kDefaultPageSize = 10;

struct SearchQuery {
    std::string text;
    SearchMode mode = SearchMode::keyword;
    std::optional<SpatialFilter> spatial;
    std::optional<TemporalFilter> temporal;
    /// Values of one field are OR-ed; different fields are AND-ed.
    std::vector<FacetFilter> facet_filters;
    std::size_t page = 0;
    std::size_t page_size = kDefaultPageSize;
};

/// Throws InvalidQuery unless the query has at least one criterion, a valid
/// box, an ordered time window and 1 <= page_size <= 100.
void validate(const SearchQuery& query);

struct SearchResult {
    std::string id;
    double score = 0.0;
    std::set<std::string> matched_terms;
    std::string snippet;
};

struct SearchResponse {
    std::size_t total = 0;
    std::vector<SearchResult> page;
};

/// Field boosts and expansion parameters of the ranking function:
///   score = sum over matched terms t and fields f of
///           weight(t) * tf(t, f) * ln(1 + N / (1 + df(t))) * boost(f)
struct RankingConfig {
    double title_boost = 3.0;
    double keywords_boost = 2.0;
    double abstract_boost = 1.0;
    double other_boost = 0.5;
    double expansion_decay = kExpansionDecay;
    unsigned expansion_depth = kDefaultExpansionDepth;

    double boost(TextField field) const;
};

inline constexpr std::size_t kSnippetLength = 200;

/// Weighted terms a query contributes: its tokens (keyword mode) or their
/// thesaurus expansion (semantic mode).
WeightedTerms query_terms(const SearchQuery& query, const Thesaurus& thesaurus,
                          const RankingConfig& config = {});

/// The complete filtered result list sorted by (score desc, id asc).
std::vector<SearchResult> rank_all(const CatalogView& catalog, const SearchQuery& query,
                                   const Thesaurus& thesaurus, const RankingConfig& config = {});

/// One page of rank_all plus the page-independent total.
SearchResponse search(const CatalogView& catalog, const SearchQuery& query,
                      const Thesaurus& thesaurus, const RankingConfig& config = {});

struct FacetCount {
    std::string value;
    std::size_t count = 0;

    bool operator==(const FacetCount&) const = default;
};

/// Value counts over the full filtered result set, sorted by count desc
/// then value asc. Records with an empty value are not counted.
std::vector<FacetCount> facet_counts(const CatalogView& catalog, const SearchQuery& query,
                                     FacetField field, const Thesaurus& thesaurus,
                                     const RankingConfig& config = {});
/// Same, by field name; throws InvalidQuery for a non-facetable field.
std::vector<FacetCount> facet_counts(const CatalogView& catalog, const SearchQuery& query,
                                     std::string_view field, const Thesaurus& thesaurus,
                                     const RankingConfig& config = {});

/// Facet value of a record; empty when unpopulated.
std::string facet_value(const MetadataRecord& record, FacetField field);

/// First 200 code points of the abstract (title when no abstract).
std::string make_snippet(const MetadataRecord& record);

}  // namespace sdi
