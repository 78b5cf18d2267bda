#include "sdi/search.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "sdi/text.hpp"

namespace sdi {

namespace {

struct Candidate {
    double score = 0.0;
    std::set<std::string> matched;
};

using Candidates = std::map<std::string, Candidate, std::less<>>;

bool is_blank(std::string_view s) {
    return s.find_first_not_of(" \t\r\n\f\v") == std::string_view::npos;
}

bool overlaps(const TemporalExtent& extent, const TemporalFilter& filter) {
    if (filter.start && extent.end < *filter.start) return false;
    if (filter.end && extent.start > *filter.end) return false;
    return true;
}

bool has_temporal_bounds(const SearchQuery& q) {
    return q.temporal && (q.temporal->start || q.temporal->end);
}

// Text stage: every record for a blank query, otherwise records matching at
// least one weighted term, scored by boosted tf-idf.
Candidates text_stage(const CatalogView& catalog, const SearchQuery& query,
                      const Thesaurus& thesaurus, const RankingConfig& config) {
    Candidates out;
    if (is_blank(query.text)) {
        for (const auto& [id, record] : catalog.records()) out.emplace(id, Candidate{});
        return out;
    }
    const double n = static_cast<double>(catalog.size());
    for (const auto& [term, weight] : query_terms(query, thesaurus, config)) {
        auto postings = catalog.text_postings(term);
        if (postings.empty()) continue;
        double df = static_cast<double>(catalog.document_frequency(term));
        double idf = std::log(1.0 + n / (1.0 + df));
        for (const auto& p : postings) {
            auto& c = out[p.id];
            c.score += weight * p.term_frequency * idf * config.boost(p.field);
            c.matched.insert(term);
        }
    }
    return out;
}

Candidates filtered(const CatalogView& catalog, const SearchQuery& query,
                    const Thesaurus& thesaurus, const RankingConfig& config) {
    validate(query);
    Candidates candidates = text_stage(catalog, query, thesaurus, config);

    if (query.spatial) {
        auto hits = catalog.spatial_query(query.spatial->box, query.spatial->relation);
        for (auto it = candidates.begin(); it != candidates.end();) {
            it = std::binary_search(hits.begin(), hits.end(), it->first) ? std::next(it)
                                                                           : candidates.erase(it);
        }
    }

    if (has_temporal_bounds(query)) {
        for (auto it = candidates.begin(); it != candidates.end();) {
            const auto* r = catalog.find(it->first);
            bool keep = r && r->temporal_extent && overlaps(*r->temporal_extent, *query.temporal);
            it = keep ? std::next(it) : candidates.erase(it);
        }
    }

    if (!query.facet_filters.empty()) {
        std::map<FacetField, std::set<std::string>> wanted;
        for (const auto& f : query.facet_filters) wanted[f.field].insert(f.value);
        for (auto it = candidates.begin(); it != candidates.end();) {
            const auto* r = catalog.find(it->first);
            bool keep = r != nullptr;
            for (const auto& [field, values] : wanted)
                keep = keep && values.count(facet_value(*r, field)) > 0;
            it = keep ? std::next(it) : candidates.erase(it);
        }
    }
    return candidates;
}

}  // namespace

std::string_view to_string(SearchMode mode) {
    return mode == SearchMode::keyword ? "keyword" : "semantic";
}

std::optional<SearchMode> parse_search_mode(std::string_view text) {
    if (text == "keyword") return SearchMode::keyword;
    if (text == "semantic") return SearchMode::semantic;
    return std::nullopt;
}

std::string_view to_string(FacetField field) {
    switch (field) {
        case FacetField::resource_type: return "resource_type";
        case FacetField::publisher: return "publisher";
        case FacetField::topic_category: return "topic_category";
    }
    return "";
}

std::optional<FacetField> parse_facet_field(std::string_view text) {
    for (auto f : {FacetField::resource_type, FacetField::publisher, FacetField::topic_category})
        if (to_string(f) == text) return f;
    return std::nullopt;
}

double RankingConfig::boost(TextField field) const {
    switch (field) {
        case TextField::title: return title_boost;
        case TextField::keywords: return keywords_boost;
        case TextField::abstract: return abstract_boost;
        default: return other_boost;
    }
}

void validate(const SearchQuery& q) {
    if (is_blank(q.text) && !q.spatial && !has_temporal_bounds(q) && q.facet_filters.empty())
        throw InvalidQuery("query needs text, a spatial filter, a temporal filter or a facet");
    if (q.page_size == 0 || q.page_size > kMaxPageSize)
        throw InvalidQuery("page_size must be between 1 and " + std::to_string(kMaxPageSize));
    if (q.spatial) {
        auto v = box_violations(q.spatial->box, "bbox");
        if (!v.empty()) throw InvalidQuery(v.front().field + ": " + v.front().message);
    }
    if (q.temporal && q.temporal->start && q.temporal->end && *q.temporal->start > *q.temporal->end)
        throw InvalidQuery("time_start must not be after time_end");
}

WeightedTerms query_terms(const SearchQuery& query, const Thesaurus& thesaurus,
                          const RankingConfig& config) {
    auto tokens = tokenize(query.text);
    if (query.mode == SearchMode::keyword) {
        WeightedTerms terms;
        for (auto& t : tokens) terms.emplace(std::move(t), 1.0);
        return terms;
    }
    return expand_query(tokens, thesaurus, config.expansion_depth, config.expansion_decay);
}

std::vector<SearchResult> rank_all(const CatalogView& catalog, const SearchQuery& query,
                                   const Thesaurus& thesaurus, const RankingConfig& config) {
    Candidates candidates = filtered(catalog, query, thesaurus, config);
    std::vector<SearchResult> results;
    results.reserve(candidates.size());
    for (auto& [id, c] : candidates) {
        const auto* r = catalog.find(id);
        results.push_back({id, c.score, std::move(c.matched), r ? make_snippet(*r) : ""});
    }
    std::stable_sort(results.begin(), results.end(), [](const auto& a, const auto& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.id < b.id;
    });
    return results;
}

SearchResponse search(const CatalogView& catalog, const SearchQuery& query,
                      const Thesaurus& thesaurus, const RankingConfig& config) {
    auto all = rank_all(catalog, query, thesaurus, config);
    SearchResponse response;
    response.total = all.size();
    std::size_t first =
        query.page >= all.size() ? all.size() : std::min(all.size(), query.page * query.page_size);
    std::size_t last = std::min(all.size(), first + query.page_size);
    response.page.assign(std::make_move_iterator(all.begin() + first),
                         std::make_move_iterator(all.begin() + last));
    return response;
}

std::string facet_value(const MetadataRecord& record, FacetField field) {
    switch (field) {
        case FacetField::resource_type:
            return record.resource_type ? std::string(to_string(*record.resource_type)) : "";
        case FacetField::publisher: return record.publisher;
        case FacetField::topic_category: return record.topic_category;
    }
    return "";
}

std::vector<FacetCount> facet_counts(const CatalogView& catalog, const SearchQuery& query,
                                     FacetField field, const Thesaurus& thesaurus,
                                     const RankingConfig& config) {
    std::map<std::string, std::size_t> counts;
    for (const auto& [id, c] : filtered(catalog, query, thesaurus, config)) {
        (void)c;
        if (const auto* r = catalog.find(id)) {
            auto value = facet_value(*r, field);
            if (!value.empty()) ++counts[value];
        }
    }
    std::vector<FacetCount> out;
    for (auto& [value, count] : counts) out.push_back({value, count});
    std::stable_sort(out.begin(), out.end(),
                     [](const auto& a, const auto& b) { return a.count > b.count; });
    return out;
}

std::vector<FacetCount> facet_counts(const CatalogView& catalog, const SearchQuery& query,
                                     std::string_view field, const Thesaurus& thesaurus,
                                     const RankingConfig& config) {
    auto f = parse_facet_field(field);
    if (!f) throw InvalidQuery("field '" + std::string(field) + "' is not facetable");
    return facet_counts(catalog, query, *f, thesaurus, config);
}

std::string make_snippet(const MetadataRecord& record) {
    const std::string& source = record.abstract.empty() ? record.title : record.abstract;
    // Count code points by skipping UTF-8 continuation bytes.
    auto cut_at = [&](std::size_t code_points) {
        std::size_t seen = 0;
        for (std::size_t i = 0; i < source.size(); ++i) {
            if ((static_cast<unsigned char>(source[i]) & 0xC0) == 0x80) continue;
            if (seen == code_points) return i;
            ++seen;
        }
        return source.size();
    };
    if (cut_at(kSnippetLength) == source.size()) return source;
    return source.substr(0, cut_at(kSnippetLength - 3)) + "...";
}

}  // namespace sdi
