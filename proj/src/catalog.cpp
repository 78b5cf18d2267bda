#include <algorithm>
#include <iterator>
#include <mutex>

#include "catalog_internal.hpp"
#include "sdi/text.hpp"

namespace sdi {

namespace {

using detail::Box;
using detail::CatalogState;
using detail::FieldCounts;
using detail::Point;
using detail::SpatialValue;
namespace bgi = detail::bgi;

constexpr std::size_t kCompactEvery = 1024;

Box to_box(const GeoBox& b) { return Box{Point{b.west, b.south}, Point{b.east, b.north}}; }

GeoBox to_geo_box(const Box& b) {
    return GeoBox{b.min_corner().get<0>(), b.max_corner().get<0>(), b.min_corner().get<1>(),
                  b.max_corner().get<1>()};
}

std::size_t field_index(TextField f) { return static_cast<std::size_t>(f); }

// Token counts of every text field of a record, keyed by term.
std::map<std::string, FieldCounts> count_terms(const MetadataRecord& r) {
    std::map<std::string, FieldCounts> counts;
    auto add = [&](TextField field, std::string_view text) {
        for (auto& token : tokenize(text)) counts[std::move(token)][field_index(field)] += 1;
    };
    add(TextField::title, r.title);
    add(TextField::abstract, r.abstract);
    for (const auto& k : r.keywords) add(TextField::keywords, k);
    add(TextField::topic_category, r.topic_category);
    add(TextField::lineage, r.lineage);
    add(TextField::publisher, r.publisher);
    add(TextField::contact, r.contact);
    return counts;
}

void index_record(CatalogState& s, const MetadataRecord& r) {
    if (r.bbox) s.spatial.insert(SpatialValue{to_box(*r.bbox), r.id});
    for (auto& [term, counts] : count_terms(r)) s.text[term][r.id] = counts;
}

void unindex_record(CatalogState& s, const MetadataRecord& r) {
    if (r.bbox) s.spatial.remove(SpatialValue{to_box(*r.bbox), r.id});
    for (const auto& [term, counts] : count_terms(r)) {
        (void)counts;
        auto it = s.text.find(term);
        if (it == s.text.end()) continue;
        it->second.erase(r.id);
        if (it->second.empty()) s.text.erase(it);
    }
}

void rebuild_indexes(CatalogState& s) {
    std::vector<SpatialValue> boxes;
    std::unordered_map<std::string, detail::TermPostings> text;
    for (const auto& [id, r] : s.records) {
        if (r.bbox) boxes.emplace_back(to_box(*r.bbox), id);
        for (auto& [term, counts] : count_terms(r)) text[term][id] = counts;
    }
    detail::SpatialIndex packed(boxes.begin(), boxes.end());
    s.spatial = std::move(packed);
    s.text = std::move(text);
}

std::vector<std::string> run_spatial_query(const CatalogState& s, const GeoBox& box,
                                           SpatialRelation relation) {
    auto violations = box_violations(box, "box");
    if (!violations.empty())
        throw InvalidQuery("invalid query box: " + violations.front().field + ": " +
                           violations.front().message);
    std::vector<SpatialValue> hits;
    Box query = to_box(box);
    if (relation == SpatialRelation::intersects) {
        s.spatial.query(bgi::intersects(query), std::back_inserter(hits));
    } else {
        s.spatial.query(bgi::covered_by(query), std::back_inserter(hits));
    }
    std::vector<std::string> ids;
    ids.reserve(hits.size());
    for (auto& [b, id] : hits) ids.push_back(std::move(id));
    std::sort(ids.begin(), ids.end());
    return ids;
}

std::vector<Posting> postings_for(const CatalogState& s, std::string_view term) {
    std::vector<Posting> out;
    auto it = s.text.find(std::string(term));
    if (it == s.text.end()) return out;
    for (const auto& [id, counts] : it->second)
        for (auto field : kTextFields)
            if (counts[field_index(field)] > 0)
                out.push_back({id, field, counts[field_index(field)]});
    return out;
}

}  // namespace

std::string_view to_string(SpatialRelation relation) {
    return relation == SpatialRelation::intersects ? "intersects" : "within";
}

std::optional<SpatialRelation> parse_spatial_relation(std::string_view text) {
    if (text == "intersects") return SpatialRelation::intersects;
    if (text == "within") return SpatialRelation::within;
    return std::nullopt;
}

std::string_view to_string(TextField field) {
    switch (field) {
        case TextField::title: return "title";
        case TextField::abstract: return "abstract";
        case TextField::keywords: return "keywords";
        case TextField::topic_category: return "topic_category";
        case TextField::lineage: return "lineage";
        case TextField::publisher: return "publisher";
        case TextField::contact: return "contact";
    }
    return "";
}

InvalidRecordError::InvalidRecordError(std::vector<Violation> violations)
    : Error("record rejected: " +
            (violations.empty() ? std::string("invalid")
                                : violations.front().field + ": " + violations.front().message)),
      violations_(std::move(violations)) {}

// --- CatalogView ------------------------------------------------------------

CatalogView::CatalogView(std::shared_lock<std::shared_mutex> lock, const CatalogState& state)
    : lock_(std::move(lock)), state_(&state) {}

std::uint64_t CatalogView::version() const { return state_->version; }
std::size_t CatalogView::size() const { return state_->records.size(); }

const MetadataRecord* CatalogView::find(std::string_view id) const {
    auto it = state_->records.find(id);
    return it == state_->records.end() ? nullptr : &it->second;
}

const std::map<std::string, MetadataRecord, std::less<>>& CatalogView::records() const {
    return state_->records;
}

std::vector<std::string> CatalogView::spatial_query(const GeoBox& box,
                                                    SpatialRelation relation) const {
    return run_spatial_query(*state_, box, relation);
}

std::vector<Posting> CatalogView::text_postings(std::string_view term) const {
    return postings_for(*state_, term);
}

std::size_t CatalogView::document_frequency(std::string_view term) const {
    auto it = state_->text.find(std::string(term));
    return it == state_->text.end() ? 0 : it->second.size();
}

std::vector<std::pair<std::string, GeoBox>> CatalogView::spatial_entries() const {
    std::vector<std::pair<std::string, GeoBox>> out;
    for (const auto& [box, id] : state_->spatial) out.emplace_back(id, to_geo_box(box));
    std::sort(out.begin(), out.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    return out;
}

std::vector<std::string> CatalogView::indexed_terms() const {
    std::vector<std::string> out;
    out.reserve(state_->text.size());
    for (const auto& [term, postings] : state_->text) out.push_back(term);
    std::sort(out.begin(), out.end());
    return out;
}

// --- Catalog ----------------------------------------------------------------

Catalog::Catalog() : state_(std::make_unique<CatalogState>()) {}

Catalog::Catalog(const std::filesystem::path& directory)
    : directory_(directory), state_(std::make_unique<CatalogState>()) {
    storage_ = std::make_unique<Storage>(directory);
    auto loaded = storage_->load();
    state_->records = std::move(loaded.records);
    state_->version = loaded.version;
    load_warnings_ = std::move(loaded.warnings);
    rebuild_indexes(*state_);
}

Catalog::~Catalog() = default;

UpsertResult Catalog::upsert(MetadataRecord record) {
    auto violations = record_violations(record);
    if (record.id.empty()) violations.insert(violations.begin(), {"id", "must be non-empty"});
    if (!violations.empty()) throw InvalidRecordError(std::move(violations));

    std::unique_lock lock(mutex_);
    auto& s = *state_;
    auto existing = s.records.find(record.id);
    bool created = existing == s.records.end();
    if (!record.created)
        record.created = (!created && existing->second.created) ? existing->second.created
                                                                : std::optional(now_utc());
    record.modified = now_utc();

    std::size_t count = s.records.size() + (created ? 1 : 0);
    if (storage_) storage_->append_upsert(record, s.version + 1, count);

    if (!created) {
        unindex_record(s, existing->second);
        existing->second = std::move(record);
        index_record(s, existing->second);
    } else {
        existing = s.records.emplace(record.id, std::move(record)).first;
        index_record(s, existing->second);
    }
    ++s.version;
    if (storage_ && storage_->log_entries() >= kCompactEvery)
        storage_->write_snapshot(s.records, s.version);
    return {existing->first, created};
}

std::optional<MetadataRecord> Catalog::get(std::string_view id) const {
    std::shared_lock lock(mutex_);
    auto it = state_->records.find(id);
    if (it == state_->records.end()) return std::nullopt;
    return it->second;
}

bool Catalog::remove(std::string_view id) {
    std::unique_lock lock(mutex_);
    auto& s = *state_;
    auto it = s.records.find(id);
    if (it == s.records.end()) return false;
    if (storage_) storage_->append_remove(id, s.version + 1, s.records.size() - 1);
    unindex_record(s, it->second);
    s.records.erase(it);
    ++s.version;
    if (storage_ && storage_->log_entries() >= kCompactEvery)
        storage_->write_snapshot(s.records, s.version);
    return true;
}

std::vector<std::string> Catalog::spatial_query(const GeoBox& box,
                                                SpatialRelation relation) const {
    return read().spatial_query(box, relation);
}

std::vector<Posting> Catalog::text_postings(std::string_view term) const {
    return read().text_postings(term);
}

std::uint64_t Catalog::version() const {
    std::shared_lock lock(mutex_);
    return state_->version;
}

std::size_t Catalog::size() const {
    std::shared_lock lock(mutex_);
    return state_->records.size();
}

CatalogView Catalog::read() const { return CatalogView(std::shared_lock(mutex_), *state_); }

void Catalog::reindex() {
    std::unique_lock lock(mutex_);
    rebuild_indexes(*state_);
}

void Catalog::compact() {
    std::unique_lock lock(mutex_);
    if (storage_) storage_->write_snapshot(state_->records, state_->version);
}

}  // namespace sdi
