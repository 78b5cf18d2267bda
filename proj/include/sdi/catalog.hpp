#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "sdi/error.hpp"
#include "sdi/metadata.hpp"

namespace sdi {

enum class SpatialRelation { intersects, within };

std::string_view to_string(SpatialRelation relation);
std::optional<SpatialRelation> parse_spatial_relation(std::string_view text);

/// Text-bearing record fields that feed the inverted index.
enum class TextField { title, abstract, keywords, topic_category, lineage, publisher, contact };

inline constexpr std::array kTextFields{TextField::title,          TextField::abstract,
                                        TextField::keywords,       TextField::topic_category,
                                        TextField::lineage,        TextField::publisher,
                                        TextField::contact};

std::string_view to_string(TextField field);

/// Term occurrence count of one term in one field of one record.
struct Posting {
    std::string id;
    TextField field;
    std::uint32_t term_frequency;

    bool operator==(const Posting&) const = default;
};

/// Raised by upsert when the record breaks an id or invariant rule.
class InvalidRecordError : public Error {
public:
    explicit InvalidRecordError(std::vector<Violation> violations);
    const std::vector<Violation>& violations() const noexcept { return violations_; }

private:
    std::vector<Violation> violations_;
};

struct UpsertResult {
    std::string id;
    bool created = false;  // false: an existing record was replaced
};

namespace detail {
struct CatalogState;
}

/// Read access to one consistent catalog state. Holding a view blocks
/// writers, so keep it short-lived.
class CatalogView {
public:
    std::uint64_t version() const;
    std::size_t size() const;

    const MetadataRecord* find(std::string_view id) const;
    /// All records ordered by id.
    const std::map<std::string, MetadataRecord, std::less<>>& records() const;

    /// Ids (sorted) whose bbox intersects / lies within `box`. Closed-set
    /// semantics; records without a bbox never match. Throws InvalidQuery
    /// for an invalid box.
    std::vector<std::string> spatial_query(const GeoBox& box, SpatialRelation relation) const;

    /// Postings for a normalized term, ordered by (id, field).
    std::vector<Posting> text_postings(std::string_view term) const;
    /// Number of records containing the term in any field.
    std::size_t document_frequency(std::string_view term) const;

    /// Index contents, for audits.
    std::vector<std::pair<std::string, GeoBox>> spatial_entries() const;
    std::vector<std::string> indexed_terms() const;

private:
    friend class Catalog;
    CatalogView(std::shared_lock<std::shared_mutex> lock, const detail::CatalogState& state);

    std::shared_lock<std::shared_mutex> lock_;
    const detail::CatalogState* state_;
};

/// Metadata store with an R-tree over record boxes and an inverted text
/// index. Many readers or one writer at a time. When constructed with a
/// directory the catalog is durable: every mutation is appended to
/// <dir>/records.log, compacted periodically into <dir>/snapshot.json, and
/// <dir>/MANIFEST tracks format version, record count and catalog version.
class Catalog {
public:
    /// Volatile in-memory catalog.
    Catalog();
    /// Opens (creating if needed) a durable catalog and rebuilds its indexes.
    explicit Catalog(const std::filesystem::path& directory);
    ~Catalog();

    Catalog(const Catalog&) = delete;
    Catalog& operator=(const Catalog&) = delete;

    /// Inserts or replaces by id; sets `modified` to now and `created` to
    /// now when absent (keeping the replaced record's value if it had one).
    UpsertResult upsert(MetadataRecord record);
    std::optional<MetadataRecord> get(std::string_view id) const;
    bool remove(std::string_view id);

    std::vector<std::string> spatial_query(const GeoBox& box, SpatialRelation relation) const;
    std::vector<Posting> text_postings(std::string_view term) const;

    std::uint64_t version() const;
    std::size_t size() const;

    CatalogView read() const;

    /// Rebuilds both indexes from the record map (bulk-loaded R-tree) and
    /// swaps them in under the writer lock.
    void reindex();
    /// Writes a snapshot and truncates the log. No-op for in-memory catalogs.
    void compact();

    const std::optional<std::filesystem::path>& directory() const noexcept { return directory_; }
    /// Problems found while loading from disk (e.g. a torn final log line).
    const std::vector<std::string>& load_warnings() const noexcept { return load_warnings_; }

private:
    class Storage;

    std::optional<std::filesystem::path> directory_;
    std::vector<std::string> load_warnings_;
    mutable std::shared_mutex mutex_;
    std::unique_ptr<detail::CatalogState> state_;
    std::unique_ptr<Storage> storage_;
};

}  // namespace sdi
