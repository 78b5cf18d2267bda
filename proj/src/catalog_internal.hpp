#pragma once

#include <array>
#include <fstream>
#include <string>
#include <unordered_map>
#include <utility>

#include <boost/geometry.hpp>
#include <boost/geometry/index/rtree.hpp>

#include "sdi/catalog.hpp"

namespace sdi {

namespace detail {

namespace bg = boost::geometry;
namespace bgi = boost::geometry::index;

using Point = bg::model::point<double, 2, bg::cs::cartesian>;
using Box = bg::model::box<Point>;
using SpatialValue = std::pair<Box, std::string>;
using SpatialIndex = bgi::rtree<SpatialValue, bgi::quadratic<16>>;

using FieldCounts = std::array<std::uint32_t, kTextFields.size()>;
using TermPostings = std::map<std::string, FieldCounts, std::less<>>;

struct CatalogState {
    std::map<std::string, MetadataRecord, std::less<>> records;
    SpatialIndex spatial;
    std::unordered_map<std::string, TermPostings> text;
    std::uint64_t version = 0;
};

}  // namespace detail

/// On-disk half of a durable catalog. Not thread-safe; the catalog calls it
/// under its writer lock.
class Catalog::Storage {
public:
    struct Loaded {
        std::map<std::string, MetadataRecord, std::less<>> records;
        std::uint64_t version = 0;
        std::vector<std::string> warnings;
    };

    explicit Storage(std::filesystem::path directory);

    Loaded load();
    void append_upsert(const MetadataRecord& record, std::uint64_t version, std::size_t count);
    void append_remove(std::string_view id, std::uint64_t version, std::size_t count);
    void write_snapshot(const std::map<std::string, MetadataRecord, std::less<>>& records,
                        std::uint64_t version);
    std::size_t log_entries() const noexcept { return log_entries_; }

private:
    void append_line(const std::string& line);
    void write_manifest(std::size_t count, std::uint64_t version);
    void open_log();

    std::filesystem::path dir_;
    std::ofstream log_;
    std::size_t log_entries_ = 0;
};

}  // namespace sdi
