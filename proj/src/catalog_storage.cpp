#include <sstream>

#include <json.hpp>

#include "catalog_internal.hpp"
#include "sdi/canonical.hpp"

namespace sdi {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr const char* kFormatVersion = "1";
constexpr const char* kLogName = "records.log";
constexpr const char* kSnapshotName = "snapshot.json";
constexpr const char* kManifestName = "MANIFEST";

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw StorageError("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_atomically(const fs::path& path, const std::string& content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << content;
        out.flush();
        if (!out) throw StorageError("cannot write " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw StorageError("cannot replace " + path.string() + ": " + ec.message());
}

}  // namespace

Catalog::Storage::Storage(fs::path directory) : dir_(std::move(directory)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_))
        throw StorageError("cannot create catalog directory " + dir_.string());
}

Catalog::Storage::Loaded Catalog::Storage::load() {
    Loaded out;

    if (fs::exists(dir_ / kSnapshotName)) {
        json snap;
        try {
            snap = json::parse(read_file(dir_ / kSnapshotName));
        } catch (const json::exception& e) {
            throw StorageError("corrupt snapshot: " + std::string(e.what()));
        }
        if (snap.value("format_version", std::string()) != kFormatVersion)
            throw StorageError("unsupported snapshot format");
        out.version = snap.value("catalog_version", std::uint64_t{0});
        for (const auto& doc : snap.at("records")) {
            auto parsed = from_canonical_json(doc);
            std::string id = parsed.record.id;
            out.records.insert_or_assign(std::move(id), std::move(parsed.record));
        }
    }

    const fs::path log_path = dir_ / kLogName;
    if (fs::exists(log_path)) {
        std::string content = read_file(log_path);
        std::size_t pos = 0;
        std::size_t line_no = 0;
        while (pos < content.size()) {
            std::size_t nl = content.find('\n', pos);
            bool complete = nl != std::string::npos;
            std::string_view line(content.data() + pos, (complete ? nl : content.size()) - pos);
            ++line_no;
            bool last = !complete || nl + 1 == content.size();
            try {
                json entry = json::parse(line);
                if (entry.contains("deleted") && !entry.contains("id")) {
                    out.records.erase(entry.at("deleted").get<std::string>());
                } else {
                    auto parsed = from_canonical_json(entry);
                    std::string id = parsed.record.id;
                    out.records.insert_or_assign(std::move(id), std::move(parsed.record));
                }
                if (!complete) throw StorageError("unterminated final entry");
            } catch (const std::exception& e) {
                if (!last)
                    throw StorageError("corrupt records.log line " + std::to_string(line_no) +
                                       ": " + e.what());
                // A torn write at the tail: drop it so later appends stay parseable.
                out.warnings.push_back("discarded torn records.log line " +
                                       std::to_string(line_no) + ": " + e.what());
                fs::resize_file(log_path, pos);
                break;
            }
            ++out.version;
            ++log_entries_;
            pos = complete ? nl + 1 : content.size();
        }
    }

    if (fs::exists(dir_ / kManifestName)) {
        try {
            json manifest = json::parse(read_file(dir_ / kManifestName));
            if (manifest.value("format_version", std::string()) != kFormatVersion)
                throw StorageError("unsupported catalog format");
            auto recorded = manifest.value("catalog_version", std::uint64_t{0});
            if (recorded > out.version) out.version = recorded;
        } catch (const json::exception& e) {
            out.warnings.push_back("unreadable MANIFEST ignored: " + std::string(e.what()));
        }
    }

    open_log();
    write_manifest(out.records.size(), out.version);
    return out;
}

void Catalog::Storage::open_log() {
    log_.close();
    log_.clear();
    log_.open(dir_ / kLogName, std::ios::binary | std::ios::app);
    if (!log_) throw StorageError("cannot open " + (dir_ / kLogName).string());
}

void Catalog::Storage::append_line(const std::string& line) {
    log_ << line << '\n';
    log_.flush();
    if (!log_) throw StorageError("append to records.log failed");
    ++log_entries_;
}

void Catalog::Storage::append_upsert(const MetadataRecord& record, std::uint64_t version,
                                     std::size_t count) {
    append_line(to_canonical(record));
    write_manifest(count, version);
}

void Catalog::Storage::append_remove(std::string_view id, std::uint64_t version,
                                     std::size_t count) {
    append_line(json{{"deleted", id}}.dump());
    write_manifest(count, version);
}

void Catalog::Storage::write_snapshot(
    const std::map<std::string, MetadataRecord, std::less<>>& records, std::uint64_t version) {
    nlohmann::ordered_json snap;
    snap["format_version"] = kFormatVersion;
    snap["catalog_version"] = version;
    snap["records"] = nlohmann::ordered_json::array();
    for (const auto& [id, r] : records) snap["records"].push_back(to_canonical_json(r));
    write_atomically(dir_ / kSnapshotName, snap.dump() + "\n");

    log_.close();
    log_.clear();
    log_.open(dir_ / kLogName, std::ios::binary | std::ios::trunc);
    if (!log_) throw StorageError("cannot truncate records.log");
    log_entries_ = 0;
    open_log();
    write_manifest(records.size(), version);
}

void Catalog::Storage::write_manifest(std::size_t count, std::uint64_t version) {
    nlohmann::ordered_json manifest;
    manifest["format_version"] = kFormatVersion;
    manifest["record_count"] = count;
    manifest["catalog_version"] = version;
    write_atomically(dir_ / kManifestName, manifest.dump() + "\n");
}

}  // namespace sdi
