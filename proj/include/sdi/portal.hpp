#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "sdi/catalog.hpp"
#include "sdi/metadata.hpp"
#include "sdi/search.hpp"
#include "sdi/thesaurus.hpp"

namespace sdi {

struct PortalOptions {
    /// Profile that POST /records validates against.
    MetadataProfile profile = MetadataProfile::sdi_basic();
    RankingConfig ranking;
    /// Defaults for POST /harvest jobs when the body omits them.
    std::size_t harvest_concurrency = 4;
    std::chrono::milliseconds harvest_per_host_delay{0};
    std::chrono::milliseconds harvest_timeout{std::chrono::seconds(30)};
    /// Directory served under /ui/ when set.
    std::optional<std::filesystem::path> ui_directory;
};

/// The geoportal's HTTP/JSON interface.
///
///   POST /records              publish a canonical record (201 new, 200 replaced)
///   GET  /records/{id}         canonical record document
///   GET  /records/{id}/access  {endpoints:[{protocol,url}]}
///   GET  /search?...           result envelope (see search_api.hpp)
///   POST /harvest              {seed_urls, publisher_label} -> 202 {job_id}
///   GET  /harvest/{job_id}     {job_id, state: pending|running|done, report}
///   GET  /health               {status, record_count, catalog_version, thesaurus_loaded}
///
/// Errors are {status, code, message[, details]} with code one of
/// malformed_request, validation_failed, not_found, harvest_in_progress,
/// internal. POST endpoints are unauthenticated; expose on trusted
/// networks only.
class PortalServer {
public:
    PortalServer(Catalog& catalog, const Thesaurus& thesaurus, PortalOptions options = {});
    ~PortalServer();

    PortalServer(const PortalServer&) = delete;
    PortalServer& operator=(const PortalServer&) = delete;

    /// Binds the listening socket; port 0 picks a free port. Returns the
    /// bound port. Throws Error when binding fails.
    int bind(const std::string& host, int port);
    /// Serves until stop(). bind() must have succeeded.
    void listen();
    /// listen() on a background thread; returns once the server accepts.
    void start();
    void stop();

    /// Blocks until no harvest job is pending or running.
    void wait_for_harvests();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Splits "host:port". Throws Error when the port is missing or invalid.
std::pair<std::string, int> parse_listen_address(const std::string& address);

}  // namespace sdi
