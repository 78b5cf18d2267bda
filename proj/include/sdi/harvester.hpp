#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sdi/catalog.hpp"
#include "sdi/error.hpp"
#include "sdi/time.hpp"

namespace sdi {

inline constexpr std::size_t kMaxCapabilitiesBytes = 32u * 1024u * 1024u;
inline constexpr std::size_t kMaxConcurrentFetches = 64;
inline constexpr int kMaxRedirects = 5;

struct HarvestJob {
    std::vector<std::string> seed_urls;
    std::size_t max_concurrent_fetches = 4;
    std::chrono::milliseconds per_host_delay{0};
    std::chrono::milliseconds timeout{std::chrono::seconds(30)};
    std::string publisher_label;
};

/// Throws Error unless seeds are non-empty and 1 <= concurrency <= 64.
void validate(const HarvestJob& job);

/// Seed file: one URL per line, '#' comments and blank lines ignored.
std::vector<std::string> parse_seed_list(std::string_view text);

class FetchError : public Error {
public:
    enum class Kind { invalid_url, connection, timeout, http_status, oversize, too_many_redirects };

    FetchError(Kind kind, const std::string& message, int status = 0)
        : Error(message), kind_(kind), status_(status) {}

    Kind kind() const noexcept { return kind_; }
    /// HTTP status for Kind::http_status, 0 otherwise.
    int status() const noexcept { return status_; }

private:
    Kind kind_;
    int status_;
};

std::string_view to_string(FetchError::Kind kind);

/// Per-host politeness clock: successive request starts to one host are
/// spaced at least `delay` apart. Thread-safe.
class HostThrottle {
public:
    explicit HostThrottle(std::chrono::milliseconds delay) : delay_(delay) {}

    /// Blocks until a request to `host` may start, then claims the slot.
    void acquire(const std::string& host);

private:
    std::chrono::milliseconds delay_;
    std::mutex mutex_;
    std::map<std::string, std::chrono::steady_clock::time_point> next_slot_;
};

/// GETs a capabilities document over http(s). Follows up to 5 redirects,
/// each hop paying the politeness clock of its own host. Returns the body
/// on status 200; throws FetchError otherwise. Bodies larger than
/// `max_bytes` are rejected, never truncated.
std::string fetch_capabilities(const std::string& url, std::chrono::milliseconds timeout,
                               HostThrottle* throttle = nullptr,
                               std::size_t max_bytes = kMaxCapabilitiesBytes);

struct UrlOutcome {
    enum class Status { ok, fetch_error, parse_error };

    std::string url;
    Status status = Status::ok;
    std::size_t records_added = 0;
    std::size_t records_updated = 0;
    std::string detail;
    std::vector<std::string> warnings;
};

std::string_view to_string(UrlOutcome::Status status);

struct HarvestReport {
    std::vector<UrlOutcome> outcomes;  // one per seed URL, seed order
    Timestamp started{};
    Timestamp finished{};

    std::size_t added() const;
    std::size_t updated() const;
    bool all_ok() const;
};

nlohmann::ordered_json to_json(const UrlOutcome& outcome);
nlohmann::ordered_json to_json(const HarvestReport& report);

class HarvestInProgress : public Error {
public:
    using Error::Error;
};

/// One active harvest per catalog. For a durable catalog this is the file
/// <dir>/harvest.lock (pid and start instant); locks left by dead processes
/// are reclaimed. In-memory catalogs are locked within the process.
class HarvestLock {
public:
    /// Throws HarvestInProgress if another harvest holds the catalog.
    static HarvestLock acquire(const Catalog& catalog);

    HarvestLock(HarvestLock&& other) noexcept;
    HarvestLock& operator=(HarvestLock&&) = delete;
    ~HarvestLock();

    const Catalog& catalog() const noexcept { return *catalog_; }

private:
    HarvestLock(const Catalog& catalog, std::optional<std::filesystem::path> file)
        : catalog_(&catalog), file_(std::move(file)) {}

    const Catalog* catalog_;
    std::optional<std::filesystem::path> file_;
};

using OutcomeCallback = std::function<void(std::size_t seed_index, const UrlOutcome&)>;

/// Fetches every seed concurrently (bounded by max_concurrent_fetches),
/// parses the capabilities and upserts one record per layer with a
/// resolvable extent. Failures are isolated per URL and reported, never
/// thrown. `lock` must hold `catalog`.
HarvestReport run_harvest(Catalog& catalog, const HarvestJob& job, const HarvestLock& lock,
                          const OutcomeCallback& on_outcome = {});

/// Acquires the harvest lock and runs the job.
HarvestReport harvest(Catalog& catalog, const HarvestJob& job);

}  // namespace sdi
