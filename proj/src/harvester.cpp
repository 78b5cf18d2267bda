#include "sdi/harvester.hpp"

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cstring>
#include <fcntl.h>
#include <fstream>
#include <regex>
#include <set>
#include <signal.h>
#include <sstream>
#include <thread>
#include <unistd.h>

#include <httplib.h>

#include "sdi/capabilities.hpp"

namespace sdi {

namespace {

struct ParsedUrl {
    std::string scheme;
    std::string host;
    int port = 0;
    std::string target;  // path + query

    std::string origin() const {
        return scheme + "://" + host + ":" + std::to_string(port);
    }
};

ParsedUrl parse_url(const std::string& url) {
    static const std::regex pattern(R"(^([A-Za-z][A-Za-z0-9+.\-]*)://([^/:?#\s]+|\[[^\]\s]+\])(?::(\d{1,5}))?([^#\s]*)(#\S*)?$)");
    std::smatch m;
    if (!std::regex_match(url, m, pattern))
        throw FetchError(FetchError::Kind::invalid_url, "not an absolute URL: " + url);
    ParsedUrl out;
    out.scheme = m[1].str();
    std::transform(out.scheme.begin(), out.scheme.end(), out.scheme.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (out.scheme != "http" && out.scheme != "https")
        throw FetchError(FetchError::Kind::invalid_url, "unsupported scheme in " + url);
    out.host = m[2].str();
    out.port = m[3].matched ? std::stoi(m[3].str()) : (out.scheme == "https" ? 443 : 80);
    if (out.port <= 0 || out.port > 65535)
        throw FetchError(FetchError::Kind::invalid_url, "bad port in " + url);
    out.target = m[4].matched && !m[4].str().empty() ? m[4].str() : "/";
    if (out.target.front() == '?') out.target.insert(out.target.begin(), '/');
    return out;
}

std::string resolve_location(const ParsedUrl& base, const std::string& location) {
    if (location.find("://") != std::string::npos) return location;
    std::string origin = base.scheme + "://" + base.host + ":" + std::to_string(base.port);
    if (location.rfind("//", 0) == 0) return base.scheme + ":" + location;
    if (!location.empty() && location.front() == '/') return origin + location;
    std::string dir = base.target.substr(0, base.target.find('?'));
    dir = dir.substr(0, dir.rfind('/') + 1);
    return origin + dir + location;
}

bool is_redirect(int status) {
    return status == 301 || status == 302 || status == 303 || status == 307 || status == 308;
}

std::mutex g_memory_locks_mutex;
std::set<const Catalog*> g_memory_locks;

bool process_alive(pid_t pid) { return pid > 0 && (::kill(pid, 0) == 0 || errno == EPERM); }

// Creates the lock file exclusively; false if it already exists.
bool create_lock_file(const std::filesystem::path& path) {
    int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_EXCL, 0644);
    if (fd < 0) {
        if (errno == EEXIST) return false;
        throw StorageError("cannot create " + path.string() + ": " + std::strerror(errno));
    }
    std::string content = "pid " + std::to_string(::getpid()) + "\nstarted " +
                          format_iso8601(now_utc()) + "\n";
    ssize_t written = ::write(fd, content.data(), content.size());
    ::close(fd);
    if (written != static_cast<ssize_t>(content.size()))
        throw StorageError("cannot write " + path.string());
    return true;
}

pid_t lock_owner(const std::filesystem::path& path) {
    std::ifstream in(path);
    std::string key;
    long pid = 0;
    if (in >> key >> pid && key == "pid") return static_cast<pid_t>(pid);
    return 0;
}

}  // namespace

void validate(const HarvestJob& job) {
    if (job.seed_urls.empty()) throw Error("harvest job has no seed URLs");
    if (job.max_concurrent_fetches == 0 || job.max_concurrent_fetches > kMaxConcurrentFetches)
        throw Error("max_concurrent_fetches must be between 1 and " +
                    std::to_string(kMaxConcurrentFetches));
    if (job.per_host_delay.count() < 0) throw Error("per_host_delay must be non-negative");
    if (job.timeout.count() <= 0) throw Error("timeout must be positive");
}

std::vector<std::string> parse_seed_list(std::string_view text) {
    std::vector<std::string> seeds;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        auto last = line.find_last_not_of(" \t\r");
        seeds.push_back(line.substr(first, last - first + 1));
    }
    return seeds;
}

std::string_view to_string(FetchError::Kind kind) {
    switch (kind) {
        case FetchError::Kind::invalid_url: return "invalid_url";
        case FetchError::Kind::connection: return "connection";
        case FetchError::Kind::timeout: return "timeout";
        case FetchError::Kind::http_status: return "http_status";
        case FetchError::Kind::oversize: return "oversize";
        case FetchError::Kind::too_many_redirects: return "too_many_redirects";
    }
    return "";
}

void HostThrottle::acquire(const std::string& host) {
    auto start = std::chrono::steady_clock::now();
    {
        std::lock_guard lock(mutex_);
        auto it = next_slot_.find(host);
        if (it != next_slot_.end() && it->second > start) start = it->second;
        next_slot_[host] = start + delay_;
    }
    std::this_thread::sleep_until(start);
}

std::string fetch_capabilities(const std::string& url, std::chrono::milliseconds timeout,
                               HostThrottle* throttle, std::size_t max_bytes) {
    std::string current = url;
    for (int hop = 0; hop <= kMaxRedirects; ++hop) {
        ParsedUrl target = parse_url(current);
        if (throttle) throttle->acquire(target.host);

        httplib::Client client(target.origin());
        auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
        auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
        client.set_connection_timeout(secs.count(), usecs.count());
        client.set_read_timeout(secs.count(), usecs.count());
        client.set_write_timeout(secs.count(), usecs.count());
        client.set_follow_location(false);

        int status = 0;
        std::string location;
        bool oversize = false;
        std::string body;
        auto started = std::chrono::steady_clock::now();
        auto result = client.Get(
            target.target, httplib::Headers{{"Accept", "application/xml, text/xml, */*"}},
            [&](const httplib::Response& response) {
                status = response.status;
                location = response.get_header_value("Location");
                if (status != 200) return false;
                if (response.has_header("Content-Length")) {
                    auto declared = std::strtoull(
                        response.get_header_value("Content-Length").c_str(), nullptr, 10);
                    if (declared > max_bytes) {
                        oversize = true;
                        return false;
                    }
                }
                return true;
            },
            [&](const char* data, std::size_t length) {
                if (body.size() + length > max_bytes) {
                    oversize = true;
                    return false;
                }
                body.append(data, length);
                return true;
            });
        auto elapsed = std::chrono::steady_clock::now() - started;

        if (oversize)
            throw FetchError(FetchError::Kind::oversize,
                             "response from " + current + " exceeds " +
                                 std::to_string(max_bytes) + " bytes");
        if (status != 0 && status != 200) {
            if (is_redirect(status) && !location.empty()) {
                current = resolve_location(target, location);
                continue;
            }
            throw FetchError(FetchError::Kind::http_status,
                             "HTTP " + std::to_string(status) + " from " + current, status);
        }
        if (!result) {
            auto err = result.error();
            if (err == httplib::Error::ConnectionTimeout ||
                (err == httplib::Error::Read && elapsed >= timeout))
                throw FetchError(FetchError::Kind::timeout, "timed out fetching " + current);
            throw FetchError(FetchError::Kind::connection,
                             "cannot fetch " + current + ": " + httplib::to_string(err));
        }
        return body;
    }
    throw FetchError(FetchError::Kind::too_many_redirects,
                     "more than " + std::to_string(kMaxRedirects) + " redirects from " + url);
}

std::string_view to_string(UrlOutcome::Status status) {
    switch (status) {
        case UrlOutcome::Status::ok: return "ok";
        case UrlOutcome::Status::fetch_error: return "fetch_error";
        case UrlOutcome::Status::parse_error: return "parse_error";
    }
    return "";
}

std::size_t HarvestReport::added() const {
    std::size_t n = 0;
    for (const auto& o : outcomes) n += o.records_added;
    return n;
}

std::size_t HarvestReport::updated() const {
    std::size_t n = 0;
    for (const auto& o : outcomes) n += o.records_updated;
    return n;
}

bool HarvestReport::all_ok() const {
    return std::all_of(outcomes.begin(), outcomes.end(),
                       [](const auto& o) { return o.status == UrlOutcome::Status::ok; });
}

nlohmann::ordered_json to_json(const UrlOutcome& o) {
    nlohmann::ordered_json out;
    out["url"] = o.url;
    out["status"] = std::string(to_string(o.status));
    out["records_added"] = o.records_added;
    out["records_updated"] = o.records_updated;
    out["detail"] = o.detail;
    out["warnings"] = o.warnings;
    return out;
}

nlohmann::ordered_json to_json(const HarvestReport& report) {
    nlohmann::ordered_json out;
    out["started"] = format_iso8601(report.started);
    out["finished"] = format_iso8601(report.finished);
    out["outcomes"] = nlohmann::ordered_json::array();
    for (const auto& o : report.outcomes) out["outcomes"].push_back(to_json(o));
    return out;
}

HarvestLock HarvestLock::acquire(const Catalog& catalog) {
    if (!catalog.directory()) {
        std::lock_guard guard(g_memory_locks_mutex);
        if (!g_memory_locks.insert(&catalog).second)
            throw HarvestInProgress("a harvest is already running on this catalog");
        return HarvestLock(catalog, std::nullopt);
    }
    auto path = *catalog.directory() / "harvest.lock";
    for (int attempt = 0; attempt < 2; ++attempt) {
        if (create_lock_file(path)) return HarvestLock(catalog, path);
        pid_t owner = lock_owner(path);
        if (owner != 0 && process_alive(owner) && owner != ::getpid())
            throw HarvestInProgress("harvest in progress (pid " + std::to_string(owner) + ")");
        if (owner == ::getpid())
            throw HarvestInProgress("a harvest is already running on this catalog");
        std::error_code ec;
        std::filesystem::remove(path, ec);  // stale lock from a dead process
    }
    throw HarvestInProgress("cannot acquire " + path.string());
}

HarvestLock::HarvestLock(HarvestLock&& other) noexcept
    : catalog_(other.catalog_), file_(std::move(other.file_)) {
    other.catalog_ = nullptr;
    other.file_.reset();
}

HarvestLock::~HarvestLock() {
    if (!catalog_) return;
    if (file_) {
        std::error_code ec;
        std::filesystem::remove(*file_, ec);
    } else {
        std::lock_guard guard(g_memory_locks_mutex);
        g_memory_locks.erase(catalog_);
    }
}

HarvestReport run_harvest(Catalog& catalog, const HarvestJob& job, const HarvestLock& lock,
                          const OutcomeCallback& on_outcome) {
    validate(job);
    if (&lock.catalog() != &catalog) throw Error("harvest lock belongs to another catalog");

    HarvestReport report;
    report.started = now_utc();
    report.outcomes.resize(job.seed_urls.size());

    HostThrottle throttle(job.per_host_delay);
    std::atomic<std::size_t> next{0};

    auto process = [&](std::size_t index) {
        UrlOutcome outcome;
        outcome.url = job.seed_urls[index];
        std::string xml;
        try {
            xml = fetch_capabilities(outcome.url, job.timeout, &throttle);
        } catch (const std::exception& e) {
            outcome.status = UrlOutcome::Status::fetch_error;
            outcome.detail = e.what();
            return outcome;
        }
        try {
            auto service = parse_capabilities(xml, outcome.url);
            outcome.warnings = service.warnings;
            for (const auto& layer : service.layers) {
                MetadataRecord record;
                try {
                    record = layer_to_record(service, layer, job.publisher_label);
                } catch (const NoExtentError& e) {
                    outcome.warnings.push_back(std::string("skipped: ") + e.what());
                    continue;
                }
                std::string title = record.title;
                try {
                    if (catalog.upsert(std::move(record)).created) {
                        ++outcome.records_added;
                    } else {
                        ++outcome.records_updated;
                    }
                } catch (const InvalidRecordError& e) {
                    outcome.warnings.push_back("skipped layer '" + title + "': " + e.what());
                }
            }
        } catch (const std::exception& e) {
            outcome.status = UrlOutcome::Status::parse_error;
            outcome.detail = e.what();
        }
        return outcome;
    };

    std::mutex report_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < job.seed_urls.size(); i = next++) {
            UrlOutcome outcome = process(i);
            std::lock_guard guard(report_mutex);
            report.outcomes[i] = std::move(outcome);
            if (on_outcome) on_outcome(i, report.outcomes[i]);
        }
    };

    std::size_t workers = std::min(job.max_concurrent_fetches, job.seed_urls.size());
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    report.finished = now_utc();
    return report;
}

HarvestReport harvest(Catalog& catalog, const HarvestJob& job) {
    validate(job);
    auto lock = HarvestLock::acquire(catalog);
    return run_harvest(catalog, job, lock);
}

}  // namespace sdi
