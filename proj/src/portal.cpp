#include "sdi/portal.hpp"

#include <atomic>
#include <condition_variable>
#include <map>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "sdi/canonical.hpp"
#include "sdi/harvester.hpp"
#include "sdi/search_api.hpp"

namespace sdi {

namespace {

using ordered_json = nlohmann::ordered_json;
using json = nlohmann::json;

constexpr const char* kJson = "application/json";

void send_json(httplib::Response& res, int status, const ordered_json& body) {
    res.status = status;
    res.set_content(body.dump(-1, ' ', false, json::error_handler_t::replace), kJson);
}

void send_error(httplib::Response& res, int status, std::string_view code,
                const std::string& message, std::optional<ordered_json> details = std::nullopt) {
    ordered_json body;
    body["status"] = status;
    body["code"] = code;
    body["message"] = message;
    if (details) body["details"] = std::move(*details);
    send_json(res, status, body);
}

enum class JobState { pending, running, done };

std::string_view to_string(JobState s) {
    switch (s) {
        case JobState::pending: return "pending";
        case JobState::running: return "running";
        case JobState::done: return "done";
    }
    return "";
}

struct HarvestJobRecord {
    JobState state = JobState::pending;
    HarvestReport report;
    std::string error;
};

}  // namespace

struct PortalServer::Impl {
    Catalog& catalog;
    const Thesaurus& thesaurus;
    PortalOptions options;
    httplib::Server server;
    std::thread listener;
    bool bound = false;

    std::mutex jobs_mutex;
    std::condition_variable jobs_changed;
    std::map<std::string, HarvestJobRecord> jobs;
    std::vector<std::thread> job_threads;
    std::size_t active_jobs = 0;
    std::uint64_t next_job = 1;

    Impl(Catalog& c, const Thesaurus& t, PortalOptions o)
        : catalog(c), thesaurus(t), options(std::move(o)) {
        routes();
    }

    void routes() {
        server.Post("/records", [this](const auto& req, auto& res) { publish(req, res); });
        server.Get(R"(/records/([^/]+))", [this](const auto& req, auto& res) { record(req, res); });
        server.Get(R"(/records/([^/]+)/access)",
                   [this](const auto& req, auto& res) { access(req, res); });
        server.Get("/search", [this](const auto& req, auto& res) { find(req, res); });
        server.Post("/harvest", [this](const auto& req, auto& res) { start_harvest(req, res); });
        server.Get(R"(/harvest/([^/]+))",
                   [this](const auto& req, auto& res) { harvest_status(req, res); });
        server.Get("/health", [this](const auto&, auto& res) { health(res); });
        if (options.ui_directory) server.set_mount_point("/ui", options.ui_directory->string());

        server.set_exception_handler([](const auto&, auto& res, std::exception_ptr ep) {
            std::string message = "unexpected error";
            try {
                if (ep) std::rethrow_exception(ep);
            } catch (const std::exception& e) {
                message = e.what();
            } catch (...) {
            }
            send_error(res, 500, "internal", message);
        });
        server.set_error_handler([](const auto& req, auto& res) {
            if (!res.body.empty()) return;
            if (res.status == 404) {
                send_error(res, 404, "not_found", "no route for " + req.method + " " + req.path);
            } else if (res.status >= 500) {
                send_error(res, res.status, "internal", "server error");
            } else {
                send_error(res, res.status, "malformed_request", "bad request");
            }
        });
    }

    void publish(const httplib::Request& req, httplib::Response& res) {
        ParsedRecord parsed;
        try {
            parsed = from_canonical(req.body);
        } catch (const ParseError& e) {
            send_error(res, 400, "malformed_request", e.what(),
                       ordered_json{{"line", e.line()}, {"column", e.column()}});
            return;
        } catch (const SchemaError& e) {
            ValidationReport report;
            report.violations.push_back({e.field(), e.what()});
            send_error(res, 422, "validation_failed", e.what(), to_json(report));
            return;
        }
        auto report = validate_record(parsed.record, options.profile);
        if (!report.valid) {
            send_error(res, 422, "validation_failed",
                       "record does not satisfy profile " + options.profile.name(),
                       to_json(report));
            return;
        }
        UpsertResult result;
        try {
            result = catalog.upsert(std::move(parsed.record));
        } catch (const InvalidRecordError& e) {
            report.valid = false;
            report.violations = e.violations();
            send_error(res, 422, "validation_failed", e.what(), to_json(report));
            return;
        }
        ordered_json body{{"id", result.id}};
        if (!parsed.warnings.empty()) body["warnings"] = parsed.warnings;
        send_json(res, result.created ? 201 : 200, body);
    }

    void record(const httplib::Request& req, httplib::Response& res) {
        auto record = catalog.get(req.matches[1].str());
        if (!record) {
            send_error(res, 404, "not_found", "no record with id " + req.matches[1].str());
            return;
        }
        res.status = 200;
        res.set_content(to_canonical(*record), kJson);
    }

    void access(const httplib::Request& req, httplib::Response& res) {
        auto record = catalog.get(req.matches[1].str());
        if (!record) {
            send_error(res, 404, "not_found", "no record with id " + req.matches[1].str());
            return;
        }
        ordered_json endpoints = ordered_json::array();
        for (const auto& e : record->access_endpoints)
            endpoints.push_back({{"protocol", e.protocol}, {"url", e.url}});
        send_json(res, 200, ordered_json{{"endpoints", std::move(endpoints)}});
    }

    void find(const httplib::Request& req, httplib::Response& res) {
        try {
            QueryParams params(req.params.begin(), req.params.end());
            auto query = parse_search_params(params);
            auto view = catalog.read();
            auto envelope = search_envelope(view, query, thesaurus, options.ranking);
            res.status = 200;
            res.set_content(render_envelope(envelope), kJson);
        } catch (const InvalidQuery& e) {
            send_error(res, 400, "malformed_request", e.what());
        }
    }

    void health(httplib::Response& res) {
        auto view = catalog.read();
        ordered_json body;
        body["status"] = "ok";
        body["record_count"] = view.size();
        body["catalog_version"] = view.version();
        body["thesaurus_loaded"] = !thesaurus.empty();
        send_json(res, 200, body);
    }

    void start_harvest(const httplib::Request& req, httplib::Response& res) {
        HarvestJob job;
        job.max_concurrent_fetches = options.harvest_concurrency;
        job.per_host_delay = options.harvest_per_host_delay;
        job.timeout = options.harvest_timeout;
        try {
            json body = json::parse(req.body);
            if (!body.is_object()) throw Error("body must be a JSON object");
            const auto& seeds = body.at("seed_urls");
            if (!seeds.is_array()) throw Error("seed_urls must be an array");
            for (const auto& s : seeds) job.seed_urls.push_back(s.get<std::string>());
            if (!body.contains("publisher_label") || !body["publisher_label"].is_string() ||
                body["publisher_label"].get<std::string>().empty())
                throw Error("publisher_label must be a non-empty string");
            job.publisher_label = body["publisher_label"].get<std::string>();
            if (body.contains("max_concurrent_fetches"))
                job.max_concurrent_fetches = body["max_concurrent_fetches"].get<std::size_t>();
            if (body.contains("per_host_delay_ms"))
                job.per_host_delay = std::chrono::milliseconds(body["per_host_delay_ms"].get<long>());
            if (body.contains("timeout_ms"))
                job.timeout = std::chrono::milliseconds(body["timeout_ms"].get<long>());
            validate(job);
        } catch (const std::exception& e) {
            send_error(res, 400, "malformed_request", e.what());
            return;
        }

        std::optional<HarvestLock> lock;
        try {
            lock.emplace(HarvestLock::acquire(catalog));
        } catch (const HarvestInProgress& e) {
            send_error(res, 409, "harvest_in_progress", e.what());
            return;
        }

        std::string id;
        {
            std::lock_guard guard(jobs_mutex);
            id = "harvest-" + std::to_string(next_job++);
            jobs[id] = HarvestJobRecord{};
            jobs[id].report.outcomes.resize(job.seed_urls.size());
            for (std::size_t i = 0; i < job.seed_urls.size(); ++i)
                jobs[id].report.outcomes[i].url = job.seed_urls[i];
            ++active_jobs;
            job_threads.emplace_back(
                [this, id, job = std::move(job), held = std::move(*lock)]() mutable {
                    run_job(id, job, held);
                });
        }
        send_json(res, 202, ordered_json{{"job_id", id}});
    }

    void run_job(const std::string& id, const HarvestJob& job, const HarvestLock& lock) {
        {
            std::lock_guard guard(jobs_mutex);
            jobs[id].state = JobState::running;
        }
        HarvestReport report;
        std::string error;
        try {
            report = run_harvest(catalog, job, lock, [&](std::size_t i, const UrlOutcome& o) {
                std::lock_guard guard(jobs_mutex);
                jobs[id].report.outcomes[i] = o;
            });
        } catch (const std::exception& e) {
            error = e.what();
        }
        std::lock_guard guard(jobs_mutex);
        auto& record = jobs[id];
        if (error.empty()) record.report = std::move(report);
        record.error = std::move(error);
        record.state = JobState::done;
        --active_jobs;
        jobs_changed.notify_all();
    }

    void harvest_status(const httplib::Request& req, httplib::Response& res) {
        std::lock_guard guard(jobs_mutex);
        auto it = jobs.find(req.matches[1].str());
        if (it == jobs.end()) {
            send_error(res, 404, "not_found", "no harvest job " + req.matches[1].str());
            return;
        }
        ordered_json body;
        body["job_id"] = it->first;
        body["state"] = std::string(to_string(it->second.state));
        body["report"] = to_json(it->second.report);
        if (!it->second.error.empty()) body["error"] = it->second.error;
        send_json(res, 200, body);
    }

    void wait_for_jobs() {
        std::unique_lock guard(jobs_mutex);
        jobs_changed.wait(guard, [this] { return active_jobs == 0; });
    }
};

PortalServer::PortalServer(Catalog& catalog, const Thesaurus& thesaurus, PortalOptions options)
    : impl_(std::make_unique<Impl>(catalog, thesaurus, std::move(options))) {}

PortalServer::~PortalServer() {
    stop();
    impl_->wait_for_jobs();
    std::vector<std::thread> threads;
    {
        std::lock_guard guard(impl_->jobs_mutex);
        threads.swap(impl_->job_threads);
    }
    for (auto& t : threads)
        if (t.joinable()) t.join();
}

int PortalServer::bind(const std::string& host, int port) {
    int bound_port = port == 0 ? impl_->server.bind_to_any_port(host)
                               : (impl_->server.bind_to_port(host, port) ? port : -1);
    if (bound_port <= 0)
        throw Error("cannot listen on " + host + ":" + std::to_string(port));
    impl_->bound = true;
    return bound_port;
}

void PortalServer::listen() {
    if (!impl_->bound) throw Error("PortalServer::listen called before bind");
    impl_->server.listen_after_bind();
}

void PortalServer::start() {
    if (!impl_->bound) throw Error("PortalServer::start called before bind");
    impl_->listener = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

void PortalServer::stop() {
    impl_->server.stop();
    if (impl_->listener.joinable()) impl_->listener.join();
}

void PortalServer::wait_for_harvests() { impl_->wait_for_jobs(); }

std::pair<std::string, int> parse_listen_address(const std::string& address) {
    auto colon = address.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == address.size())
        throw Error("listen address must be host:port, got '" + address + "'");
    std::string host = address.substr(0, colon);
    if (host.size() > 2 && host.front() == '[' && host.back() == ']')
        host = host.substr(1, host.size() - 2);
    int port = 0;
    try {
        std::size_t used = 0;
        port = std::stoi(address.substr(colon + 1), &used);
        if (used != address.size() - colon - 1) throw Error("");
    } catch (const std::exception&) {
        throw Error("invalid port in listen address '" + address + "'");
    }
    if (port < 0 || port > 65535) throw Error("invalid port in listen address '" + address + "'");
    return {host, port};
}

}  // namespace sdi
