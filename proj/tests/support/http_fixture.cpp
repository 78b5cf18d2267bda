#include "http_fixture.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <thread>

#include <httplib.h>

namespace sdi::testing {

struct FixtureServer::Impl {
    httplib::Server server;
    std::thread thread;
    mutable std::mutex mutex;
    std::vector<Hit> hits;
    std::atomic<std::size_t> in_flight{0};
    std::atomic<std::size_t> max_in_flight{0};

    // Counts a request as in flight for the lifetime of the guard.
    struct Flight {
        Impl& impl;
        explicit Flight(Impl& i) : impl(i) {
            auto now = ++impl.in_flight;
            auto seen = impl.max_in_flight.load();
            while (now > seen && !impl.max_in_flight.compare_exchange_weak(seen, now)) {
            }
        }
        ~Flight() { --impl.in_flight; }
    };

    void record(const httplib::Request& req) {
        std::lock_guard guard(mutex);
        hits.push_back({req.get_header_value("Host"), req.path, std::chrono::steady_clock::now()});
    }
};

FixtureServer::FixtureServer() : impl_(std::make_unique<Impl>()) {
    impl_->server.new_task_queue = [] { return new httplib::ThreadPool(80); };
    port_ = impl_->server.bind_to_any_port("127.0.0.1");
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

FixtureServer::~FixtureServer() {
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

void FixtureServer::serve(const std::string& path, std::string body, int status,
                          std::chrono::milliseconds delay) {
    impl_->server.Get(path, [this, body = std::move(body), status, delay](const auto& req,
                                                                          auto& res) {
        Impl::Flight flight(*impl_);
        impl_->record(req);
        if (delay.count() > 0) std::this_thread::sleep_for(delay);
        res.status = status;
        res.set_content(body, "application/xml");
    });
}

void FixtureServer::redirect(const std::string& path, const std::string& location, int status) {
    impl_->server.Get(path, [this, location, status](const auto& req, auto& res) {
        Impl::Flight flight(*impl_);
        impl_->record(req);
        res.status = status;
        res.set_header("Location", location);
    });
}

void FixtureServer::serve_stream(const std::string& path, std::size_t bytes) {
    impl_->server.Get(path, [this, bytes](const auto& req, auto& res) {
        impl_->record(req);
        res.set_chunked_content_provider(
            "application/xml", [bytes, sent = std::size_t{0}](std::size_t, httplib::DataSink& sink) mutable {
                static const std::string chunk(64 * 1024, 'x');
                if (sent >= bytes) {
                    sink.done();
                    return true;
                }
                std::size_t n = std::min(chunk.size(), bytes - sent);
                if (!sink.write(chunk.data(), n)) return false;
                sent += n;
                return true;
            });
    });
}

std::string FixtureServer::url(const std::string& path) const {
    return "http://127.0.0.1:" + std::to_string(port_) + path;
}

std::string FixtureServer::alias_url(const std::string& path) const {
    return "http://localhost:" + std::to_string(port_) + path;
}

std::vector<FixtureServer::Hit> FixtureServer::hits() const {
    std::lock_guard guard(impl_->mutex);
    return impl_->hits;
}

std::size_t FixtureServer::max_in_flight() const { return impl_->max_in_flight.load(); }

void FixtureServer::clear_log() {
    std::lock_guard guard(impl_->mutex);
    impl_->hits.clear();
    impl_->max_in_flight = 0;
}

}  // namespace sdi::testing
