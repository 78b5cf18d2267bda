#include <catch_amalgamated.hpp>

#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "fixtures.hpp"
#include "generators.hpp"
#include "http_fixture.hpp"
#include "oracles.hpp"
#include "sdi/canonical.hpp"
#include "sdi/capabilities.hpp"
#include "sdi/portal.hpp"
#include "sdi/search_api.hpp"
#include "temp_dir.hpp"

using namespace sdi;
using namespace std::chrono_literals;
using json = nlohmann::json;

namespace {

struct Portal {
    Catalog catalog;
    Thesaurus thesaurus = Thesaurus::load(testing::data_path("fixture.thesaurus"));
    std::unique_ptr<PortalServer> server;
    int port = 0;

    explicit Portal(PortalOptions options = {}) {
        server = std::make_unique<PortalServer>(catalog, thesaurus, std::move(options));
        port = server->bind("127.0.0.1", 0);
        server->start();
    }

    httplib::Client client() const {
        httplib::Client c("127.0.0.1", port);
        c.set_read_timeout(10, 0);
        c.set_url_encode(false);
        return c;
    }

    void load_corpus() {
        auto docs = json::parse(testing::read_text(testing::data_path("corpus.json")));
        for (const auto& d : docs) catalog.upsert(from_canonical_json(d).record);
    }
};

void check_error(const httplib::Result& res, int status, const std::string& code) {
    REQUIRE(res);
    CHECK(res->status == status);
    CHECK(res->get_header_value("Content-Type") == "application/json");
    auto body = json::parse(res->body);
    CHECK(body["status"] == status);
    CHECK(body["code"] == code);
    CHECK(body["message"].is_string());
}

std::set<std::string> recount_tokens(const MetadataRecord& r) {
    std::set<std::string> out;
    auto counts = testing::recount_postings({r});
    for (const auto& [term, by_id] : counts) out.insert(term);
    return out;
}

std::string valid_record_json(const std::string& id) {
    testing::Rng rng(std::hash<std::string>{}(id));
    auto r = testing::random_record(rng, 0);
    r.id = id;
    return to_canonical(r);
}

}  // namespace

TEST_CASE("health") {
    Portal p;
    auto res = p.client().Get("/health");
    REQUIRE(res);
    CHECK(res->status == 200);
    auto body = json::parse(res->body);
    CHECK(body["status"] == "ok");
    CHECK(body["record_count"] == 0);
    CHECK(body["thesaurus_loaded"] == true);
    CHECK(body.contains("catalog_version"));
}

TEST_CASE("publish, read back, replace") {
    Portal p;
    auto cli = p.client();
    auto doc = valid_record_json("pub-1");
    auto res = cli.Post("/records", doc, "application/json");
    REQUIRE(res);
    CHECK(res->status == 201);
    CHECK(json::parse(res->body)["id"] == "pub-1");

    auto got = cli.Get("/records/pub-1");
    REQUIRE(got);
    CHECK(got->status == 200);
    auto sent = from_canonical(doc).record;
    auto back = from_canonical(got->body).record;
    sent.created = back.created;
    sent.modified = back.modified;
    CHECK(back == sent);

    auto again = cli.Post("/records", doc, "application/json");
    REQUIRE(again);
    CHECK(again->status == 200);
}

TEST_CASE("publish errors") {
    Portal p;
    auto cli = p.client();
    check_error(cli.Post("/records", "{not json", "application/json"), 400, "malformed_request");

    auto missing_title = from_canonical(valid_record_json("t")).record;
    missing_title.title.clear();
    auto res = cli.Post("/records", to_canonical(missing_title), "application/json");
    check_error(res, 422, "validation_failed");
    auto details = json::parse(res->body)["details"];
    CHECK(details["missing_mandatory"] == json::array({"title"}));

    check_error(cli.Post("/records", R"({"id":"x","bbox":{"west":0,"east":1,"south":0,"north":95}})",
                         "application/json"),
                422, "validation_failed");
    CHECK(p.catalog.size() == 0);
}

TEST_CASE("access endpoints") {
    Portal p;
    auto cli = p.client();
    auto r = from_canonical(valid_record_json("a")).record;
    r.access_endpoints.clear();
    p.catalog.upsert(r);
    auto res = cli.Get("/records/a/access");
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(res->body == R"({"endpoints":[]})");
    check_error(cli.Get("/records/unknown/access"), 404, "not_found");
    check_error(cli.Get("/records/unknown"), 404, "not_found");
    check_error(cli.Get("/nowhere"), 404, "not_found");
}

TEST_CASE("harvested radar record binds to its source") {
    testing::FixtureServer provider;
    provider.serve("/wms", testing::read_text(testing::data_path("radar_capabilities.xml")));
    Portal p;
    auto service = parse_capabilities(testing::read_text(testing::data_path("radar_capabilities.xml")),
                                      provider.url("/wms"));
    auto record = layer_to_record(service, service.layers.at(0), "NOAA");
    auto cli = p.client();
    REQUIRE(cli.Post("/records", to_canonical(record), "application/json")->status == 201);
    auto res = cli.Get("/records/" + record.id + "/access");
    REQUIRE(res);
    auto body = json::parse(res->body);
    CHECK(body["endpoints"] == json::parse(R"([{"protocol":"WMS","url":")" + provider.url("/wms") + R"("}])"));
}

TEST_CASE("search endpoint agrees with the engine") {
    Portal p;
    p.load_corpus();
    auto cli = p.client();
    for (const char* target : {"/search?q=watershed", "/search?q=natural+disasters&mode=semantic",
                               "/search?q=road&mode=semantic", "/search?bbox=-125,24,-66,50&relation=intersects",
                               "/search?q=watershed&facet.publisher=USGS&page_size=2&page=1",
                               "/search?time_start=2015-01-01T00:00:00Z"}) {
        INFO(target);
        auto res = cli.Get(target);
        REQUIRE(res);
        REQUIRE(res->status == 200);
        CHECK(res->get_header_value("Content-Type") == "application/json");
        // reconstruct the parameters the way the server decoded them
        httplib::Request parsed;
        std::string query = std::string(target).substr(std::string(target).find('?') + 1);
        httplib::detail::parse_query_text(query, parsed.params);
        QueryParams params(parsed.params.begin(), parsed.params.end());
        auto expected = render_envelope(search_envelope(p.catalog.read(), parse_search_params(params), p.thesaurus));
        CHECK(res->body == expected);
    }
}

TEST_CASE("watershed results all carry the token") {
    Portal p;
    p.load_corpus();
    auto res = p.client().Get("/search?q=watershed&page_size=100");
    REQUIRE(res);
    auto body = json::parse(res->body);
    CHECK(body["total"] == 4);
    for (const auto& r : body["results"]) {
        const auto* record = p.catalog.read().find(r["id"].get<std::string>());
        REQUIRE(record);
        auto tokens = recount_tokens(*record);
        CHECK(tokens.count("watershed") == 1);
    }
}

TEST_CASE("search results respect the query box") {
    Portal p;
    p.load_corpus();
    auto res = p.client().Get("/search?bbox=-125,24,-66,50&relation=intersects&page_size=100");
    REQUIRE(res);
    auto body = json::parse(res->body);
    REQUIRE(body["total"].get<int>() > 0);
    for (const auto& r : body["results"]) {
        GeoBox b{r["bbox"]["west"], r["bbox"]["east"], r["bbox"]["south"], r["bbox"]["north"]};
        CHECK(intersects(b, GeoBox{-125, -66, 24, 50}));
    }
}

TEST_CASE("semantic natural disasters covers keyword earthquake over http") {
    Portal p;
    p.load_corpus();
    auto cli = p.client();
    auto ids = [&](const std::string& target) {
        std::set<std::string> out;
        auto body = json::parse(cli.Get(target)->body);
        for (const auto& r : body["results"]) out.insert(r["id"]);
        return out;
    };
    auto keyword = ids("/search?q=earthquake&page_size=100");
    auto semantic = ids("/search?q=natural+disasters&mode=semantic&page_size=100");
    CHECK_FALSE(keyword.empty());
    CHECK(std::includes(semantic.begin(), semantic.end(), keyword.begin(), keyword.end()));
}

TEST_CASE("bad search parameters") {
    Portal p;
    auto cli = p.client();
    check_error(cli.Get("/search?q=x&bbox=1,2,3"), 400, "malformed_request");
    check_error(cli.Get("/search?q=x&page_size=500"), 400, "malformed_request");
    check_error(cli.Get("/search"), 400, "malformed_request");
    auto empty = cli.Get("/search?q=nothingmatches");
    REQUIRE(empty);
    CHECK(empty->status == 200);
    CHECK(json::parse(empty->body)["total"] == 0);
}

TEST_CASE("harvest jobs") {
    testing::FixtureServer provider;
    provider.serve("/wms", testing::read_text(testing::data_path("radar_capabilities.xml")));
    provider.serve("/slow", testing::read_text(testing::data_path("radar_capabilities.xml")), 200, 800ms);
    Portal p;
    auto cli = p.client();

    check_error(cli.Post("/harvest", R"({"seed_urls":[],"publisher_label":"NOAA"})", "application/json"), 400,
                "malformed_request");
    check_error(cli.Post("/harvest", R"({"seed_urls":["http://a"]})", "application/json"), 400,
                "malformed_request");
    check_error(cli.Post("/harvest", "[", "application/json"), 400, "malformed_request");

    json body{{"seed_urls", {provider.url("/slow")}}, {"publisher_label", "NOAA"}};
    auto started = cli.Post("/harvest", body.dump(), "application/json");
    REQUIRE(started);
    CHECK(started->status == 202);
    std::string job = json::parse(started->body)["job_id"];

    check_error(cli.Post("/harvest", body.dump(), "application/json"), 409, "harvest_in_progress");

    auto status = json::parse(cli.Get("/harvest/" + job)->body);
    CHECK((status["state"] == "pending" || status["state"] == "running"));
    p.server->wait_for_harvests();
    status = json::parse(cli.Get("/harvest/" + job)->body);
    CHECK(status["state"] == "done");
    CHECK(status["report"]["outcomes"][0]["status"] == "ok");
    CHECK(status["report"]["outcomes"][0]["records_added"] == 1);

    json again{{"seed_urls", {provider.url("/wms")}}, {"publisher_label", "NOAA"}};
    auto second = cli.Post("/harvest", again.dump(), "application/json");
    REQUIRE(second);
    CHECK(second->status == 202);
    p.server->wait_for_harvests();
    check_error(cli.Get("/harvest/unknown"), 404, "not_found");
}

TEST_CASE("static ui directory") {
    testing::TempDir ui;
    testing::write_text(ui / "index.html", "<html>portal</html>");
    PortalOptions options;
    options.ui_directory = ui.path();
    Portal p(std::move(options));
    auto res = p.client().Get("/ui/index.html");
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(res->body == "<html>portal</html>");
}

TEST_CASE("concurrent publishes and searches") {
    Portal p;
    std::vector<std::thread> threads;
    std::atomic<int> failures{0};
    for (int t = 0; t < 4; ++t) {
        threads.emplace_back([&, t] {
            auto cli = p.client();
            for (int i = 0; i < 25; ++i) {
                auto id = "c" + std::to_string(t) + "-" + std::to_string(i);
                auto res = cli.Post("/records", valid_record_json(id), "application/json");
                if (!res || res->status != 201) ++failures;
                auto s = cli.Get("/search?bbox=-180,-90,180,90");
                if (!s || s->status != 200) ++failures;
            }
        });
    }
    for (auto& t : threads) t.join();
    CHECK(failures == 0);
    CHECK(p.catalog.size() == 100);
}

TEST_CASE("listen address parsing") {
    CHECK(parse_listen_address("127.0.0.1:8080") == std::pair<std::string, int>{"127.0.0.1", 8080});
    CHECK(parse_listen_address("[::1]:9000") == std::pair<std::string, int>{"::1", 9000});
    CHECK_THROWS_AS(parse_listen_address("localhost"), Error);
    CHECK_THROWS_AS(parse_listen_address("host:99999"), Error);
    CHECK_THROWS_AS(parse_listen_address("host:80x"), Error);
}
