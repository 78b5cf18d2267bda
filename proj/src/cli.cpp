#include "sdi/cli.hpp"

#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <pthread.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "sdi/canonical.hpp"
#include "sdi/catalog.hpp"
#include "sdi/harvester.hpp"
#include "sdi/portal.hpp"
#include "sdi/search_api.hpp"
#include "sdi/thesaurus.hpp"

namespace sdi {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

class IoError : public Error {
public:
    using Error::Error;
};

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (in.bad()) throw IoError("error reading " + path.string());
    return buffer.str();
}

std::string format_score(double score) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", score);
    return buf;
}

std::string pad(std::string s, std::size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
}

void print_report(std::ostream& out, const std::string& label, const ValidationReport& report) {
    char completeness[16];
    std::snprintf(completeness, sizeof completeness, "%.2f", report.completeness);
    out << label << ": " << (report.valid ? "valid" : "INVALID") << " (completeness "
        << completeness << ")\n";
    for (const auto& f : report.missing_mandatory) out << "  missing mandatory: " << f << "\n";
    for (const auto& f : report.missing_recommended) out << "  missing recommended: " << f << "\n";
    for (const auto& v : report.violations) out << "  violation: " << v.field << ": " << v.message << "\n";
}

struct Context {
    CliOverrides flags;
    const EnvLookup* env = nullptr;
    std::ostream* out = nullptr;
    std::ostream* err = nullptr;

    CliConfig config() const { return resolve_config(flags, *env); }
};

Thesaurus open_thesaurus(const CliConfig& config) {
    return config.thesaurus_path ? Thesaurus::load(*config.thesaurus_path) : Thesaurus{};
}

void report_load_warnings(const Catalog& catalog, std::ostream& err) {
    for (const auto& w : catalog.load_warnings()) err << "warning: " << w << "\n";
}

int cmd_validate(const Context& ctx, const std::vector<std::string>& files) {
    auto config = ctx.config();
    auto profile = load_profile(config.profile);
    int code = kExitOk;
    for (const auto& file : files) {
        std::string text;
        try {
            text = read_file(file);
        } catch (const IoError& e) {
            *ctx.err << "error: " << e.what() << "\n";
            code = kExitUsageOrIo;
            continue;
        }
        ValidationReport report;
        try {
            auto parsed = from_canonical(text);
            for (const auto& w : parsed.warnings) *ctx.err << file << ": warning: " << w << "\n";
            report = validate_record(parsed.record, profile);
        } catch (const ParseError& e) {
            *ctx.err << file << ":" << e.line() << ":" << e.column() << ": parse error: " << e.what()
                     << "\n";
            code = kExitUsageOrIo;
            continue;
        } catch (const SchemaError& e) {
            report.violations.push_back({e.field(), e.what()});
        }
        print_report(*ctx.out, file, report);
        if (!report.valid && code == kExitOk) code = kExitDomainFailure;
    }
    return code;
}

// A record file holds one canonical document or a JSON array of them.
std::vector<json> record_documents(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error&) {
        from_canonical(text);  // rethrows with line and column
        throw;
    }
    if (doc.is_array()) return doc.get<std::vector<json>>();
    return {std::move(doc)};
}

int cmd_ingest(const Context& ctx, const std::vector<std::string>& files) {
    auto config = ctx.config();
    auto profile = load_profile(config.profile);
    Catalog catalog(config.catalog_dir);
    report_load_warnings(catalog, *ctx.err);
    std::size_t added = 0, updated = 0, rejected = 0;
    bool io_failure = false;
    for (const auto& file : files) {
        std::vector<json> docs;
        try {
            docs = record_documents(read_file(file));
        } catch (const ParseError& e) {
            *ctx.err << file << ":" << e.line() << ":" << e.column() << ": parse error: " << e.what()
                     << "\n";
            io_failure = true;
            continue;
        } catch (const IoError& e) {
            *ctx.err << "error: " << e.what() << "\n";
            io_failure = true;
            continue;
        }
        for (std::size_t i = 0; i < docs.size(); ++i) {
            std::string label = docs.size() == 1 ? file : file + "[" + std::to_string(i) + "]";
            try {
                auto parsed = from_canonical_json(docs[i]);
                auto report = validate_record(parsed.record, profile);
                if (!report.valid) {
                    print_report(*ctx.err, label, report);
                    ++rejected;
                    continue;
                }
                auto result = catalog.upsert(std::move(parsed.record));
                ++(result.created ? added : updated);
            } catch (const SchemaError& e) {
                *ctx.err << label << ": rejected: " << e.field() << ": " << e.what() << "\n";
                ++rejected;
            } catch (const InvalidRecordError& e) {
                *ctx.err << label << ": rejected: " << e.what() << "\n";
                ++rejected;
            }
        }
    }
    *ctx.out << "added=" << added << " updated=" << updated << " rejected=" << rejected << "\n";
    if (io_failure) return kExitUsageOrIo;
    return rejected > 0 ? kExitDomainFailure : kExitOk;
}

struct HarvestArgs {
    std::string seeds;
    std::string publisher;
    std::size_t concurrency = 4;
    long delay_ms = 0;
    long timeout_ms = 30000;
    bool json = false;
};

int cmd_harvest(const Context& ctx, const HarvestArgs& args) {
    auto config = ctx.config();
    HarvestJob job;
    job.seed_urls = parse_seed_list(read_file(args.seeds));
    job.publisher_label = args.publisher;
    job.max_concurrent_fetches = args.concurrency;
    job.per_host_delay = std::chrono::milliseconds(args.delay_ms);
    job.timeout = std::chrono::milliseconds(args.timeout_ms);
    try {
        validate(job);
    } catch (const Error& e) {
        *ctx.err << "error: " << e.what() << "\n";
        return kExitUsageOrIo;
    }
    Catalog catalog(config.catalog_dir);
    report_load_warnings(catalog, *ctx.err);
    HarvestReport report;
    try {
        report = harvest(catalog, job);
    } catch (const HarvestInProgress& e) {
        *ctx.err << "error: " << e.what() << "\n";
        return kExitDomainFailure;
    }
    if (args.json) {
        *ctx.out << to_json(report).dump(2) << "\n";
    } else {
        for (const auto& o : report.outcomes) {
            *ctx.out << pad(std::string(to_string(o.status)), 12) << " added=" << o.records_added
                     << " updated=" << o.records_updated << " " << o.url;
            if (!o.detail.empty()) *ctx.out << " (" << o.detail << ")";
            *ctx.out << "\n";
            for (const auto& w : o.warnings) *ctx.out << "  warning: " << w << "\n";
        }
        *ctx.out << "total added=" << report.added() << " updated=" << report.updated() << "\n";
    }
    return report.all_ok() ? kExitOk : kExitDomainFailure;
}

struct SearchArgs {
    std::string text;
    std::string mode;
    std::string bbox;
    std::string relation;
    std::string time_start;
    std::string time_end;
    std::vector<std::string> facets;
    std::string page;
    std::string page_size;
    bool json = false;
};

// Builds the same parameter set an HTTP client would send, so CLI and API
// decode queries identically.
QueryParams to_params(const SearchArgs& args) {
    QueryParams params;
    auto put = [&](const char* key, const std::string& value) {
        if (!value.empty()) params.emplace(key, value);
    };
    put("q", args.text);
    put("mode", args.mode);
    put("bbox", args.bbox);
    put("relation", args.relation);
    put("time_start", args.time_start);
    put("time_end", args.time_end);
    put("page", args.page);
    put("page_size", args.page_size);
    for (const auto& f : args.facets) {
        auto eq = f.find('=');
        if (eq == std::string::npos || eq == 0)
            throw InvalidQuery("facet filter must be FIELD=VALUE, got '" + f + "'");
        params.emplace("facet." + f.substr(0, eq), f.substr(eq + 1));
    }
    return params;
}

int cmd_search(const Context& ctx, const SearchArgs& args) {
    auto config = ctx.config();
    SearchQuery query;
    try {
        query = parse_search_params(to_params(args));
    } catch (const InvalidQuery& e) {
        *ctx.err << "error: " << e.what() << "\n";
        return kExitUsageOrIo;
    }
    auto thesaurus = open_thesaurus(config);
    Catalog catalog(config.catalog_dir);
    report_load_warnings(catalog, *ctx.err);
    auto view = catalog.read();
    auto envelope = search_envelope(view, query, thesaurus);
    if (args.json) {
        *ctx.out << render_envelope(envelope) << "\n";
        return kExitOk;
    }
    const auto& results = envelope["results"];
    *ctx.out << "total=" << envelope["total"].get<std::size_t>() << " page=" << query.page
             << " page_size=" << query.page_size << "\n";
    if (results.empty()) return kExitOk;
    *ctx.out << pad("rank", 6) << pad("score", 10) << pad("id", 34) << "title\n";
    std::size_t rank = query.page * query.page_size;
    for (const auto& r : results) {
        *ctx.out << pad(std::to_string(++rank), 6) << pad(format_score(r["score"].get<double>()), 10)
                 << pad(r["id"].get<std::string>(), 34) << r["title"].get<std::string>() << "\n";
    }
    return kExitOk;
}

struct ServeArgs {
    std::optional<std::string> addr;
    std::optional<std::string> ui;
};

int cmd_serve(Context ctx, const ServeArgs& args) {
    if (args.addr) ctx.flags.listen_addr = args.addr;
    auto config = ctx.config();
    auto [host, port] = parse_listen_address(config.listen_addr);
    auto thesaurus = open_thesaurus(config);
    Catalog catalog(config.catalog_dir);
    report_load_warnings(catalog, *ctx.err);

    PortalOptions options;
    options.profile = load_profile(config.profile);
    if (args.ui) options.ui_directory = *args.ui;

    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    PortalServer server(catalog, thesaurus, std::move(options));
    int bound = server.bind(host, port);
    server.start();
    *ctx.out << "listening on " << host << ":" << bound << std::endl;

    int received = 0;
    sigwait(&signals, &received);
    *ctx.err << "stopping on signal " << received << "\n";
    server.stop();
    return kExitOk;
}

}  // namespace

std::optional<std::string> process_env(const std::string& name) {
    if (const char* value = std::getenv(name.c_str())) return std::string(value);
    return std::nullopt;
}

CliConfig resolve_config(const CliOverrides& flags, const EnvLookup& env) {
    CliConfig config;
    auto from_env = [&](const char* name) -> std::optional<std::string> {
        auto v = env(name);
        if (v && v->empty()) return std::nullopt;
        return v;
    };

    if (flags.catalog_dir)
        config.catalog_dir = *flags.catalog_dir;
    else if (auto v = from_env("SDI_CATALOG_DIR"))
        config.catalog_dir = *v;

    fs::path file = config.catalog_dir / "config.json";
    std::error_code ec;
    if (fs::exists(file, ec)) {
        json doc;
        try {
            doc = json::parse(read_file(file));
        } catch (const json::parse_error& e) {
            throw Error(file.string() + ": " + e.what());
        }
        if (!doc.is_object()) throw Error(file.string() + ": expected a JSON object");
        auto str = [&](const char* key) -> std::optional<std::string> {
            if (!doc.contains(key)) return std::nullopt;
            if (!doc[key].is_string()) throw Error(file.string() + ": " + key + " must be a string");
            return doc[key].get<std::string>();
        };
        if (auto v = str("profile")) config.profile = *v;
        if (auto v = str("thesaurus_path")) config.thesaurus_path = *v;
        if (auto v = str("listen_addr")) config.listen_addr = *v;
    }

    if (auto v = from_env("SDI_THESAURUS")) config.thesaurus_path = *v;
    if (auto v = from_env("SDI_ADDR")) config.listen_addr = *v;

    if (flags.profile) config.profile = *flags.profile;
    if (flags.thesaurus_path) config.thesaurus_path = *flags.thesaurus_path;
    if (flags.listen_addr) config.listen_addr = *flags.listen_addr;
    return config;
}

MetadataProfile load_profile(const std::string& name_or_path) {
    if (name_or_path == MetadataProfile::sdi_basic().name()) return MetadataProfile::sdi_basic();
    return MetadataProfile::from_json_text(read_file(name_or_path));
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err,
            const EnvLookup& env) {
    CLI::App app{"Spatial data infrastructure catalog tool", "sdi"};
    app.require_subcommand(1);

    Context ctx;
    ctx.env = &env;
    ctx.out = &out;
    ctx.err = &err;

    std::string catalog_dir, profile, thesaurus;
    app.add_option("--catalog", catalog_dir, "Catalog directory (env SDI_CATALOG_DIR)");
    app.add_option("--profile", profile, "Profile name or profile JSON file");
    app.add_option("--thesaurus", thesaurus, "Thesaurus file (env SDI_THESAURUS)");

    std::vector<std::string> files;
    auto* validate_cmd = app.add_subcommand("validate", "Validate record files against a profile");
    validate_cmd->add_option("files", files, "Record files")->required();

    auto* ingest_cmd = app.add_subcommand("ingest", "Add record files to the catalog");
    ingest_cmd->add_option("files", files, "Record files")->required();

    HarvestArgs harvest_args;
    auto* harvest_cmd = app.add_subcommand("harvest", "Harvest WMS capabilities from seed URLs");
    harvest_cmd->add_option("--seeds", harvest_args.seeds, "File with one URL per line")->required();
    harvest_cmd->add_option("--publisher", harvest_args.publisher, "Publisher label")->required();
    harvest_cmd->add_option("--concurrency", harvest_args.concurrency, "Concurrent fetches (1-64)");
    harvest_cmd->add_option("--delay-ms", harvest_args.delay_ms, "Per-host politeness delay");
    harvest_cmd->add_option("--timeout-ms", harvest_args.timeout_ms, "Per-fetch timeout");
    harvest_cmd->add_flag("--json", harvest_args.json, "Print the report as JSON");

    SearchArgs search_args;
    auto* search_cmd = app.add_subcommand("search", "Query the catalog");
    search_cmd->add_option("query", search_args.text, "Free-text query");
    search_cmd->add_option("--mode", search_args.mode, "keyword or semantic");
    search_cmd->add_option("--bbox", search_args.bbox, "west,south,east,north");
    search_cmd->add_option("--relation", search_args.relation, "intersects or within");
    search_cmd->add_option("--time-start", search_args.time_start, "ISO-8601 UTC instant");
    search_cmd->add_option("--time-end", search_args.time_end, "ISO-8601 UTC instant");
    search_cmd->add_option("--facet", search_args.facets, "FIELD=VALUE filter (repeatable)");
    search_cmd->add_option("--page", search_args.page, "Zero-based page");
    search_cmd->add_option("--page-size", search_args.page_size, "Results per page (1-100)");
    search_cmd->add_flag("--json", search_args.json, "Print the portal search envelope");

    ServeArgs serve_args;
    auto* serve_cmd = app.add_subcommand("serve", "Run the portal HTTP API");
    serve_cmd->add_option("--addr", serve_args.addr, "host:port (env SDI_ADDR)");
    serve_cmd->add_option("--ui", serve_args.ui, "Directory served under /ui/");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        auto* failing = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
        err << "run '" << failing->get_name() << " --help' for usage\n";
        return kExitUsageOrIo;
    }

    if (!catalog_dir.empty()) ctx.flags.catalog_dir = catalog_dir;
    if (!profile.empty()) ctx.flags.profile = profile;
    if (!thesaurus.empty()) ctx.flags.thesaurus_path = thesaurus;

    try {
        if (validate_cmd->parsed()) return cmd_validate(ctx, files);
        if (ingest_cmd->parsed()) return cmd_ingest(ctx, files);
        if (harvest_cmd->parsed()) return cmd_harvest(ctx, harvest_args);
        if (search_cmd->parsed()) return cmd_search(ctx, search_args);
        if (serve_cmd->parsed()) return cmd_serve(ctx, serve_args);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsageOrIo;
    }
    return kExitUsageOrIo;
}

}  // namespace sdi
