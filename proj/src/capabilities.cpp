#include "sdi/capabilities.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <openssl/evp.h>

namespace sdi {

namespace pt = boost::property_tree;

namespace {

constexpr std::string_view kAttrs = "<xmlattr>";

std::string_view local_name(std::string_view name) {
    auto colon = name.rfind(':');
    return colon == std::string_view::npos ? name : name.substr(colon + 1);
}

std::string trimmed(std::string_view s) {
    auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

const pt::ptree* find_element(const pt::ptree& node, std::string_view name) {
    for (const auto& [key, child] : node) {
        if (key == kAttrs) continue;
        if (local_name(key) == name) return &child;
        if (const auto* found = find_element(child, name)) return found;
    }
    return nullptr;
}

const pt::ptree* child(const pt::ptree& node, std::string_view name) {
    for (const auto& [key, c] : node)
        if (local_name(key) == name) return &c;
    return nullptr;
}

double parse_number(std::string_view raw, const std::string& element) {
    std::string text = trimmed(raw);
    double value = 0.0;
    const char* begin = text.data();
    const char* end = text.data() + text.size();
    if (!text.empty() && *begin == '+') ++begin;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (text.empty() || ec != std::errc() || ptr != end)
        throw CapabilitiesError(CapabilitiesError::Kind::numeric,
                                element + ": not a decimal number: '" + text + "'");
    return value;
}

double child_number(const pt::ptree& node, std::string_view name, const std::string& context) {
    const pt::ptree* c = child(node, name);
    std::string element = context + "/" + std::string(name);
    if (!c)
        throw CapabilitiesError(CapabilitiesError::Kind::structure,
                                "missing mandatory element " + element);
    return parse_number(c->data(), element);
}

double attribute_number(const pt::ptree& attrs, const char* name, const std::string& context) {
    auto value = attrs.get_optional<std::string>(name);
    std::string element = context + "@" + name;
    if (!value)
        throw CapabilitiesError(CapabilitiesError::Kind::structure,
                                "missing mandatory attribute " + element);
    return parse_number(*value, element);
}

void require_valid(const GeoBox& box, const std::string& context) {
    auto violations = box_violations(box, context);
    if (!violations.empty())
        throw CapabilitiesError(CapabilitiesError::Kind::structure,
                                violations.front().field + ": " + violations.front().message);
}

void add_crs(std::vector<std::string>& list, std::string crs) {
    if (!crs.empty() && std::find(list.begin(), list.end(), crs) == list.end())
        list.push_back(std::move(crs));
}

LayerDescription parse_layer(const pt::ptree& node, std::vector<std::string>& warnings) {
    LayerDescription layer;
    std::string name;
    for (const auto& [key, c] : node) {
        auto tag = local_name(key);
        if (tag == "Title") {
            layer.title = trimmed(c.data());
        } else if (tag == "Name") {
            name = trimmed(c.data());
        } else if (tag == "CRS" || tag == "SRS") {
            add_crs(layer.crs_list, trimmed(c.data()));
        } else if (tag == "EX_GeographicBoundingBox") {
            const std::string ctx = "EX_GeographicBoundingBox";
            GeoBox box;
            box.west = child_number(c, "westBoundLongitude", ctx);
            box.east = child_number(c, "eastBoundLongitude", ctx);
            box.south = child_number(c, "southBoundLatitude", ctx);
            box.north = child_number(c, "northBoundLatitude", ctx);
            require_valid(box, ctx);
            layer.geographic_bbox = box;
        } else if (tag == "LatLonBoundingBox") {
            const std::string ctx = "LatLonBoundingBox";
            const pt::ptree* attrs = child(c, kAttrs);
            if (!attrs)
                throw CapabilitiesError(CapabilitiesError::Kind::structure,
                                        "LatLonBoundingBox without attributes");
            GeoBox box;
            box.west = attribute_number(*attrs, "minx", ctx);
            box.south = attribute_number(*attrs, "miny", ctx);
            box.east = attribute_number(*attrs, "maxx", ctx);
            box.north = attribute_number(*attrs, "maxy", ctx);
            require_valid(box, ctx);
            if (!layer.geographic_bbox) layer.geographic_bbox = box;
        } else if (tag == "BoundingBox") {
            const pt::ptree* attrs = child(c, kAttrs);
            if (!attrs)
                throw CapabilitiesError(CapabilitiesError::Kind::structure,
                                        "BoundingBox without attributes");
            CrsBoundingBox bb;
            auto crs = attrs->get_optional<std::string>("CRS");
            if (!crs) crs = attrs->get_optional<std::string>("SRS");
            if (!crs)
                throw CapabilitiesError(CapabilitiesError::Kind::structure,
                                        "missing mandatory attribute BoundingBox@CRS");
            bb.crs = trimmed(*crs);
            const std::string ctx = "BoundingBox[CRS=" + bb.crs + "]";
            bb.minx = attribute_number(*attrs, "minx", ctx);
            bb.miny = attribute_number(*attrs, "miny", ctx);
            bb.maxx = attribute_number(*attrs, "maxx", ctx);
            bb.maxy = attribute_number(*attrs, "maxy", ctx);
            layer.crs_bboxes.push_back(std::move(bb));
        } else if (tag == "Style") {
            warnings.push_back("skipped <Style> in layer '" + layer.title + "'");
        }
    }
    for (const auto& bb : layer.crs_bboxes) {
        if (std::find(layer.crs_list.begin(), layer.crs_list.end(), bb.crs) ==
            layer.crs_list.end()) {
            warnings.push_back("BoundingBox CRS " + bb.crs + " not declared as <CRS>; added");
            layer.crs_list.push_back(bb.crs);
        }
    }
    if (layer.title.empty() && !name.empty()) layer.title = name;
    return layer;
}

void inherit(LayerDescription& child_layer, const LayerDescription& parent) {
    std::vector<std::string> crs = parent.crs_list;
    for (auto& c : child_layer.crs_list) add_crs(crs, c);
    child_layer.crs_list = std::move(crs);
    if (!child_layer.geographic_bbox) child_layer.geographic_bbox = parent.geographic_bbox;
    for (const auto& bb : parent.crs_bboxes) {
        auto same = [&](const CrsBoundingBox& own) { return own.crs == bb.crs; };
        if (std::none_of(child_layer.crs_bboxes.begin(), child_layer.crs_bboxes.end(), same))
            child_layer.crs_bboxes.push_back(bb);
    }
}

void collect_layers(const pt::ptree& capability, ServiceDescription& service) {
    for (const auto& [key, node] : capability) {
        if (local_name(key) != "Layer") continue;
        LayerDescription parent = parse_layer(node, service.warnings);
        service.layers.push_back(parent);
        for (const auto& [child_key, child_node] : node) {
            if (local_name(child_key) != "Layer") continue;
            LayerDescription sub = parse_layer(child_node, service.warnings);
            inherit(sub, parent);
            for (const auto& [grand_key, grand] : child_node) {
                (void)grand;
                if (local_name(grand_key) == "Layer")
                    service.warnings.push_back("skipped layer nested below '" + sub.title +
                                               "' (more than one level deep)");
            }
            service.layers.push_back(std::move(sub));
        }
    }
}

std::optional<Operation> known_operation(std::string_view name) {
    for (auto op : {Operation::GetCapabilities, Operation::GetMap, Operation::GetFeatureInfo,
                    Operation::GetStyles})
        if (to_string(op) == name) return op;
    return std::nullopt;
}

}  // namespace

std::string_view to_string(Operation op) {
    switch (op) {
        case Operation::GetCapabilities: return "GetCapabilities";
        case Operation::GetMap: return "GetMap";
        case Operation::GetFeatureInfo: return "GetFeatureInfo";
        case Operation::GetStyles: return "GetStyles";
    }
    return "";
}

ServiceDescription parse_capabilities(std::string_view xml, std::string source_url) {
    pt::ptree doc;
    try {
        std::istringstream in{std::string(xml)};
        pt::read_xml(in, doc, pt::xml_parser::no_comments);
    } catch (const pt::xml_parser_error& e) {
        throw CapabilitiesError(CapabilitiesError::Kind::xml_syntax,
                                "XML syntax error at line " + std::to_string(e.line()) + ": " +
                                    e.message(),
                                e.line());
    }

    const pt::ptree* capability = find_element(doc, "Capability");
    if (!capability)
        throw CapabilitiesError(CapabilitiesError::Kind::structure, "no <Capability> element");

    ServiceDescription service;
    service.source_url = std::move(source_url);

    if (const pt::ptree* request = child(*capability, "Request")) {
        for (const auto& [key, node] : *request) {
            (void)node;
            if (key == kAttrs) continue;
            auto name = local_name(key);
            if (auto op = known_operation(name)) {
                service.operations.insert(*op);
            } else {
                service.other_operations.emplace_back(name);
            }
        }
    }
    if (service.operations.empty() && service.other_operations.empty())
        throw CapabilitiesError(CapabilitiesError::Kind::structure,
                                "<Capability> advertises no operations under <Request>");

    if (child(*capability, "Exception"))
        service.warnings.push_back("skipped <Exception> formats");

    collect_layers(*capability, service);
    return service;
}

GeoBox geographic_extent(const LayerDescription& layer) {
    if (layer.geographic_bbox) return *layer.geographic_bbox;
    auto find = [&](std::string_view crs) -> const CrsBoundingBox* {
        for (const auto& bb : layer.crs_bboxes)
            if (bb.crs == crs) return &bb;
        return nullptr;
    };
    if (const auto* bb = find("CRS:84")) return GeoBox{bb->minx, bb->maxx, bb->miny, bb->maxy};
    // EPSG:4326 boxes in capabilities are latitude-first.
    if (const auto* bb = find("EPSG:4326")) return GeoBox{bb->miny, bb->maxy, bb->minx, bb->maxx};
    throw NoExtentError("layer '" + layer.title + "' has no geographic extent");
}

std::string layer_record_id(std::string_view source_url, std::string_view layer_title) {
    std::string input;
    input.reserve(source_url.size() + layer_title.size() + 1);
    input.append(source_url).append("|").append(layer_title);

    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(input.data(), input.size(), digest, &length, EVP_md5(), nullptr) != 1 ||
        length != 16)
        throw Error("record id digest failed");

    static constexpr char kHex[] = "0123456789abcdef";
    std::string hex;
    hex.reserve(32);
    for (unsigned int i = 0; i < length; ++i) {
        hex.push_back(kHex[digest[i] >> 4]);
        hex.push_back(kHex[digest[i] & 0x0f]);
    }
    return hex;
}

MetadataRecord layer_to_record(const ServiceDescription& service, const LayerDescription& layer,
                               std::string publisher) {
    MetadataRecord record;
    record.bbox = geographic_extent(layer);
    record.id = layer_record_id(service.source_url, layer.title);
    record.resource_type = ResourceType::service;
    record.title = layer.title.empty() ? "Untitled layer" : layer.title;
    record.abstract = "Layer '" + record.title + "' served by " + service.source_url;
    record.crs_list = layer.crs_list;
    record.publisher = std::move(publisher);
    record.access_endpoints.push_back({"WMS", service.source_url});
    return record;
}

}  // namespace sdi
