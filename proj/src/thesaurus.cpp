#include "sdi/thesaurus.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <sstream>

#include "sdi/text.hpp"

namespace sdi {

namespace {

std::string strip(std::string_view s) {
    auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_tabs(std::string_view line) {
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (true) {
        auto tab = line.find('\t', pos);
        parts.push_back(strip(line.substr(pos, tab == std::string_view::npos ? line.npos : tab - pos)));
        if (tab == std::string_view::npos) break;
        pos = tab + 1;
    }
    return parts;
}

}  // namespace

// --- Builder ------------------------------------------------------------------

Thesaurus::Builder& Thesaurus::Builder::add_concept(const std::string& concept_id) {
    concepts_.insert(concept_id);
    return *this;
}

Thesaurus::Builder& Thesaurus::Builder::set_pref_label(const std::string& concept_id,
                                                       const std::string& label) {
    add_concept(concept_id);
    auto [it, inserted] = pref_.emplace(concept_id, label);
    if (!inserted && it->second != label)
        throw Error("concept " + concept_id + " already has preferred label '" + it->second +
                    "'");
    return *this;
}

Thesaurus::Builder& Thesaurus::Builder::add_alt_label(const std::string& concept_id,
                                                      const std::string& label) {
    add_concept(concept_id);
    alt_[concept_id].insert(label);
    return *this;
}

Thesaurus::Builder& Thesaurus::Builder::add_broader(const std::string& concept_id,
                                                    const std::string& broader_id) {
    add_concept(concept_id);
    add_concept(broader_id);
    broader_[concept_id].insert(broader_id);
    return *this;
}

Thesaurus Thesaurus::Builder::build() && {
    // Three-colour DFS over broader edges.
    std::map<std::string, int> colour;
    std::vector<std::string> path;
    auto visit = [&](auto&& self, const std::string& c) -> void {
        colour[c] = 1;
        path.push_back(c);
        if (auto it = broader_.find(c); it != broader_.end()) {
            for (const auto& b : it->second) {
                int state = colour[b];
                if (state == 1) {
                    auto from = std::find(path.begin(), path.end(), b);
                    std::string cycle;
                    for (auto p = from; p != path.end(); ++p) cycle += *p + " -> ";
                    throw Error("broader relation has a cycle: " + cycle + b);
                }
                if (state == 0) self(self, b);
            }
        }
        path.pop_back();
        colour[c] = 2;
    };
    for (const auto& c : concepts_)
        if (colour[c] == 0) visit(visit, c);

    Thesaurus t;
    auto index_label = [&](const std::string& concept_id, const std::string& label) {
        auto tokens = tokenize(label);
        if (tokens.empty())
            throw Error("label '" + label + "' of concept " + concept_id +
                        " has no searchable tokens");
        t.longest_label_ = std::max(t.longest_label_, tokens.size());
        t.label_index_[std::move(tokens)].insert(concept_id);
    };
    for (const auto& [c, label] : pref_) index_label(c, label);
    for (const auto& [c, labels] : alt_)
        for (const auto& label : labels) index_label(c, label);
    for (const auto& [c, bs] : broader_)
        for (const auto& b : bs) t.narrower_[b].insert(c);

    t.concepts_ = std::move(concepts_);
    t.pref_ = std::move(pref_);
    t.alt_ = std::move(alt_);
    t.broader_ = std::move(broader_);
    return t;
}

// --- Thesaurus ----------------------------------------------------------------

Thesaurus Thesaurus::parse(std::string_view text) {
    Builder builder;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;

        std::string trimmed = strip(line);
        if (trimmed.empty() || trimmed.front() == '#') continue;
        auto parts = split_tabs(line);
        if (parts.size() != 3 || parts[0].empty() || parts[2].empty())
            throw ParseError("expected 'concept<TAB>relation<TAB>value'", line_no, 1);
        try {
            const auto& relation = parts[1];
            if (relation == "prefLabel") {
                builder.set_pref_label(parts[0], parts[2]);
            } else if (relation == "altLabel") {
                builder.add_alt_label(parts[0], parts[2]);
            } else if (relation == "broader") {
                builder.add_broader(parts[0], parts[2]);
            } else {
                throw ParseError("unknown relation '" + relation +
                                     "' (expected prefLabel, altLabel or broader)",
                                 line_no, parts[0].size() + 2);
            }
        } catch (const ParseError&) {
            throw;
        } catch (const Error& e) {
            throw ParseError(e.what(), line_no, 1);
        }
    }
    return std::move(builder).build();
}

Thesaurus Thesaurus::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read thesaurus " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

std::optional<std::string> Thesaurus::pref_label(const std::string& concept_id) const {
    auto it = pref_.find(concept_id);
    if (it == pref_.end()) return std::nullopt;
    return it->second;
}

std::set<std::string> Thesaurus::alt_labels(const std::string& concept_id) const {
    auto it = alt_.find(concept_id);
    return it == alt_.end() ? std::set<std::string>{} : it->second;
}

std::set<std::string> Thesaurus::broader(const std::string& concept_id) const {
    auto it = broader_.find(concept_id);
    return it == broader_.end() ? std::set<std::string>{} : it->second;
}

std::set<std::string> Thesaurus::narrower(const std::string& concept_id) const {
    auto it = narrower_.find(concept_id);
    return it == narrower_.end() ? std::set<std::string>{} : it->second;
}

std::set<std::string> Thesaurus::lookup(std::string_view label) const {
    auto it = label_index_.find(tokenize(label));
    return it == label_index_.end() ? std::set<std::string>{} : it->second;
}

std::set<std::string> Thesaurus::match(std::span<const std::string> tokens) const {
    std::set<std::string> found;
    std::vector<std::string> window;
    for (std::size_t start = 0; start < tokens.size(); ++start) {
        window.clear();
        for (std::size_t len = 1; len <= longest_label_ && start + len <= tokens.size(); ++len) {
            window.push_back(tokens[start + len - 1]);
            if (auto it = label_index_.find(window); it != label_index_.end())
                found.insert(it->second.begin(), it->second.end());
        }
    }
    return found;
}

std::vector<std::vector<std::string>> Thesaurus::label_tokens(const std::string& concept_id) const {
    std::vector<std::vector<std::string>> out;
    if (auto p = pref_label(concept_id)) out.push_back(tokenize(*p));
    for (const auto& alt : alt_labels(concept_id)) out.push_back(tokenize(alt));
    return out;
}

WeightedTerms expand_query(std::span<const std::string> tokens, const Thesaurus& thesaurus,
                           unsigned depth, double decay) {
    WeightedTerms terms;
    auto offer = [&](const std::string& term, double weight) {
        auto [it, inserted] = terms.emplace(term, weight);
        if (!inserted && weight > it->second) it->second = weight;
    };
    for (const auto& t : tokens) offer(t, 1.0);
    if (depth == 0 || thesaurus.empty()) return terms;

    // Breadth-first over narrower links; hop 1 covers the matched concepts'
    // own labels as well as their direct narrower concepts.
    std::map<std::string, unsigned> hops;
    std::deque<std::string> queue;
    for (const auto& c : thesaurus.match(tokens)) {
        hops.emplace(c, 0);
        queue.push_back(c);
    }
    while (!queue.empty()) {
        std::string c = queue.front();
        queue.pop_front();
        unsigned h = hops[c];
        if (h >= depth) continue;
        for (const auto& n : thesaurus.narrower(c)) {
            if (hops.emplace(n, h + 1).second) queue.push_back(n);
        }
    }
    for (const auto& [c, h] : hops) {
        double weight = 1.0;
        for (unsigned i = 0; i < std::max(h, 1u); ++i) weight *= decay;
        for (const auto& label : thesaurus.label_tokens(c))
            for (const auto& term : label) offer(term, weight);
    }
    return terms;
}

}  // namespace sdi
