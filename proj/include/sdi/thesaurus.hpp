#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sdi/error.hpp"

namespace sdi {

/// Concept graph with preferred/alternative labels and broader links.
/// Labels are matched through the tokenizer, so lookups ignore case,
/// punctuation and plural 's'. The broader relation is acyclic.
class Thesaurus {
public:
    class Builder {
    public:
        Builder& add_concept(const std::string& concept_id);
        /// Throws Error if the concept already has a different preferred label.
        Builder& set_pref_label(const std::string& concept_id, const std::string& label);
        Builder& add_alt_label(const std::string& concept_id, const std::string& label);
        Builder& add_broader(const std::string& concept_id, const std::string& broader_id);
        /// Throws Error on a broader cycle or a label without searchable tokens.
        Thesaurus build() &&;

    private:
        std::set<std::string> concepts_;
        std::map<std::string, std::string> pref_;
        std::map<std::string, std::set<std::string>> alt_;
        std::map<std::string, std::set<std::string>> broader_;
    };

    Thesaurus() = default;

    /// Tab-separated assertions, one per line:
    ///   concept <TAB> prefLabel <TAB> label
    ///   concept <TAB> altLabel  <TAB> label
    ///   concept <TAB> broader   <TAB> concept
    /// Blank lines and lines starting with '#' are ignored. Throws ParseError
    /// for malformed lines and Error for cycles.
    static Thesaurus parse(std::string_view text);
    static Thesaurus load(const std::filesystem::path& path);

    bool empty() const noexcept { return concepts_.empty(); }
    const std::set<std::string>& concepts() const noexcept { return concepts_; }
    std::optional<std::string> pref_label(const std::string& concept_id) const;
    std::set<std::string> alt_labels(const std::string& concept_id) const;
    std::set<std::string> broader(const std::string& concept_id) const;
    std::set<std::string> narrower(const std::string& concept_id) const;

    /// Concepts carrying `label` as preferred or alternative label.
    std::set<std::string> lookup(std::string_view label) const;

    /// Concepts whose label token sequence occurs contiguously in `tokens`.
    std::set<std::string> match(std::span<const std::string> tokens) const;

    /// Token sets of all labels of a concept, preferred label first.
    std::vector<std::vector<std::string>> label_tokens(const std::string& concept_id) const;

private:
    std::set<std::string> concepts_;
    std::map<std::string, std::string> pref_;
    std::map<std::string, std::set<std::string>> alt_;
    std::map<std::string, std::set<std::string>> broader_;
    std::map<std::string, std::set<std::string>> narrower_;
    std::map<std::vector<std::string>, std::set<std::string>> label_index_;
    std::size_t longest_label_ = 0;
};

/// Term -> weight in (0, 1].
using WeightedTerms = std::map<std::string, double>;

inline constexpr double kExpansionDecay = 0.8;
inline constexpr unsigned kDefaultExpansionDepth = 2;

/// Original tokens at 1.0. With depth >= 1, every label of a matched
/// concept at decay (synonyms count as one hop), and every label of a
/// concept d narrower-hops below a matched concept at decay^d for
/// d <= depth. Broader concepts are never added. Duplicates keep the max.
WeightedTerms expand_query(std::span<const std::string> tokens, const Thesaurus& thesaurus,
                           unsigned depth, double decay = kExpansionDecay);

}  // namespace sdi
