#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "sdi/metadata.hpp"
#include "sdi/thesaurus.hpp"

namespace sdi::testing {

using Rng = std::mt19937_64;

inline constexpr std::uint64_t kDefaultSeed = 20240611;

/// Words used for generated text. Every entry tokenizes to itself.
const std::vector<std::string>& vocabulary();

/// Coordinates snapped to a 0.5 degree grid so shared edges are common.
GeoBox random_box(Rng& rng);
/// Like random_box but limited to `max_span` degrees per side.
GeoBox random_small_box(Rng& rng, double max_span);

std::string random_words(Rng& rng, std::size_t min_words, std::size_t max_words);

/// A record valid under sdi-basic with every field populated; ids are
/// "rec-<index>" zero-padded.
MetadataRecord random_record(Rng& rng, std::size_t index);

/// A record exercising the whole value space: unicode text, degenerate
/// boxes, absent optionals, empty lists.
MetadataRecord random_any_record(Rng& rng, std::size_t index);

std::vector<MetadataRecord> random_corpus(Rng& rng, std::size_t count);

/// Random acyclic thesaurus over vocabulary words: broader links only point
/// to concepts with a smaller index.
Thesaurus random_thesaurus(Rng& rng, std::size_t concepts);

}  // namespace sdi::testing
