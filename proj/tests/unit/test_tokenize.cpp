#include <catch_amalgamated.hpp>

#include <algorithm>

#include "generators.hpp"
#include "sdi/text.hpp"

using namespace sdi;
using V = std::vector<std::string>;

TEST_CASE("golden tokenizations") {
    CHECK(tokenize("Watershed Boundaries") == V{"watershed", "boundarie"});
    CHECK(tokenize("natural disasters") == V{"natural", "disaster"});
    CHECK(tokenize("").empty());
    CHECK(tokenize("   \t\n").empty());
}

TEST_CASE("stop words and short tokens are dropped") {
    CHECK(tokenize("The roads of a city") == V{"road", "city"});
    CHECK(tokenize("x y z 7 ab") == V{"ab"});
}

TEST_CASE("trailing s is stripped only from tokens of four or more code points") {
    CHECK(tokenize("gas bus ways maps") == V{"gas", "bus", "way", "map"});
    CHECK(tokenize("class") == V{"clas"});
}

TEST_CASE("splits on non-alphanumerics and keeps digits") {
    CHECK(tokenize("EPSG:4326, CRS-84/wms_layer") == V{"epsg", "4326", "crs", "84", "wms", "layer"});
}

TEST_CASE("unicode lowercasing") {
    CHECK(tokenize("STRASSE Straße ÅLESUND École") == V{"strasse", "straße", "ålesund", "école"});
    CHECK(tokenize("地図") == V{"地図"});
    CHECK(tokenize("É") == V{});
}

TEST_CASE("invalid utf-8 acts as a separator") {
    CHECK(tokenize("river\xff\xfe" "basin") == V{"river", "basin"});
}

TEST_CASE("the stop list holds 30 sorted entries") {
    auto words = stop_words();
    CHECK(words.size() == 30);
    CHECK(std::is_sorted(words.begin(), words.end()));
    CHECK(std::find(words.begin(), words.end(), "the") != words.end());
}

TEST_CASE("vocabulary words are fixed points of the tokenizer") {
    for (const auto& w : testing::vocabulary()) {
        INFO(w);
        CHECK(tokenize(w) == V{w});
    }
}
