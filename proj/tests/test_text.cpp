#include <doctest.h>

#include "jic/text.hpp"

using namespace jic;

TEST_SUITE("text") {

TEST_CASE("collapse_whitespace normalizes runs and edges") {
    CHECK(collapse_whitespace("  a\t\tb \n c ") == "a b c");
    CHECK(collapse_whitespace("") == "");
    CHECK(collapse_whitespace("word") == "word");
}

TEST_CASE("whitespace token counting") {
    CHECK(count_whitespace_tokens("one two  three") == 3);
    CHECK(count_whitespace_tokens("   ") == 0);
    CHECK(whitespace_tokens("a b").size() == 2);
}

TEST_CASE("metric tokens fold case and strip punctuation in place") {
    auto t = metric_tokens("The CAT, sat!  (on) the mat...");
    REQUIRE(t.size() == 6);
    CHECK(t[0] == "the");
    CHECK(t[1] == "cat");
    CHECK(t[3] == "on");
    CHECK(metric_tokens("!!! ...").empty());
}

TEST_CASE("sentence spans split on terminators followed by whitespace") {
    std::string body = "First one. Second!  Third? and more. Ends without mark";
    auto spans = sentence_spans(body);
    REQUIRE(spans.size() == 5);
    CHECK(body.substr(spans[0].first, spans[0].second - spans[0].first) == "First one.");
    CHECK(body.substr(spans[1].first, spans[1].second - spans[1].first) == "Second!");
    CHECK(body.substr(spans[2].first, spans[2].second - spans[2].first) == "Third?");
    CHECK(body.substr(spans[3].first, spans[3].second - spans[3].first) == "and more.");
    CHECK(body.substr(spans[4].first, spans[4].second - spans[4].first) == "Ends without mark");
}

TEST_CASE("sentence spans keep terminator runs together") {
    auto spans = sentence_spans("Really?! Yes. e.g.notasplit stays.");
    REQUIRE(spans.size() == 3);
}

}  // TEST_SUITE
