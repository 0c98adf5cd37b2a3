#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "jic/metrics.hpp"
#include "jic/text.hpp"

using namespace jic;

TEST_SUITE("metrics") {

TEST_CASE("bleu: perfect match scores 1") {
    CHECK(bleu("The quick brown fox jumps over it", {"the quick brown fox jumps over it"}) ==
          doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("bleu: disjoint vocabulary collapses under smoothing") {
    CHECK(bleu("alpha beta gamma delta", {"one two three four"}) < 1e-3);
}

TEST_CASE("bleu: hand-computed fixture") {
    // p1=4/5 p2=3/4 p3=2/3 p4=1/2, equal lengths so BP=1:
    // (4/5 * 3/4 * 2/3 * 1/2)^(1/4) = 0.2^(1/4)
    double expected = 0.668740304976422;
    CHECK(bleu("the quick brown fox jumps", {"the quick brown fox leaps"}) ==
          doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("bleu: brevity penalty punishes short candidates") {
    double cropped = bleu("the quick brown fox", {"the quick brown fox jumps over the lazy dog"});
    double full = bleu("the quick brown fox jumps over the lazy dog",
                       {"the quick brown fox jumps over the lazy dog"});
    CHECK(cropped < full);
    CHECK_THROWS_AS(bleu("", {"ref"}), ArgumentError);
    CHECK_THROWS_AS(bleu("cand", std::vector<std::string>{""}), ArgumentError);
}

TEST_CASE("bleu: case folding is invisible through the shared tokenizer") {
    CHECK(bleu("The Quick Brown FOX jumps", {"the quick brown fox jumps"}) ==
          doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("meteor: identical strings score exactly 1") {
    CHECK(meteor("the cat sat on the mat", "the cat sat on the mat") == 1.0);
}

TEST_CASE("meteor: zero matches score 0") {
    CHECK(meteor("alpha beta gamma", "one two three") == 0.0);
}

TEST_CASE("meteor: hand-traced fixture") {
    // m=5, P=R=5/6, F=5/6 at alpha=0.9; alignment (0,1,3,4,5) -> 2 chunks;
    // penalty = 0.5*(2/5)^3 = 0.032 ; score = 5/6 * 0.968 = 121/150
    CHECK(meteor("the cat sat on the mat", "the cat is on the mat") ==
          doctest::Approx(121.0 / 150.0).epsilon(1e-12));
}

TEST_CASE("rouge: identical and disjoint extremes") {
    auto same = rouge("a small example sentence", "a small example sentence");
    CHECK(same.rouge1 == doctest::Approx(1.0));
    CHECK(same.rouge2 == doctest::Approx(1.0));
    CHECK(same.rougeL == doctest::Approx(1.0));
    auto none = rouge("alpha beta gamma", "one two three");
    CHECK(none.rouge1 == 0.0);
    CHECK(none.rouge2 == 0.0);
    CHECK(none.rougeL == 0.0);
}

TEST_CASE("rouge: hand-computed fixture") {
    // unigram overlap 5 -> P=R=5/6 ; bigram overlap 3 of 5 -> 3/5 ;
    // LCS "the cat on the mat" = 5 -> 5/6
    auto r = rouge("the cat sat on the mat", "the cat is on the mat");
    CHECK(r.rouge1 == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
    CHECK(r.rouge2 == doctest::Approx(3.0 / 5.0).epsilon(1e-12));
    CHECK(r.rougeL == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("embed_score: identical token sequences reach f1 1") {
    HashingEmbeddingClient embed(32, 5);
    auto s = embed_score("running through the park", "running through the park", embed);
    CHECK(s.f1 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("embed_score: single differing tokens degenerate to their cosine") {
    HashingEmbeddingClient embed(32, 5);
    auto s = embed_score("cat", "dog", embed);
    auto va = embed.embed("cat");
    auto vb = embed.embed("dog");
    double expected = std::max(0.0, va.dot(vb) / (va.norm() * vb.norm()));
    CHECK(s.precision == doctest::Approx(expected).epsilon(1e-12));
    CHECK(s.recall == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("embed_score: agrees with a brute-force matching oracle") {
    HashingEmbeddingClient embed(24, 5);
    std::string cand = "the storm broke over the harbor at dawn";
    std::string ref = "a storm crossed the harbor before dawn";
    auto s = embed_score(cand, ref, embed);

    auto ct = metric_tokens(cand);
    auto rt = metric_tokens(ref);
    auto cv = embed.embed_batch(ct);
    auto rv = embed.embed_batch(rt);
    auto cos = [](const Embedding& x, const Embedding& y) {
        return x.dot(y) / (x.norm() * y.norm());
    };
    double p = 0;
    for (const auto& c : cv) {
        double best = -2;
        for (const auto& r : rv) best = std::max(best, cos(c, r));
        p += best;
    }
    p /= static_cast<double>(cv.size());
    double r = 0;
    for (const auto& x : rv) {
        double best = -2;
        for (const auto& c : cv) best = std::max(best, cos(x, c));
        r += best;
    }
    r /= static_cast<double>(rv.size());
    p = std::max(0.0, p);
    r = std::max(0.0, r);
    CHECK(s.precision == doctest::Approx(p).epsilon(1e-12));
    CHECK(s.recall == doctest::Approx(r).epsilon(1e-12));
    CHECK(s.f1 == doctest::Approx(2 * p * r / (p + r)).epsilon(1e-12));
}

TEST_CASE("average_score: reproduces the published row averages") {
    auto r1 = average_score(0.3062, 0.2945, 0.5651, 0.2989, 0.1308, 0.2676);
    CHECK(std::abs(r1.average - 0.3105) < 5e-5);
    auto r2 = average_score(0.2967, 0.2826, 0.5587, 0.2878, 0.1210, 0.2576);
    CHECK(std::abs(r2.average - 0.3007) < 5e-5);
    auto r3 = average_score(0.2665, 0.2451, 0.5334, 0.2468, 0.0813, 0.2146);
    CHECK(std::abs(r3.average - 0.2646) < 5e-5);

    CHECK(average_score(0, 0, 0, 0, 0, 0).average == 0.0);
    CHECK(average_score(1, 1, 1, 1, 1, 1).average == 1.0);
    CHECK_THROWS_AS(average_score(0.1, std::nan(""), 0.2, 0.3, 0.4, 0.5), ArgumentError);
}

TEST_CASE("metric ranges hold over random inputs") {
    SplitMix64 rng(77);
    const char* words[] = {"sun", "rain", "walk", "work", "tea", "song", "road", "night"};
    HashingEmbeddingClient embed(16, 2);
    for (int trial = 0; trial < 30; ++trial) {
        auto sentence = [&](size_t len) {
            std::string out;
            for (size_t i = 0; i < len; ++i) {
                if (i) out += " ";
                out += words[rng.bounded(8)];
            }
            return out;
        };
        std::string cand = sentence(1 + rng.bounded(12));
        std::string ref = sentence(1 + rng.bounded(12));
        double b = bleu(cand, {ref});
        double m = meteor(cand, ref);
        auto r = rouge(cand, ref);
        auto e = embed_score(cand, ref, embed);
        for (double v : {b, m, r.rouge1, r.rouge2, r.rougeL, e.f1}) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0 + 1e-12);
        }
    }
}

TEST_CASE("agreement: perfect inputs return (1, 1, 0, 1)") {
    std::vector<double> a{1, 2, 3, 4, 5, 6};
    auto r = agreement(a, a);
    CHECK(r.pearson == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.spearman == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.mae == 0.0);
    CHECK(r.icc == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("agreement: reversed ranking gives spearman -1") {
    std::vector<double> a{1, 2, 3, 4, 5};
    std::vector<double> b{9, 7, 5, 3, 1};
    CHECK(spearman_correlation(a, b) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("agreement: six-item three-rater fixture matches closed forms") {
    // items x raters matrix; closed-form values computed independently by
    // exact rational ANOVA arithmetic:
    //   MSR = 38/9, MSC = 19/18, MSE = 11/90
    //   ICC(2,3) = 369/394 ; ICC(2,1) = 123/148
    //   pearson(col0,col1) = 7/sqrt(55) ; mae = 1/2
    Eigen::MatrixXd m(6, 3);
    m << 4, 4, 5,
         3, 3, 4,
         2, 3, 3,
         5, 5, 5,
         1, 2, 2,
         3, 4, 4;
    std::vector<double> a{4, 3, 2, 5, 1, 3};
    std::vector<double> b{4, 3, 3, 5, 2, 4};

    auto r = agreement(a, b, &m);
    CHECK(r.pearson == doctest::Approx(7.0 / std::sqrt(55.0)).epsilon(1e-9));
    CHECK(r.spearman == doctest::Approx(0.9254762227411248).epsilon(1e-9));
    CHECK(r.mae == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r.icc == doctest::Approx(369.0 / 394.0).epsilon(1e-9));

    CHECK(icc_two_way_random(m, IccForm::single_measure) ==
          doctest::Approx(123.0 / 148.0).epsilon(1e-9));
}

TEST_CASE("agreement: degenerate inputs name the offender") {
    std::vector<double> flat{2, 2, 2, 2};
    std::vector<double> vary{1, 2, 3, 4};
    try {
        agreement(flat, vary);
        FAIL("expected ArgumentError");
    } catch (const ArgumentError& ex) {
        CHECK(std::string(ex.what()).find("scores_a") != std::string::npos);
    }
    CHECK_THROWS_AS(agreement(vary, std::vector<double>{1, 2}), ArgumentError);
}

TEST_CASE("dataset_stats: hand-counted two-dialogue fixture") {
    HashingEmbeddingClient embed(32, 4);
    // dialogue 1: 16 utterances of 3 words; dialogue 2: 16 of 5 words
    auto d1 = jt::make_dialogue(16, "d1", "one two");         // "one two number N" = 4 words
    auto d2 = jt::make_dialogue(16, "d2", "one two three");   // 5 words
    DatasetStats s = dataset_stats({d1, d2}, embed);
    CHECK(s.n_conversations == 2);
    CHECK(s.total_utterances == 32);
    CHECK(s.total_turns == 16);
    CHECK(s.avg_turns == 8.0);
    CHECK(s.avg_utterances_per_conv == 16.0);
    CHECK(s.avg_words_per_utterance == doctest::Approx((16 * 4 + 16 * 5) / 32.0));
    CHECK(s.avg_conv_length_words == doctest::Approx((16 * 4 + 16 * 5) / 2.0));
    CHECK(s.longest_conv_words == 16 * 5);
    CHECK(s.shortest_conv_words == 16 * 4);
    CHECK(s.longest_conv_utterances == 16);
    CHECK(s.shortest_conv_utterances == 16);
    // total_turns = total_utterances / 2 for alternating dialogues
    CHECK(s.total_turns * 2 == s.total_utterances);
}

TEST_CASE("dataset_stats: identical utterances give consistency and similarity 1") {
    HashingEmbeddingClient embed(32, 4);
    Dialogue d;
    d.dialogue_id = "same";
    for (int i = 0; i < 16; ++i) {
        Utterance u;
        u.role = (i % 2 == 0) ? Role::user : Role::assistant;
        u.text = "the very same sentence";
        d.utterances.push_back(u);
    }
    DatasetStats s = dataset_stats({d}, embed);
    CHECK(s.avg_topic_consistency == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.avg_semantic_similarity == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(dataset_stats({}, embed), ArgumentError);
}

}  // TEST_SUITE
