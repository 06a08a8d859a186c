#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "styleobf/metrics.hpp"

using namespace styleobf;

namespace {

Sentence words(std::initializer_list<const char*> ws) {
    Sentence s;
    for (const char* w : ws) s.emplace_back(w);
    return s;
}

}  // namespace

TEST_CASE("clipped n-gram precision") {
    SUBCASE("repeated candidate unigrams are clipped to the reference count") {
        auto c = words({"the", "the", "the", "the", "the", "the", "the"});
        auto r = words({"the", "cat", "is", "on", "the", "mat"});
        PrecisionStats p = clipped_precision({c}, {r}, 1);
        CHECK(p.matches == 2);
        CHECK(p.total == 7);
    }
    SUBCASE("identical sentences match fully at every order") {
        auto s = words({"a", "b", "c", "d", "e"});
        for (int n = 1; n <= 4; ++n) {
            PrecisionStats p = clipped_precision({s}, {s}, n);
            CHECK(p.matches == p.total);
            CHECK(p.total == 6 - n);
        }
    }
    SUBCASE("counts accumulate over the corpus") {
        auto a = words({"x", "y"});
        auto b = words({"x", "z"});
        PrecisionStats p = clipped_precision({a, a}, {a, b}, 1);
        CHECK(p.total == 4);
        CHECK(p.matches == 3);  // 2 from the first pair, 1 from the second
    }
}

TEST_CASE("corpus BLEU-4") {
    SUBCASE("an identical corpus scores 100") {
        auto s = words({"the", "quick", "brown", "fox", "jumps"});
        auto t = words({"over", "the", "lazy", "dog", "today"});
        CHECK(bleu4({s, t}, {s, t}) == doctest::Approx(100.0).epsilon(1e-9));
    }
    SUBCASE("any zero precision gives zero without smoothing") {
        auto c = words({"a", "b", "c", "d"});
        auto r = words({"a", "x", "c", "y"});  // no matching 2-grams
        CHECK(bleu4({c}, {r}) == 0.0);
        CHECK(bleu4({c}, {r}, true) > 0.0);
    }
    SUBCASE("the brevity penalty is exp(1 - r/c) for short candidates") {
        auto r = words({"a", "b", "c", "d", "e", "f", "g", "h"});
        auto c = words({"a", "b", "c", "d"});  // all precisions are 1
        CHECK(bleu4({c}, {r}) ==
              doctest::Approx(100.0 * std::exp(1.0 - 2.0)).epsilon(1e-9));
    }
    SUBCASE("candidates longer than the reference take no penalty") {
        auto r = words({"a", "b", "c", "d", "e"});
        CHECK(bleu4({r}, {r}) == doctest::Approx(100.0));
    }
    SUBCASE("mismatched corpus sizes throw") {
        auto s = words({"a"});
        CHECK_THROWS_AS(bleu4({s, s}, {s}), std::invalid_argument);
    }
}

TEST_CASE("Porter stemming") {
    CHECK(porter_stem("cats") == "cat");
    CHECK(porter_stem("running") == "run");
    CHECK(porter_stem("agreed") == "agre");
    CHECK(porter_stem("happiness") == "happi");
    CHECK(porter_stem("sky") == "sky");
}

TEST_CASE("unigram-alignment score") {
    SUBCASE("an identical 4-token sentence scores 99.21875") {
        auto s = words({"the", "cat", "sat", "down"});
        // P = R = F = 1, one chunk of four: penalty = 0.5 * (1/4)^3
        CHECK(meteor_lite(s, s) == doctest::Approx(99.21875).epsilon(1e-9));
    }
    SUBCASE("zero overlap scores zero") {
        CHECK(meteor_lite(words({"a", "b"}), words({"x", "y"})) == 0.0);
    }
    SUBCASE("the stemmed stage matches inflected forms") {
        // single stem match: F = 1, one chunk of one: penalty = 0.5
        CHECK(meteor_lite(words({"cats"}), words({"cat"})) ==
              doctest::Approx(50.0).epsilon(1e-9));
    }
    SUBCASE("scattered matches are penalized against contiguous ones") {
        auto ref = words({"a", "b", "c", "d"});
        double contiguous = meteor_lite(words({"a", "b", "c", "d"}), ref);
        double scattered = meteor_lite(words({"a", "x", "c", "y"}), ref);
        CHECK(contiguous > scattered);
    }
    SUBCASE("the corpus score averages sentence scores") {
        auto a = words({"p", "q"});
        auto b = words({"r", "s"});
        double mean = 0.5 * (meteor_lite(a, a) + meteor_lite(b, words({"r", "t"})));
        CHECK(meteor_lite_corpus({a, b}, {a, words({"r", "t"})}) ==
              doctest::Approx(mean).epsilon(1e-12));
    }
}

TEST_CASE("accuracy drop") {
    CHECK(delta_accuracy(0.866, 0.20) == doctest::Approx(0.666).epsilon(1e-12));
    CHECK(delta_accuracy(0.08, 0.20) == doctest::Approx(-0.12).epsilon(1e-12));
    CHECK_THROWS_AS(delta_accuracy(1.2, 0.2), std::invalid_argument);
    CHECK_THROWS_AS(delta_accuracy(0.5, -0.1), std::invalid_argument);
}

TEST_CASE("report rendering") {
    EvalReport r;
    r.bleu_src = 42.5;
    r.meteor_src = 31.25;
    r.mean_wmd = 0.875;
    r.wmd_pairs = 10;
    r.adversary_accuracy = 0.45;
    r.chance = 0.25;
    r.delta_acc = 0.20;
    SUBCASE("json parses back with the same fields") {
        auto j = nlohmann::json::parse(r.to_json());
        CHECK(j.at("bleu_src").get<double>() == doctest::Approx(42.5));
        CHECK(j.at("mean_wmd").get<double>() == doctest::Approx(0.875));
        CHECK(j.at("delta_acc").get<double>() == doctest::Approx(0.20));
        CHECK(!j.contains("bleu_tgt"));
        r.bleu_tgt = 12.0;
        auto j2 = nlohmann::json::parse(r.to_json());
        CHECK(j2.at("bleu_tgt").get<double>() == doctest::Approx(12.0));
    }
    SUBCASE("table rows align under the header") {
        std::string head = EvalReport::table_header();
        std::string row = r.table_row("ae+grl");
        CHECK(head.find("BLEU") != std::string::npos);
        CHECK(head.find("WMD") != std::string::npos);
        CHECK(head.find("dACC") != std::string::npos);
        CHECK(row.find("ae+grl") != std::string::npos);
        CHECK(row.find("20.0") != std::string::npos);  // delta rendered x100
    }
}

TEST_CASE("end-to-end evaluation") {
    // Marker-separable data so the adversary is confident on sources.
    std::vector<Sentence> sources, outputs;
    std::vector<int> labels;
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<int> word(0, 9);
    for (int i = 0; i < 40; ++i) {
        int c = i % 2;
        Sentence s{"marker" + std::to_string(c)};
        for (int k = 0; k < 5; ++k) s.push_back("w" + std::to_string(word(rng)));
        sources.push_back(s);
        labels.push_back(c);
    }
    AdversaryConfig ac;
    ac.dim = 16;
    ac.buckets = 500;
    ac.num_classes = 2;
    ac.learning_rate = 0.5;
    ac.epochs = 30;
    AdversaryModel adv = train_adversary(sources, labels, ac);

    std::vector<std::string> vocab;
    for (int i = 0; i < 10; ++i) vocab.push_back("w" + std::to_string(i));
    vocab.push_back("marker0");
    vocab.push_back("marker1");
    EmbeddingStore store = EmbeddingStore::synthetic(vocab, 8, 3);

    SUBCASE("copying the source scores perfectly and keeps the adversary sharp") {
        EvalReport r = evaluate(sources, sources, nullptr, adv, labels, store, 0.5);
        CHECK(r.bleu_src == doctest::Approx(100.0).epsilon(1e-9));
        CHECK(r.mean_wmd == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(r.wmd_pairs == 40);
        CHECK(r.adversary_accuracy >= 0.95);
        CHECK(r.delta_acc == doctest::Approx(r.adversary_accuracy - 0.5));
        CHECK(!r.bleu_tgt.has_value());
    }
    SUBCASE("perturbed outputs lower the overlap scores and move mass") {
        for (auto s : sources) {
            s[0] = "w0";  // overwrite the style marker
            outputs.push_back(s);
        }
        EvalReport r = evaluate(outputs, sources, nullptr, adv, labels, store, 0.5);
        CHECK(r.bleu_src < 100.0);
        CHECK(r.bleu_src > 0.0);
        CHECK(r.mean_wmd > 0.0);
        CHECK(r.adversary_accuracy >= 0.0);
        CHECK(r.adversary_accuracy <= 1.0);
        CHECK(r.delta_acc == doctest::Approx(r.adversary_accuracy - 0.5));
    }
    SUBCASE("a target list adds the forward-direction scores") {
        EvalReport r = evaluate(sources, sources, &sources, adv, labels, store, 0.5);
        REQUIRE(r.bleu_tgt.has_value());
        CHECK(*r.bleu_tgt == doctest::Approx(100.0).epsilon(1e-9));
        REQUIRE(r.meteor_tgt.has_value());
    }
    SUBCASE("mismatched lengths throw") {
        std::vector<Sentence> short_out(sources.begin(), sources.end() - 1);
        CHECK_THROWS_AS(evaluate(short_out, sources, nullptr, adv, labels, store, 0.5),
                        std::invalid_argument);
    }
}
