#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <stdexcept>

#include "styleobf/textdata.hpp"

using namespace styleobf;

TEST_CASE("tokenize detaches punctuation") {
    CHECK(tokenize("For the strong town is without men,") ==
          std::vector<std::string>{"For", "the", "strong", "town", "is", "without",
                                   "men", ","});
    CHECK(tokenize("") == std::vector<std::string>{});
    CHECK(tokenize("a.b") == std::vector<std::string>{"a", ".", "b"});
    CHECK(tokenize("\"Hello!\"") == std::vector<std::string>{"\"", "Hello", "!", "\""});
    // em dash detaches; hyphen does not
    CHECK(tokenize("well-known\xe2\x80\x94yes") ==
          std::vector<std::string>{"well-known", "\xe2\x80\x94", "yes"});
}

TEST_CASE("detokenize round-trip differs only in whitespace") {
    std::string text = "He said, \"go now!\"  please.";
    auto toks = tokenize(text);
    CHECK(tokenize(detokenize(toks)) == toks);
}

namespace {

std::vector<VerseRecord> sample_records(StyleTable& styles, int num_styles,
                                        int num_keys) {
    std::vector<VerseRecord> recs;
    for (int k = 0; k < num_keys; ++k)
        for (int s = 0; s < num_styles; ++s) {
            VerseRecord r;
            r.verse_key = "v" + std::to_string(k);
            r.style = "st" + std::to_string(s);
            r.tokens = {"w" + std::to_string(k), "common", "s" + std::to_string(s)};
            styles.add(r.style);
            recs.push_back(r);
        }
    return recs;
}

}  // namespace

TEST_CASE("vocab construction") {
    StyleTable styles;
    SUBCASE("min_count threshold maps rare tokens to UNK") {
        std::vector<VerseRecord> recs;
        styles.add("x");
        recs.push_back({"k1", "x", {"a", "a", "a", "b"}});
        Vocab v = Vocab::build(recs, styles, 2);
        CHECK(v.id("a") >= 4);
        CHECK(v.id("b") == Vocab::kUnk);
    }
    SUBCASE("five styles give exactly five transfer tokens") {
        auto recs = sample_records(styles, 5, 2);
        Vocab v = Vocab::build(recs, styles, 1);
        CHECK(v.num_styles() == 5);
        for (int s = 0; s < 5; ++s) {
            int tt = v.transfer_token(s);
            CHECK(tt == 4 + s);
            CHECK(v.token(tt) == "<2" + styles.name(s) + ">");
        }
    }
    SUBCASE("min_count 1 keeps every corpus token") {
        auto recs = sample_records(styles, 2, 3);
        Vocab v = Vocab::build(recs, styles, 1);
        std::set<std::string> all;
        for (const auto& r : recs)
            for (const auto& t : r.tokens) all.insert(t);
        for (const auto& t : all) CHECK(v.id(t) >= 4);
    }
    SUBCASE("reserved tokens occupy the lowest indices") {
        auto recs = sample_records(styles, 2, 1);
        Vocab v = Vocab::build(recs, styles, 1);
        CHECK(v.token(Vocab::kPad) == "<pad>");
        CHECK(v.token(Vocab::kUnk) == "<unk>");
        CHECK(v.token(Vocab::kBos) == "<bos>");
        CHECK(v.token(Vocab::kEos) == "<eos>");
    }
    SUBCASE("save/load round-trip") {
        auto recs = sample_records(styles, 3, 2);
        Vocab v = Vocab::build(recs, styles, 1);
        std::string path = (std::filesystem::temp_directory_path() / "vcb.txt").string();
        v.save(path);
        Vocab w = Vocab::load(path);
        REQUIRE(w.size() == v.size());
        for (int i = 0; i < v.size(); ++i) CHECK(w.token(i) == v.token(i));
        CHECK(w.num_styles() == v.num_styles());
        std::remove(path.c_str());
    }
}

TEST_CASE("pair generation") {
    StyleTable styles;
    SUBCASE("complete 5-style group yields 20 pairs") {
        auto recs = sample_records(styles, 5, 1);
        auto pairs = make_pairs(recs, styles);
        CHECK(pairs.size() == 20);
        for (const auto& p : pairs) CHECK(p.source_style != p.target_style);
    }
    SUBCASE("2-style group yields 2 pairs") {
        auto recs = sample_records(styles, 2, 1);
        CHECK(make_pairs(recs, styles).size() == 2);
    }
    SUBCASE("duplicate style under one key throws naming the key") {
        auto recs = sample_records(styles, 2, 1);
        recs.push_back(recs[0]);
        try {
            make_pairs(recs, styles);
            FAIL("expected invalid_argument");
        } catch (const std::invalid_argument& e) {
            CHECK(std::string(e.what()).find("v0") != std::string::npos);
        }
    }
    SUBCASE("pair set is symmetric when both styles exist") {
        auto recs = sample_records(styles, 3, 2);
        auto pairs = make_pairs(recs, styles);
        std::set<std::tuple<std::string, int, int>> seen;
        for (const auto& p : pairs) seen.insert({p.verse_key, p.source_style, p.target_style});
        for (const auto& p : pairs)
            CHECK(seen.count({p.verse_key, p.target_style, p.source_style}) == 1);
    }
    SUBCASE("incomplete groups still pair their present styles") {
        auto recs = sample_records(styles, 3, 1);
        recs.pop_back();  // drop one style
        CHECK(make_pairs(recs, styles).size() == 2);
    }
}

TEST_CASE("AE examples mirror the records") {
    StyleTable styles;
    auto recs = sample_records(styles, 2, 3);
    auto ae = make_ae_examples(recs, styles);
    REQUIRE(ae.size() == recs.size());
    for (std::size_t i = 0; i < ae.size(); ++i) {
        CHECK(ae[i].source == recs[i].tokens);
        CHECK(ae[i].target == recs[i].tokens);
        CHECK(ae[i].source_style == ae[i].target_style);
    }
}

TEST_CASE("splitting") {
    StyleTable styles;
    auto recs = sample_records(styles, 2, 10);
    auto pairs = make_pairs(recs, styles);
    DataSplit sp = split(pairs, {0.8, 0.1, 0.1}, 7);
    SUBCASE("10 keys at 80/10/10 give 8/1/1 keys") {
        std::set<std::string> tr, dv, te;
        for (const auto& p : sp.train) tr.insert(p.verse_key);
        for (const auto& p : sp.dev) dv.insert(p.verse_key);
        for (const auto& p : sp.test) te.insert(p.verse_key);
        CHECK(tr.size() == 8);
        CHECK(dv.size() == 1);
        CHECK(te.size() == 1);
        SUBCASE("partitions are verse-key disjoint") {
            for (const auto& k : dv) CHECK(tr.count(k) == 0);
            for (const auto& k : te) {
                CHECK(tr.count(k) == 0);
                CHECK(dv.count(k) == 0);
            }
        }
    }
    SUBCASE("same seed twice gives identical partitions") {
        DataSplit sp2 = split(pairs, {0.8, 0.1, 0.1}, 7);
        REQUIRE(sp2.train.size() == sp.train.size());
        for (std::size_t i = 0; i < sp.train.size(); ++i)
            CHECK(sp2.train[i].verse_key == sp.train[i].verse_key);
    }
    SUBCASE("bad fractions throw") {
        CHECK_THROWS_AS(split(pairs, {0.5, 0.2, 0.2}, 7), std::invalid_argument);
    }
    SUBCASE("fewer keys than partitions throws") {
        StyleTable st2;
        auto small = make_pairs(sample_records(st2, 2, 2), st2);
        CHECK_THROWS_AS(split(small, {0.8, 0.1, 0.1}, 7), std::invalid_argument);
    }
}

TEST_CASE("corpus TSV round-trip and error reporting") {
    namespace fs = std::filesystem;
    std::string path = (fs::temp_directory_path() / "corp.tsv").string();
    StyleTable styles;
    auto recs = sample_records(styles, 2, 3);
    write_corpus_tsv(path, recs);
    StyleTable styles2;
    auto back = read_corpus_tsv(path, styles2);
    REQUIRE(back.size() == recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) {
        CHECK(back[i].verse_key == recs[i].verse_key);
        CHECK(back[i].tokens == recs[i].tokens);
    }
    {
        std::ofstream bad(path, std::ios::binary);
        bad << "k1\tstylea\tok text\n" << "missing fields\n";
    }
    StyleTable styles3;
    try {
        read_corpus_tsv(path, styles3);
        FAIL("expected invalid_argument");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    std::remove(path.c_str());
}

TEST_CASE("toy corpus is deterministic and marker-separable") {
    StyleTable a, b;
    auto r1 = make_toy_corpus(2, 20, 9, a);
    auto r2 = make_toy_corpus(2, 20, 9, b);
    REQUIRE(r1.size() == r2.size());
    CHECK(r1.size() == 40);
    for (std::size_t i = 0; i < r1.size(); ++i) CHECK(r1[i].tokens == r2[i].tokens);
    // every record carries its style marker exactly once
    for (const auto& r : r1) {
        std::string marker = "mk" + std::string(1, char('a' + a.index(r.style)));
        CHECK(std::count(r.tokens.begin(), r.tokens.end(), marker) == 1);
    }
}
