#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "dirbn/corpus.hpp"

using namespace dirbn;
namespace fs = std::filesystem;

namespace {

class TempDir {
  public:
    TempDir() : path_(fs::temp_directory_path() / ("dirbn_corpus_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
                                                  ::testing::UnitTest::GetInstance()->current_test_info()->name())) {
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    fs::path file(const std::string& name, const std::string& contents) const {
        std::ofstream(path_ / name) << contents;
        return path_ / name;
    }

  private:
    fs::path path_;
};

Corpus random_corpus(std::uint64_t seed, std::size_t docs, std::size_t vocab, std::size_t max_len) {
    RngStream rng(seed, 1);
    std::vector<Document> out(docs);
    for (auto& doc : out) {
        const auto n = rng.index(max_len + 1);
        std::vector<std::uint32_t> tokens;
        for (std::size_t i = 0; i < n; ++i) tokens.push_back(static_cast<std::uint32_t>(rng.index(vocab)));
        doc = detail::collapse_tokens(tokens);
    }
    std::vector<std::string> words;
    for (std::size_t v = 0; v < vocab; ++v) words.push_back("w" + std::to_string(v));
    return Corpus(words, out);
}

} // namespace

TEST(LoadCorpus, ParsesHeaderAndTriples) {
    TempDir dir;
    auto docword = dir.file("d.txt", "2 3 4\n1 1 2\n1 3 1\n2 2 5\n2 3 1\n");
    auto vocab = dir.file("v.txt", "apple\nbanana\ncherry\n");
    Corpus c = load_corpus(docword, vocab);
    EXPECT_EQ(c.num_docs(), 2u);
    EXPECT_EQ(c.vocab_size(), 3u);
    EXPECT_EQ(c.total_tokens(), 9);
    EXPECT_EQ(c.count(0, 0), 2);
    EXPECT_EQ(c.count(0, 1), 0);
    EXPECT_EQ(c.count(1, 1), 5);
    EXPECT_EQ(c.vocab()[2], "cherry");
}

TEST(LoadCorpus, RejectsZeroCountWithLineNumber) {
    TempDir dir;
    auto docword = dir.file("d.txt", "1 2 2\n1 1 1\n1 2 0\n");
    auto vocab = dir.file("v.txt", "a\nb\n");
    try {
        load_corpus(docword, vocab);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
    }
}

TEST(LoadCorpus, MalformedAndOutOfRange) {
    TempDir dir;
    auto vocab = dir.file("v.txt", "a\nb\n");
    EXPECT_THROW(load_corpus(dir.file("d1.txt", "1 2\n"), vocab), ParseError);
    EXPECT_THROW(load_corpus(dir.file("d2.txt", "1 2 1\n1 x 1\n"), vocab), ParseError);
    EXPECT_THROW(load_corpus(dir.file("d3.txt", "1 2 1\n1 3 1\n"), vocab), BoundsError);
    EXPECT_THROW(load_corpus(dir.file("d4.txt", "1 2 1\n2 1 1\n"), vocab), BoundsError);
    EXPECT_THROW(load_corpus(dir.file("d5.txt", "1 2 2\n1 1 1\n"), vocab), ParseError);
    EXPECT_THROW(load_corpus(dir.file("missing_dir/none.txt", ""), vocab), IoError);
}

TEST(LoadCorpus, SaveThenLoadPreservesCounts) {
    const auto dir = fs::temp_directory_path() / "dirbn_corpus_roundtrip";
    fs::create_directories(dir);
    Corpus c = random_corpus(3, 12, 9, 20);
    save_corpus(c, dir / "c.docword", dir / "c.vocab");
    std::ofstream(dir / "c.labels") << "1\n2\n3\n1\n2\n3\n1\n2\n3\n1\n2\n3\n";
    Corpus back = load_corpus(dir / "c.docword", dir / "c.vocab", dir / "c.labels");
    EXPECT_EQ(back.docs(), c.docs());
    EXPECT_EQ(back.vocab(), c.vocab());
    ASSERT_TRUE(back.labels().has_value());
    EXPECT_EQ((*back.labels())[4], 2);
    fs::remove_all(dir);
}

TEST(SplitDocuments, EightyTwenty) {
    Corpus c = random_corpus(4, 10, 5, 10);
    auto [train, test] = split_documents(c, 0.8, 11);
    EXPECT_EQ(train.num_docs(), 8u);
    EXPECT_EQ(test.num_docs(), 2u);
    EXPECT_EQ(train.total_tokens() + test.total_tokens(), c.total_tokens());
    EXPECT_EQ(train.vocab(), c.vocab());

    auto [train2, test2] = split_documents(c, 0.8, 11);
    EXPECT_EQ(train2, train);
    EXPECT_EQ(test2, test);

    EXPECT_THROW(split_documents(c, 0.0, 1), DomainError);
    EXPECT_THROW(split_documents(c, 1.0, 1), DomainError);
    EXPECT_THROW(split_documents(Corpus(c.vocab(), {}), 0.5, 1), DomainError);
}

TEST(SplitDocuments, PartitionIsDisjointAndComplete) {
    // Tag each document with a unique word so membership is observable.
    std::vector<std::string> vocab;
    std::vector<Document> docs;
    for (std::uint32_t d = 0; d < 57; ++d) {
        vocab.push_back("d" + std::to_string(d));
        docs.push_back({{d, 1}});
    }
    Corpus c(vocab, docs);
    auto [train, test] = split_documents(c, 0.3, 5);
    EXPECT_EQ(train.num_docs(), 17u);
    std::vector<int> seen(57, 0);
    for (const auto* part : {&train, &test})
        for (const auto& doc : part->docs()) ++seen[doc.front().word];
    for (int s : seen) EXPECT_EQ(s, 1);
}

TEST(SplitWords, EvenAndSingletonDocuments) {
    Corpus c({"w1", "w2"}, {{{0, 2}}, {{1, 1}}, {}});
    HeldoutSplit s = split_words(c, 3);
    EXPECT_EQ(s.observed.doc(0), (Document{{0, 1}}));
    EXPECT_EQ(s.heldout.doc(0), (Document{{0, 1}}));
    EXPECT_EQ(s.observed.doc(1), (Document{{1, 1}}));
    EXPECT_TRUE(s.heldout.doc(1).empty());
    EXPECT_TRUE(s.observed.doc(2).empty());
}

TEST(SplitWords, RecomposesExactly) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Corpus c = random_corpus(seed, 30, 15, 40);
        HeldoutSplit s = split_words(c, seed * 7 + 1);
        for (std::size_t d = 0; d < c.num_docs(); ++d) {
            const Count n = c.doc_length(d);
            ASSERT_EQ(s.observed.doc_length(d), (n + 1) / 2);
            ASSERT_EQ(s.heldout.doc_length(d), n / 2);
            for (std::uint32_t w = 0; w < c.vocab_size(); ++w)
                ASSERT_EQ(s.observed.count(d, w) + s.heldout.count(d, w), c.count(d, w));
        }
        HeldoutSplit again = split_words(c, seed * 7 + 1);
        ASSERT_EQ(again.observed, s.observed);
    }
}

TEST(SubsampleWords, ProportionsAndIdentity) {
    Corpus c = random_corpus(9, 40, 20, 60);
    EXPECT_EQ(subsample_words(c, 1.0, 3), c);

    Corpus hundred({"a", "b", "c"}, {{{0, 50}, {1, 30}, {2, 20}}});
    Corpus kept = subsample_words(hundred, 0.2, 4);
    EXPECT_EQ(kept.doc_length(0), 20);
    for (std::uint32_t w = 0; w < 3; ++w) EXPECT_LE(kept.count(0, w), hundred.count(0, w));

    Corpus sub = subsample_words(c, 0.35, 8);
    Count expected = 0;
    for (std::size_t d = 0; d < c.num_docs(); ++d) {
        expected += std::llround(0.35 * static_cast<double>(c.doc_length(d)));
        for (std::uint32_t w = 0; w < c.vocab_size(); ++w) ASSERT_LE(sub.count(d, w), c.count(d, w));
    }
    EXPECT_EQ(sub.total_tokens(), expected);
    EXPECT_EQ(subsample_words(c, 0.35, 8), sub);
    EXPECT_THROW(subsample_words(c, 0.0, 1), DomainError);
    EXPECT_THROW(subsample_words(c, 1.5, 1), DomainError);
}

TEST(CorpusType, RejectsInvalidEntries) {
    EXPECT_THROW(Corpus({"a"}, {{{1, 1}}}), BoundsError);
    EXPECT_THROW(Corpus({"a", "b"}, {{{0, 0}}}), DomainError);
    Corpus merged({"a", "b"}, {{{1, 2}, {0, 1}, {1, 3}}});
    EXPECT_EQ(merged.doc(0), (Document{{0, 1}, {1, 5}}));
}
