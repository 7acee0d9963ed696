#include <doctest.h>

#include <cmath>
#include <sstream>

#include "bilbowa/corpus.hpp"
#include "bilbowa/error.hpp"
#include "bilbowa/vocab.hpp"

#include "support/testutil.hpp"

using namespace bilbowa;

TEST_SUITE("corpus") {

TEST_CASE("build_vocab counts and thresholds") {
  std::vector<std::string> lines = {"a a b"};
  Vocabulary v1 = build_vocab(lines, 1);
  REQUIRE(v1.size() == 2);
  CHECK(v1.total_tokens() == 3);
  CHECK(v1.word(0) == "a");
  CHECK(v1.count(0) == 2);
  CHECK(v1.word(1) == "b");
  CHECK(v1.count(1) == 1);

  Vocabulary v2 = build_vocab(lines, 2);
  REQUIRE(v2.size() == 1);
  CHECK(v2.word(0) == "a");
  CHECK(v2.total_tokens() == 2);

  Vocabulary v3 = build_vocab(std::vector<std::string>{}, 1);
  CHECK(v3.empty());
  CHECK(v3.total_tokens() == 0);
}

TEST_CASE("build_vocab id assignment is deterministic and ordered") {
  std::vector<std::string> lines = {"pear apple pear plum apple cherry"};
  Vocabulary v = build_vocab(lines, 1);
  // Descending count, lexicographic tie-break.
  CHECK(v.word(0) == "apple");
  CHECK(v.word(1) == "pear");
  CHECK(v.word(2) == "cherry");
  CHECK(v.word(3) == "plum");
  for (std::size_t i = 0; i < v.size(); ++i) {
    CHECK(*v.find(v.word(static_cast<WordId>(i))) == static_cast<WordId>(i));
  }
  CHECK(!v.find("missing").has_value());

  Vocabulary again = build_vocab(lines, 1);
  REQUIRE(again.size() == v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    CHECK(again.word(static_cast<WordId>(i)) == v.word(static_cast<WordId>(i)));
  }
}

TEST_CASE("build_vocab max_vocab keeps most frequent words") {
  std::vector<std::string> lines = {"a a a b b c"};
  Vocabulary v = build_vocab(lines, 1, 2);
  REQUIRE(v.size() == 2);
  CHECK(v.word(0) == "a");
  CHECK(v.word(1) == "b");
  CHECK(v.total_tokens() == 5);
}

TEST_CASE("build_vocab_file reports the offending path") {
  const std::string msg = testutil::thrown_message<IngestError>(
      [] { build_vocab_file("/nonexistent/corpus.txt", 1); });
  CHECK(testutil::contains(msg, "/nonexistent/corpus.txt"));
}

TEST_CASE("vocabulary file round trip") {
  std::vector<std::string> lines = {"a a b a c b"};
  Vocabulary v = build_vocab(lines, 1);
  std::stringstream buffer;
  save_vocab(v, buffer);
  CHECK(buffer.str().starts_with("#total_tokens=6\na\t3\n"));
  Vocabulary loaded = load_vocab(buffer);
  REQUIRE(loaded.size() == v.size());
  CHECK(loaded.total_tokens() == v.total_tokens());
  for (std::size_t i = 0; i < v.size(); ++i) {
    CHECK(loaded.word(static_cast<WordId>(i)) == v.word(static_cast<WordId>(i)));
    CHECK(loaded.count(static_cast<WordId>(i)) == v.count(static_cast<WordId>(i)));
  }
}

TEST_CASE("load_vocab rejects malformed input") {
  std::stringstream missing_header("a\t3\n");
  CHECK_THROWS_AS(load_vocab(missing_header), ParseError);
  const std::string msg = testutil::thrown_message<ParseError>([] {
    std::stringstream bad_count("#total_tokens=3\na\tx\n");
    load_vocab(bad_count);
  });
  CHECK(testutil::contains(msg, "line 2"));
}

TEST_CASE("noise table exact probabilities") {
  std::vector<std::string> lines = {"a a a b"};
  Vocabulary v = build_vocab(lines, 1);

  NoiseTable uniform_power(v, 1.0);
  CHECK(uniform_power.probability(0) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(uniform_power.probability(1) == doctest::Approx(0.25).epsilon(1e-12));

  NoiseTable damped(v, 0.75);
  const double expected_a = std::pow(3.0, 0.75) / (std::pow(3.0, 0.75) + 1.0);
  CHECK(damped.probability(0) == doctest::Approx(expected_a).epsilon(1e-12));
  CHECK(damped.probability(0) == doctest::Approx(0.695).epsilon(1e-3));

  std::vector<std::string> solo = {"a a a a a"};
  NoiseTable single(build_vocab(solo, 1), 0.3);
  Rng rng(11);
  for (int i = 0; i < 100; ++i) CHECK(single.sample(rng) == 0);
}

TEST_CASE("noise table empirical distribution matches count^alpha") {
  std::vector<std::string> lines = {"a a a b", "c c a b b c d"};
  Vocabulary v = build_vocab(lines, 1);
  NoiseTable table(v, 0.75);

  constexpr int kDraws = 1000000;
  std::vector<int> hits(v.size(), 0);
  Rng rng(123);
  for (int i = 0; i < kDraws; ++i) ++hits[static_cast<std::size_t>(table.sample(rng))];
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double p = table.probability(static_cast<WordId>(i));
    CHECK(p > 0.0);
    const double freq = static_cast<double>(hits[i]) / kDraws;
    const double tolerance = 5.0 * std::sqrt(p * (1.0 - p) / kDraws);
    CHECK(std::abs(freq - p) < tolerance);
  }
}

TEST_CASE("noise table construction errors") {
  CHECK_THROWS_AS(NoiseTable(std::span<const std::uint64_t>{}, 0.75), std::invalid_argument);
  std::vector<std::string> lines = {"a b c"};
  Vocabulary v = build_vocab(lines, 1);
  CHECK_THROWS_AS(build_noise_table(v, 0.75, 2), std::invalid_argument);
  CHECK(build_noise_table(v, 0.75, 3).size() == 3);
}

TEST_CASE("keep_probability closed form") {
  CHECK(keep_probability(1e-4, 1e-4) == doctest::Approx(1.0));
  CHECK(keep_probability(4e-4, 1e-4) == doctest::Approx(0.5));
  CHECK(keep_probability(5e-5, 1e-4) == doctest::Approx(1.0));
  CHECK_THROWS_AS(keep_probability(0.0, 1e-4), std::domain_error);
  CHECK_THROWS_AS(keep_probability(-0.1, 1e-4), std::domain_error);

  // Monotone non-increasing in freq.
  Rng rng(5);
  std::uniform_real_distribution<double> unit(1e-8, 1.0);
  for (int i = 0; i < 200; ++i) {
    double f1 = unit(rng);
    double f2 = unit(rng);
    if (f1 > f2) std::swap(f1, f2);
    CHECK(keep_probability(f1, 1e-4) >= keep_probability(f2, 1e-4));
  }
}

TEST_CASE("subsample_sentence keeps everything under a generous threshold") {
  std::vector<std::string> lines = {"a a b c"};
  Vocabulary v = build_vocab(lines, 1);
  std::vector<WordId> ids = v.to_ids("a a b c");
  Rng rng(3);
  CHECK(subsample_sentence(ids, v, 1.0, rng) == ids);   // threshold >= max freq
  CHECK(subsample_sentence(ids, v, 0.0, rng) == ids);   // disabled
  CHECK(subsample_sentence(ids, v, -1.0, rng) == ids);  // disabled
}

TEST_CASE("subsample_sentence discards a high-frequency word, keeps the rest") {
  // freq(a) ~ 1, keep prob ~ 1e-3; freq(b) = 1e-6 = threshold, keep prob 1.
  std::vector<std::pair<std::string, std::uint64_t>> counts = {{"a", 999999}, {"b", 1}};
  Vocabulary v = Vocabulary::from_counts(counts, 1);
  const WordId a = *v.find("a");
  const WordId b = *v.find("b");
  CHECK(keep_probability(v.frequency(b), 1e-6) == doctest::Approx(1.0));
  std::vector<WordId> ids = {a, b, a};
  Rng rng(7);  // frozen seed: both draws fall above keep prob ~1e-3
  std::vector<WordId> kept = subsample_sentence(ids, v, 1e-6, rng);
  CHECK(kept == std::vector<WordId>{b});
}

TEST_CASE("subsample_sentence is reproducible bit-for-bit") {
  std::vector<std::string> lines = {"a a a a b b c d e f g h"};
  Vocabulary v = build_vocab(lines, 1);
  std::vector<WordId> ids = v.to_ids(lines[0]);
  Rng rng1(99);
  Rng rng2(99);
  CHECK(subsample_sentence(ids, v, 0.05, rng1) == subsample_sentence(ids, v, 0.05, rng2));
}

TEST_CASE("subsample_sentence empirical keep rate at 64x threshold") {
  // One word 64x over threshold: keep rate sqrt(1/64) = 1/8.
  std::vector<std::pair<std::string, std::uint64_t>> counts = {{"w", 64}, {"x", 999936}};
  Vocabulary v = Vocabulary::from_counts(counts, 1);
  const WordId w = *v.find("w");
  const double threshold = v.frequency(w) / 64.0;
  const double p = 1.0 / 8.0;

  constexpr int kTrials = 100000;
  std::vector<WordId> sentence(kTrials, w);
  Rng rng(2024);
  const std::size_t kept = subsample_sentence(sentence, v, threshold, rng).size();
  const double sigma = std::sqrt(kTrials * p * (1.0 - p));
  CHECK(std::abs(static_cast<double>(kept) - kTrials * p) < 3.0 * sigma);
}

TEST_CASE("SubsampleTable matches keep_probability") {
  std::vector<std::string> lines = {"a a a a b b c"};
  Vocabulary v = build_vocab(lines, 1);
  SubsampleTable table(v.counts(), v.total_tokens(), 0.1);
  for (std::size_t i = 0; i < v.size(); ++i) {
    CHECK(table.keep(static_cast<WordId>(i)) ==
          doctest::Approx(keep_probability(v.frequency(static_cast<WordId>(i)), 0.1)));
  }
  SubsampleTable disabled;
  CHECK(!disabled.enabled());
  CHECK(disabled.keep(0) == 1.0);
}

TEST_CASE("read_parallel maps, skips and errors") {
  std::vector<std::string> lines_e = {"the cat", "dog"};
  std::vector<std::string> lines_f = {"le chat", "chien"};
  Vocabulary ve = build_vocab(lines_e, 1);
  Vocabulary vf = build_vocab(lines_f, 1);

  SUBCASE("full vocabulary pair") {
    std::stringstream e("the cat\n");
    std::stringstream f("le chat\n");
    auto pairs = read_parallel(e, f, ve, vf);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].e_ids == std::vector<WordId>{*ve.find("the"), *ve.find("cat")});
    CHECK(pairs[0].f_ids == std::vector<WordId>{*vf.find("le"), *vf.find("chat")});
  }

  SUBCASE("empty side is skipped") {
    std::stringstream e("\ndog\n");
    std::stringstream f("le chat\nchien\n");
    auto pairs = read_parallel(e, f, ve, vf);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].e_ids == std::vector<WordId>{*ve.find("dog")});
  }

  SUBCASE("all-oov side is skipped") {
    std::stringstream e("zebra\ndog\n");
    std::stringstream f("le\nchien\n");
    auto pairs = read_parallel(e, f, ve, vf);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].f_ids == std::vector<WordId>{*vf.find("chien")});
  }

  SUBCASE("line count mismatch reports both counts") {
    std::stringstream e("dog\ndog\ndog\n");
    std::stringstream f("chien\nchien\nchien\nchien\n");
    const std::string msg = testutil::thrown_message<IngestError>(
        [&] { read_parallel(e, f, ve, vf); });
    CHECK(testutil::contains(msg, "parallel line count mismatch 3≠4"));
  }

  SUBCASE("output count bounded by line count, invariants hold") {
    std::stringstream e("the cat\n\nzebra dog\ncat cat\n");
    std::stringstream f("le chat\nchien\nchien\nle\n");
    auto pairs = read_parallel(e, f, ve, vf);
    CHECK(pairs.size() <= 4);
    for (const auto& pair : pairs) {
      CHECK(!pair.e_ids.empty());
      CHECK(!pair.f_ids.empty());
      for (WordId id : pair.e_ids) CHECK(static_cast<std::size_t>(id) < ve.size());
      for (WordId id : pair.f_ids) CHECK(static_cast<std::size_t>(id) < vf.size());
    }
  }
}

}  // TEST_SUITE
