#include <doctest.h>

#include <cmath>

#include "bilbowa/model.hpp"
#include "bilbowa/skipgram.hpp"

#include "support/oracles.hpp"

using namespace bilbowa;

namespace {

struct SgInstance {
  MatrixX<double> input;   // one center row is enough
  MatrixX<double> output;  // row 0 = context, rows 1.. = noise
  std::vector<WordId> noise;
};

SgInstance random_instance(Rng& rng, int k, int dim) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  SgInstance inst;
  inst.input.resize(1, dim);
  inst.output.resize(k + 1, dim);
  for (int c = 0; c < dim; ++c) inst.input(0, c) = unit(rng);
  for (int r = 0; r < k + 1; ++r) {
    for (int c = 0; c < dim; ++c) inst.output(r, c) = unit(rng);
  }
  for (int n = 1; n <= k; ++n) inst.noise.push_back(n);
  return inst;
}

}  // namespace

TEST_SUITE("skipgram") {

TEST_CASE("extract_pairs basics") {
  Rng rng(1);
  std::vector<WordId> single = {7};
  CHECK(extract_pairs(single, 5, rng).empty());

  std::vector<WordId> two = {3, 9};
  auto pairs = extract_pairs(two, 1, rng);
  REQUIRE(pairs.size() == 2);
  CHECK(pairs[0] == TrainingPair{3, 9});
  CHECK(pairs[1] == TrainingPair{9, 3});
}

TEST_CASE("extract_pairs matches the reference draw sequence") {
  std::vector<WordId> sentence = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  for (std::uint64_t seed : {1ull, 17ull, 5150ull}) {
    Rng lib_rng(seed);
    Rng ref_rng(seed);
    auto pairs = extract_pairs(sentence, 5, lib_rng);
    auto expected = oracles::replay_extract_pairs(sentence, 5, ref_rng);
    REQUIRE(pairs.size() == expected.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      CHECK(pairs[i].center == expected[i].first);
      CHECK(pairs[i].context == expected[i].second);
    }
  }
}

TEST_CASE("extract_pairs emits only in-bounds symmetric windows") {
  Rng rng(77);
  std::uniform_int_distribution<int> len(2, 12);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<WordId> sentence(static_cast<std::size_t>(len(rng)));
    for (std::size_t i = 0; i < sentence.size(); ++i) sentence[i] = static_cast<WordId>(i);
    auto pairs = extract_pairs(sentence, 4, rng);
    for (const TrainingPair& p : pairs) {
      CHECK(p.center >= 0);
      CHECK(p.context >= 0);
      CHECK(static_cast<std::size_t>(p.center) < sentence.size());
      CHECK(static_cast<std::size_t>(p.context) < sentence.size());
      CHECK(p.center != p.context);  // ids equal positions here
      CHECK(std::abs(p.center - p.context) <= 4);
    }
  }
}

TEST_CASE("sg_loss at zero vectors is (k+1) ln 2") {
  MatrixX<double> input = MatrixX<double>::Zero(1, 4);
  MatrixX<double> output = MatrixX<double>::Zero(3, 4);
  std::vector<WordId> noise = {1, 2};
  const double loss = sg_loss(input, output, 0, 0, std::span<const WordId>(noise));
  CHECK(loss == doctest::Approx(3.0 * std::log(2.0)).epsilon(1e-12));
  CHECK(loss == doctest::Approx(2.07944).epsilon(1e-5));
}

TEST_CASE("sg_loss at the clamp boundary") {
  // Positive dot +30 and one noise dot -30: loss = 2 * (-log sigma(30)).
  MatrixX<double> input(1, 2);
  input << 1.0, 0.0;
  MatrixX<double> output(2, 2);
  output << 30.0, 0.0, -30.0, 0.0;
  std::vector<WordId> noise = {1};
  const double loss = sg_loss(input, output, 0, 0, std::span<const WordId>(noise));
  const double expected = 2.0 * std::log1p(std::exp(-30.0));
  CHECK(loss == doctest::Approx(expected).epsilon(1e-9));
  CHECK(loss == doctest::Approx(1.872e-13).epsilon(1e-3));

  // Values beyond the boundary clamp to the same loss.
  MatrixX<double> far = output;
  far(0, 0) = 1e6;
  far(1, 0) = -1e6;
  CHECK(sg_loss(input, far, 0, 0, std::span<const WordId>(noise)) ==
        doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("sg_loss contract errors") {
  MatrixX<double> input = MatrixX<double>::Zero(1, 4);
  MatrixX<double> bad_output = MatrixX<double>::Zero(2, 3);
  std::vector<WordId> noise = {1};
  CHECK_THROWS_AS(sg_loss(input, bad_output, 0, 0, std::span<const WordId>(noise)),
                  std::invalid_argument);
  MatrixX<double> output = MatrixX<double>::Zero(2, 4);
  CHECK_THROWS_AS(sg_loss(input, output, 0, 0, std::span<const WordId>()),
                  std::invalid_argument);
}

TEST_CASE("analytic gradients match central finite differences") {
  Rng rng(4242);
  const double eps = 1e-5;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    SgInstance inst = random_instance(rng, 5, 8);
    auto loss_fn = [&] {
      return sg_loss(inst.input, inst.output, 0, 0, std::span<const WordId>(inst.noise));
    };
    // Analytic gradient via one unclipped gradient step with eta = 1.
    MatrixX<double> input_after = inst.input;
    MatrixX<double> output_after = inst.output;
    sg_update(input_after, output_after, WordId(0), WordId(0),
              std::span<const WordId>(inst.noise), 1.0,
              std::numeric_limits<double>::infinity());
    const MatrixX<double> grad_input = inst.input - input_after;
    const MatrixX<double> grad_output = inst.output - output_after;

    const MatrixX<double> fd_input = oracles::fd_gradient(inst.input, loss_fn, eps);
    const MatrixX<double> fd_output = oracles::fd_gradient(inst.output, loss_fn, eps);
    for (Eigen::Index r = 0; r < grad_input.rows(); ++r) {
      worst = std::max(worst, oracles::gradient_rel_error(grad_input.row(r), fd_input.row(r)));
    }
    for (Eigen::Index r = 0; r < grad_output.rows(); ++r) {
      worst = std::max(worst, oracles::gradient_rel_error(grad_output.row(r), fd_output.row(r)));
    }
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("sg_update leaves zero vectors untouched") {
  MatrixX<double> input = MatrixX<double>::Zero(1, 4);
  MatrixX<double> output = MatrixX<double>::Zero(3, 4);
  std::vector<WordId> noise = {1, 2};
  sg_update(input, output, 0, 0, std::span<const WordId>(noise), 0.1, 0.1);
  CHECK(input.isZero(0.0));
  CHECK(output.isZero(0.0));
}

TEST_CASE("one small step strictly decreases the loss") {
  Rng rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    SgInstance inst = random_instance(rng, 4, 6);
    const double before =
        sg_loss(inst.input, inst.output, 0, 0, std::span<const WordId>(inst.noise));
    sg_update(inst.input, inst.output, WordId(0), WordId(0),
              std::span<const WordId>(inst.noise), 1e-3,
              std::numeric_limits<double>::infinity());
    const double after =
        sg_loss(inst.input, inst.output, 0, 0, std::span<const WordId>(inst.noise));
    CHECK(after < before);
  }
}

TEST_CASE("raw update component of 0.5 is applied as 0.1") {
  // sigma(0) - 1 = -0.5 on the context row; eta = 1 gives a raw +0.5 * v.
  MatrixX<double> input(1, 2);
  input << 1.0, 0.0;
  MatrixX<double> output = MatrixX<double>::Zero(2, 2);
  std::vector<WordId> noise = {1};
  sg_update(input, output, 0, 0, std::span<const WordId>(noise), 1.0, 0.1);
  CHECK(output(0, 0) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(output(0, 1) == doctest::Approx(0.0));
  CHECK(output(1, 0) == doctest::Approx(-0.1).epsilon(1e-12));  // noise row, raw -0.5
}

TEST_CASE("clip = infinity agrees with clip = 0.1 when updates are small") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    SgInstance inst = random_instance(rng, 3, 5);
    MatrixX<double> input_clipped = inst.input;
    MatrixX<double> output_clipped = inst.output;
    // eta small enough that every raw scaled update stays within 0.1.
    const double eta = 1e-3;
    sg_update(inst.input, inst.output, WordId(0), WordId(0),
              std::span<const WordId>(inst.noise), eta,
              std::numeric_limits<double>::infinity());
    sg_update(input_clipped, output_clipped, WordId(0), WordId(0),
              std::span<const WordId>(inst.noise), eta, 0.1);
    CHECK(inst.input == input_clipped);
    CHECK(inst.output == output_clipped);
  }
}

TEST_CASE("loss is non-negative and equals (k+1) ln 2 at orthogonal vectors") {
  Rng rng(31);
  for (int k : {1, 3, 15}) {
    SgInstance inst = random_instance(rng, k, 6);
    CHECK(sg_loss(inst.input, inst.output, 0, 0, std::span<const WordId>(inst.noise)) >= 0.0);
    inst.input.setZero();
    CHECK(sg_loss(inst.input, inst.output, 0, 0, std::span<const WordId>(inst.noise)) ==
          doctest::Approx((k + 1) * std::log(2.0)).epsilon(1e-12));
  }
}

}  // TEST_SUITE
