#include <catch2/catch_amalgamated.hpp>

#include <algorithm>

#include "discosum/metrics.hpp"
#include "support/fixtures.hpp"
#include "support/synthetic.hpp"

using namespace discosum;
using discosum::testing::split;

namespace {

std::size_t lcs_brute(const std::vector<std::string>& a, std::size_t i, const std::vector<std::string>& b,
                      std::size_t j) {
  if (i == a.size() || j == b.size()) return 0;
  if (a[i] == b[j]) return 1 + lcs_brute(a, i + 1, b, j + 1);
  return std::max(lcs_brute(a, i + 1, b, j), lcs_brute(a, i, b, j + 1));
}

}  // namespace

TEST_CASE("rouge_n") {
  const auto a = split("the cat sat on the mat");
  CHECK(rouge_n(a, a, 1).f1 == Catch::Approx(1.0));
  CHECK(rouge_n(a, a, 2).f1 == Catch::Approx(1.0));
  CHECK(rouge_n(split("a b c"), split("d e f"), 1).f1 == 0.0);

  const RougeScore s = rouge_n(split("the cat sat"), split("the cat ate fish"), 1);
  CHECK(s.precision == Catch::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(s.recall == Catch::Approx(0.5).epsilon(1e-12));
  CHECK(s.f1 == Catch::Approx(4.0 / 7.0).epsilon(1e-12));

  // clipping: "the" appears twice in the candidate but once in the reference
  const RougeScore clip = rouge_n(split("the the cat"), split("the cat"), 1);
  CHECK(clip.precision == Catch::Approx(2.0 / 3.0));
  CHECK(clip.recall == Catch::Approx(1.0));

  CHECK(rouge_n({}, a, 1).f1 == 0.0);
  CHECK(rouge_n(a, {}, 1).f1 == 0.0);
  CHECK(rouge_n(split("one"), split("one"), 2).f1 == 0.0);
}

TEST_CASE("rouge_l") {
  const auto a = split("a b c d");
  CHECK(rouge_l(a, a).f1 == Catch::Approx(1.0));
  const RougeScore s = rouge_l(split("a b c d"), split("a c b d"));
  CHECK(s.precision == Catch::Approx(0.75));
  CHECK(s.recall == Catch::Approx(0.75));
  CHECK(rouge_l({}, a).f1 == 0.0);
}

TEST_CASE("metric properties on random sequences") {
  discosum::testing::Rng rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<std::string> a, b;
    const std::size_t la = rng.below(10), lb = rng.below(10);
    for (std::size_t i = 0; i < la; ++i) a.push_back(discosum::testing::word(rng.below(4)));
    for (std::size_t i = 0; i < lb; ++i) b.push_back(discosum::testing::word(rng.below(4)));
    for (std::size_t n : {1u, 2u}) {
      CHECK(ngram_overlap(a, b, n) == ngram_overlap(b, a, n));
      const RougeScore s = rouge_n(a, b, n);
      CHECK(s.f1 >= 0.0);
      CHECK(s.f1 <= 1.0);
      if (s.precision + s.recall > 0)
        CHECK(s.f1 == Catch::Approx(2 * s.precision * s.recall / (s.precision + s.recall)));
    }
    CHECK(lcs_length(a, b) == lcs_brute(a, 0, b, 0));
  }
}
