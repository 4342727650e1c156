#include <catch2/catch_amalgamated.hpp>

#include "discosum/oracle.hpp"
#include "support/fixtures.hpp"
#include "support/oracle_check.hpp"
#include "support/synthetic.hpp"

using namespace discosum;
using discosum::testing::figure_document;
using discosum::testing::make_document;

TEST_CASE("oracle on small documents") {
  SECTION("one EDU equal to the reference") {
    const Document d = make_document("one", {{"the cat sat ."}}, "the cat sat .");
    const OracleLabels o = make_oracle_labels(d, document_dependencies(d));
    CHECK(o.labels == std::vector<int>{1});
    CHECK(o.achieved_r1 == Catch::Approx(1.0));
  }
  SECTION("disjoint second EDU cannot improve F1") {
    Document d = make_document("two", {{"the cat sat ."}, {"dogs bark loudly !"}}, "the cat sat .");
    d.rst_tree = "(N/N joint (leaf 0) (leaf 1))";
    const OracleLabels o = make_oracle_labels(d, document_dependencies(d));
    CHECK(o.labels == std::vector<int>{1, 0});
    CHECK(o.steps.size() == 1);
  }
  SECTION("empty reference is an error") {
    Document d = make_document("none", {{"a b"}}, "");
    CHECK_THROWS_AS(make_oracle_labels(d, document_dependencies(d)), std::invalid_argument);
  }
}

TEST_CASE("oracle on the figure fixture pulls in the closure") {
  Document d = figure_document();
  d.reference = d.edu_tokens(4);
  const DependencyTree dep = document_dependencies(d);
  const OracleLabels o = make_oracle_labels(d, dep);
  // Step 1 candidates (unigram F1 against the 8 reference tokens):
  //   EDU 4 + closure {1,2,4}: 27 tokens, 8 hits -> 16/35  (best)
  //   EDU 3 + closure {1,2,3,4}: 33 tokens, 8 hits -> 16/41
  //   EDU 2 + closure {1,2}: 19 tokens, 1 hit ("a") -> 2/27
  // Step 2: adding EDU 0 (16/40) or EDU 3 (16/41) lowers F1, so the search stops.
  CHECK(o.labels == std::vector<int>{0, 1, 1, 0, 1});
  CHECK(o.achieved_r1 == Catch::Approx(16.0 / 35.0).epsilon(1e-12));
  REQUIRE(o.steps.size() == 1);
  CHECK(o.steps[0].candidate == 4);
  CHECK(o.steps[0].added == std::vector<std::size_t>{1, 2, 4});
}

TEST_CASE("oracle ties go to the lowest index") {
  Document d = make_document("tie", {{"x y ."}, {"x y ."}}, "x y .");
  d.rst_tree = "(N/N joint (leaf 0) (leaf 1))";
  d.edus[1].has_subject = true;
  const OracleLabels o = make_oracle_labels(d, document_dependencies(d));
  CHECK(o.labels == std::vector<int>{1, 0});
}

TEST_CASE("oracle steps are exhaustively optimal on random documents") {
  discosum::testing::Rng rng(99);
  discosum::testing::RandomDocOptions opt;
  opt.max_edus = 10;
  opt.vocab = 8;
  opt.subject_probability = 0.3;
  for (int trial = 0; trial < 60; ++trial) {
    const Document d = discosum::testing::random_document(rng, opt);
    const DependencyTree dep = document_dependencies(d);
    const OracleLabels o = make_oracle_labels(d, dep);
    const auto check = discosum::testing::check_oracle(d, dep, o);
    CHECK(check.step_optimal);
    CHECK(check.strictly_increasing);
    CHECK(check.terminal);
    CHECK(check.closure_fixed);
    const auto pos = o.positives();
    CHECK(dependency_closure(pos, dep) == pos);
  }
}
