#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "sbys/error.hpp"
#include "sbys/stats.hpp"

using namespace sbys;

namespace {

PairedScores from_diffs(const std::vector<double>& diffs, double base = 50.0) {
  PairedScores p{"a", "b", {}, Orientation::higher_better};
  for (std::size_t i = 0; i < diffs.size(); ++i) {
    p.per_doc.push_back({"d" + std::to_string(i), base + diffs[i], base});
  }
  return p;
}

std::map<std::string, double> scores(const std::vector<double>& v) {
  std::map<std::string, double> m;
  for (std::size_t i = 0; i < v.size(); ++i) m["d" + std::to_string(i)] = v[i];
  return m;
}

}  // namespace

TEST_CASE("constant +1 differences, n=10: p = 2/1024") {
  const auto r = paired_permutation_test(from_diffs(std::vector<double>(10, 1.0)));
  CHECK(r.exact);
  CHECK(r.n_resamples == 1024);
  CHECK(r.p_value == 2.0 / 1024);
  CHECK(r.observed_stat == doctest::Approx(1.0));
}

TEST_CASE("one-sided alternatives follow orientation") {
  auto p = from_diffs(std::vector<double>(10, 1.0));
  PermutationOptions o;
  o.alternative = Alternative::a_better;
  CHECK(paired_permutation_test(p, o).p_value == 1.0 / 1024);
  o.alternative = Alternative::b_better;
  CHECK(paired_permutation_test(p, o).p_value == 1.0);
  p.orientation = Orientation::lower_better;
  CHECK(paired_permutation_test(p, o).p_value == 1.0 / 1024);
}

TEST_CASE("identical systems are degenerate with p = 1") {
  const auto r = paired_permutation_test(from_diffs(std::vector<double>(5, 0.0)));
  CHECK(r.degenerate);
  CHECK(r.p_value == 1.0);
  CHECK(r.observed_stat == 0.0);
}

TEST_CASE("fewer than two documents is a precondition error") {
  CHECK_THROWS_AS(paired_permutation_test(from_diffs({1.0})), PreconditionError);
}

TEST_CASE("exact test agrees with bitmask enumeration") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise(0.3, 1.0);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> d(3 + t % 10);
    for (auto& x : d) x = noise(rng);
    CHECK(paired_permutation_test(from_diffs(d)).p_value ==
          doctest::Approx(oracle::exact_two_sided_p(d)).epsilon(1e-12));
  }
}

TEST_CASE("invariance under shifts and relabeling") {
  const std::vector<double> d = {0.5, -0.2, 1.1, 0.9, -0.4, 0.7, 0.05, 1.3};
  const double p = paired_permutation_test(from_diffs(d)).p_value;
  CHECK(paired_permutation_test(from_diffs(d, 1000.0)).p_value == doctest::Approx(p));
  auto reversed = d;
  std::reverse(reversed.begin(), reversed.end());
  CHECK(paired_permutation_test(from_diffs(reversed)).p_value == doctest::Approx(p));
}

TEST_CASE("Monte Carlo is seeded, thread-count independent and close to exact") {
  std::vector<double> d = {0.4, -0.1, 0.8, 0.3, -0.5, 0.6, 0.2, 0.1, -0.3, 0.7, 0.25, 0.05};
  PermutationOptions mc;
  mc.exact_threshold = 0;
  mc.n_resamples = 20000;
  mc.seed = 9;
  const auto one = paired_permutation_test(from_diffs(d), mc);
  mc.threads = 4;
  const auto four = paired_permutation_test(from_diffs(d), mc);
  CHECK(!one.exact);
  CHECK(one.p_value == four.p_value);
  CHECK(std::abs(one.p_value - oracle::exact_two_sided_p(d)) < 0.02);
  mc.seed = 10;
  CHECK(paired_permutation_test(from_diffs(d), mc).p_value != one.p_value);
}

TEST_CASE("Monte Carlo p-value is never zero") {
  PermutationOptions mc;
  mc.exact_threshold = 0;
  mc.n_resamples = 1000;
  const auto r = paired_permutation_test(from_diffs(std::vector<double>(30, 1.0)), mc);
  CHECK(r.p_value == doctest::Approx(1.0 / 1001));
}

TEST_CASE("significance clusters") {
  SUBCASE("identical systems share a cluster") {
    SystemScores s = {{"A", scores({1, 2, 3})}, {"B", scores({1, 2, 3})}};
    const auto c = significance_clusters(s, Orientation::higher_better, 0.05, {});
    CHECK(c.size() == 1);
  }
  SUBCASE("constant gap of 4 on ten docs splits") {
    SystemScores s = {{"low", scores(std::vector<double>(10, 1.0))},
                      {"high", scores(std::vector<double>(10, 5.0))}};
    const auto c = significance_clusters(s, Orientation::higher_better, 0.05, {});
    REQUIRE(c.size() == 2);
    CHECK(c[0].systems == std::vector<std::string>{"high"});
    CHECK(c[1].systems == std::vector<std::string>{"low"});
  }
  SUBCASE("A and B together, C apart") {
    // A - B alternates +-1 (p = 1); A - C is a constant +3 (p = 2/1024).
    std::vector<double> a(10), b(10), c(10);
    for (int i = 0; i < 10; ++i) {
      a[i] = 10 + i;
      b[i] = a[i] + (i % 2 ? 1 : -1);
      c[i] = a[i] - 3;
    }
    SystemScores s = {{"A", scores(a)}, {"B", scores(b)}, {"C", scores(c)}};
    const auto clusters = significance_clusters(s, Orientation::higher_better, 0.05, {});
    REQUIRE(clusters.size() == 2);
    CHECK(clusters[0].systems.size() == 2);
    CHECK(clusters[1].systems == std::vector<std::string>{"C"});
    std::size_t total = 0;
    for (const auto& cl : clusters) total += cl.systems.size();
    CHECK(total == 3);
  }
}

TEST_CASE("per-domain deltas") {
  SystemScores s = {{"base", {{"n1", 10}, {"n2", 20}, {"l1", 40}}},
                    {"sys", {{"n1", 12}, {"n2", 21}, {"l1", 37}}}};
  const std::map<std::string, std::string> domains = {{"n1", "news"}, {"n2", "news"}, {"l1", "literary"}};
  const auto d = per_domain_deltas("base", {"sys", "base"}, s, domains);
  CHECK(d.at("news").at("sys") == doctest::Approx(1.5));
  CHECK(d.at("literary").at("sys") == doctest::Approx(-3.0));
  CHECK(d.at("news").at("base") == 0.0);
  CHECK_THROWS_AS(per_domain_deltas("base", {"sys"}, s, {{"n1", "news"}}), MissingDomain);
}

TEST_CASE("delta formatting and magnitude classes") {
  CHECK(format_delta(48.69 - 48.04) == "+0.65");
  CHECK(format_delta(59.65 - 59.38) == "+0.27");
  CHECK(format_delta(-1.034) == "-1.03");
  CHECK(format_delta(-0.001) == "+0.00");
  CHECK(to_string(delta_magnitude(0.23)) == "S");
  CHECK(to_string(delta_magnitude(0.31)) == "M");
  CHECK(to_string(delta_magnitude(0.53)) == "L");
  CHECK(to_string(delta_magnitude(1.03)) == "XL");
  CHECK(to_string(delta_magnitude(-0.53)) == "L");
}

TEST_CASE("permutation result json round-trip") {
  const auto r = paired_permutation_test(from_diffs(std::vector<double>(10, 1.0)));
  nlohmann::json j = r;
  CHECK(j.at("n_resamples") == "exact");
  const auto back = j.get<PermutationResult>();
  CHECK(back.p_value == r.p_value);
  CHECK(back.exact);
  CHECK(back.n_resamples == 1024);
}
