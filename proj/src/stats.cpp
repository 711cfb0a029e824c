#include "sbys/stats.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <random>
#include <thread>

#include <fmt/core.h>

#include "sbys/error.hpp"

namespace sbys {

std::string_view to_string(Alternative alt) {
  switch (alt) {
    case Alternative::two_sided: return "two-sided";
    case Alternative::a_better: return "a-better";
    case Alternative::b_better: return "b-better";
  }
  return "unknown";
}

Alternative alternative_from_string(std::string_view name) {
  if (name == "two-sided" || name == "two_sided") return Alternative::two_sided;
  if (name == "a-better" || name == "a_better") return Alternative::a_better;
  if (name == "b-better" || name == "b_better") return Alternative::b_better;
  throw UsageError("alternative must be two-sided, a-better or b-better");
}

void to_json(nlohmann::json& j, const PermutationResult& r) {
  j = {{"p_value", r.p_value},
       {"observed_stat", r.observed_stat},
       {"n_resamples", r.exact ? nlohmann::json("exact") : nlohmann::json(r.n_resamples)},
       {"enumerated_patterns", r.exact ? nlohmann::json(r.n_resamples) : nlohmann::json(nullptr)},
       {"seed", r.seed},
       {"alternative", to_string(r.alternative)},
       {"degenerate", r.degenerate},
       {"n_docs", r.n_docs}};
}

void from_json(const nlohmann::json& j, PermutationResult& r) {
  r.p_value = j.at("p_value").get<double>();
  r.observed_stat = j.at("observed_stat").get<double>();
  const auto& n = j.at("n_resamples");
  r.exact = n.is_string();
  r.n_resamples = r.exact ? j.at("enumerated_patterns").get<std::size_t>()
                          : n.get<std::size_t>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.alternative = alternative_from_string(j.at("alternative").get<std::string>());
  r.degenerate = j.value("degenerate", false);
  r.n_docs = j.value("n_docs", std::size_t{0});
}

PairedScores pair_scores(const std::string& system_a, const std::map<std::string, double>& a,
                         const std::string& system_b, const std::map<std::string, double>& b,
                         Orientation orientation) {
  PairedScores out{system_a, system_b, {}, orientation};
  for (const auto& [doc, va] : a) {
    const auto it = b.find(doc);
    if (it == b.end()) {
      throw PreconditionError("document '" + doc + "' scored for " + system_a + " but not " +
                              system_b);
    }
    out.per_doc.push_back({doc, va, it->second});
  }
  if (a.size() != b.size()) {
    throw PreconditionError(system_b + " has documents that " + system_a + " lacks");
  }
  return out;
}

namespace {

// How each resampled mean is judged against the observed one.
struct ExtremeTest {
  Alternative alternative;
  Orientation orientation;
  double observed;
  double tolerance;

  bool operator()(double stat) const {
    switch (alternative) {
      case Alternative::two_sided:
        return std::abs(stat) >= std::abs(observed) - tolerance;
      case Alternative::a_better:
        return orientation == Orientation::higher_better ? stat >= observed - tolerance
                                                         : stat <= observed + tolerance;
      case Alternative::b_better:
        return orientation == Orientation::higher_better ? stat <= observed + tolerance
                                                         : stat >= observed - tolerance;
    }
    return false;
  }
};

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::size_t count_block(const std::vector<double>& diffs, const ExtremeTest& extreme,
                        std::uint64_t seed, std::size_t block, std::size_t count) {
  std::mt19937_64 rng(splitmix64(seed ^ splitmix64(block)));
  const double n = static_cast<double>(diffs.size());
  std::size_t hits = 0;
  for (std::size_t r = 0; r < count; ++r) {
    double sum = 0.0;
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < diffs.size(); ++i) {
      if (i % 64 == 0) bits = rng();
      sum += (bits & 1) ? -diffs[i] : diffs[i];
      bits >>= 1;
    }
    if (extreme(sum / n)) ++hits;
  }
  return hits;
}

}  // namespace

PermutationResult paired_permutation_test(const PairedScores& scores,
                                          const PermutationOptions& options) {
  const std::size_t n = scores.per_doc.size();
  if (n < 2) throw PreconditionError("permutation test needs at least two paired documents");

  std::vector<double> diffs;
  diffs.reserve(n);
  double scale = 0.0;
  for (const auto& e : scores.per_doc) {
    diffs.push_back(e.a - e.b);
    scale = std::max(scale, std::abs(e.a - e.b));
  }
  PermutationResult result;
  result.alternative = options.alternative;
  result.seed = options.seed;
  result.n_docs = n;
  result.observed_stat = std::accumulate(diffs.begin(), diffs.end(), 0.0) / n;

  if (scale == 0.0) {
    result.degenerate = true;
    result.p_value = 1.0;
    result.exact = n <= options.exact_threshold;
    result.n_resamples = result.exact ? (std::size_t{1} << n) : options.n_resamples;
    return result;
  }
  // Resampled means differ from the observed one by rounding only when they
  // are equal in exact arithmetic.
  const ExtremeTest extreme{options.alternative, scores.orientation, result.observed_stat,
                            1e-9 * scale};

  if (n <= options.exact_threshold) {
    // Gray-code walk: each step flips one sign, so the sum updates in O(1).
    const std::uint64_t patterns = std::uint64_t{1} << n;
    double sum = std::accumulate(diffs.begin(), diffs.end(), 0.0);
    std::vector<int> sign(n, 1);
    std::uint64_t hits = extreme(sum / n) ? 1 : 0;
    for (std::uint64_t k = 1; k < patterns; ++k) {
      const auto i = static_cast<std::size_t>(std::countr_zero(k));
      sum -= 2.0 * sign[i] * diffs[i];
      sign[i] = -sign[i];
      if (extreme(sum / n)) ++hits;
    }
    result.exact = true;
    result.n_resamples = patterns;
    result.p_value = static_cast<double>(hits) / static_cast<double>(patterns);
    return result;
  }

  const std::size_t blocks = (options.n_resamples + kResampleBlock - 1) / kResampleBlock;
  std::vector<std::size_t> block_hits(blocks, 0);
  auto run_block = [&](std::size_t b) {
    const std::size_t count = std::min(kResampleBlock, options.n_resamples - b * kResampleBlock);
    block_hits[b] = count_block(diffs, extreme, options.seed, b, count);
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(options.threads, blocks));
  if (threads == 1) {
    for (std::size_t b = 0; b < blocks; ++b) run_block(b);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t b = t; b < blocks; b += threads) run_block(b);
      });
    }
  }
  const auto hits = std::accumulate(block_hits.begin(), block_hits.end(), std::size_t{0});
  result.exact = false;
  result.n_resamples = options.n_resamples;
  result.p_value = (1.0 + hits) / (1.0 + options.n_resamples);
  return result;
}

double mean_score(const std::map<std::string, double>& per_doc) {
  if (per_doc.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& [doc, v] : per_doc) sum += v;
  return sum / per_doc.size();
}

std::vector<SignificanceCluster> significance_clusters(const SystemScores& scores,
                                                       Orientation orientation, double alpha,
                                                       const PermutationOptions& test) {
  std::vector<std::pair<std::string, double>> ranked;
  for (const auto& [system, per_doc] : scores) ranked.emplace_back(system, mean_score(per_doc));
  // Stable on name for equal means, so clustering is deterministic.
  std::stable_sort(ranked.begin(), ranked.end(), [&](const auto& x, const auto& y) {
    return strictly_better(x.second, y.second, orientation);
  });
  std::vector<SignificanceCluster> clusters;
  for (const auto& [system, mean] : ranked) {
    if (!clusters.empty()) {
      auto& current = clusters.back();
      const auto& best = current.systems.front();
      const auto paired =
          pair_scores(best, scores.at(best), system, scores.at(system), orientation);
      const auto p = paired_permutation_test(paired, test).p_value;
      if (p >= alpha) {
        current.systems.push_back(system);
        current.p_values.push_back(p);
        continue;
      }
    }
    clusters.push_back({{system}, {1.0}});
  }
  return clusters;
}

DomainDeltas per_domain_deltas(const std::string& baseline, const std::vector<std::string>& others,
                               const SystemScores& scores,
                               const std::map<std::string, std::string>& domains) {
  const auto base_it = scores.find(baseline);
  if (base_it == scores.end()) {
    throw PreconditionError("baseline system '" + baseline + "' has no scores");
  }
  auto by_domain = [&](const std::map<std::string, double>& per_doc) {
    std::map<std::string, std::map<std::string, double>> out;
    for (const auto& [doc, v] : per_doc) {
      const auto d = domains.find(doc);
      if (d == domains.end()) throw MissingDomain("document '" + doc + "' has no domain");
      out[d->second][doc] = v;
    }
    return out;
  };
  const auto base = by_domain(base_it->second);
  DomainDeltas deltas;
  for (const auto& system : others) {
    const auto it = scores.find(system);
    if (it == scores.end()) throw PreconditionError("system '" + system + "' has no scores");
    const auto sys = by_domain(it->second);
    for (const auto& [domain, base_docs] : base) {
      const auto s = sys.find(domain);
      if (s == sys.end()) {
        throw MissingDomain("system '" + system + "' has no documents in domain '" + domain + "'");
      }
      deltas[domain][system] = mean_score(s->second) - mean_score(base_docs);
    }
  }
  return deltas;
}

DeltaMagnitude delta_magnitude(double delta) {
  // Classify the value as displayed, so "0.30" is never "S".
  const double shown = std::round(std::abs(delta) * 100.0) / 100.0;
  if (shown < 0.3) return DeltaMagnitude::small;
  if (shown < 0.5) return DeltaMagnitude::medium;
  if (shown < 1.0) return DeltaMagnitude::large;
  return DeltaMagnitude::x_large;
}

std::string_view to_string(DeltaMagnitude m) {
  switch (m) {
    case DeltaMagnitude::small: return "S";
    case DeltaMagnitude::medium: return "M";
    case DeltaMagnitude::large: return "L";
    case DeltaMagnitude::x_large: return "XL";
  }
  return "?";
}

std::string format_delta(double delta) {
  auto text = fmt::format("{:+.2f}", delta);
  if (text == "-0.00") text = "+0.00";
  return text;
}

}  // namespace sbys
