#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sbys/metrics.hpp"

namespace sbys {

struct PairedScores {
  std::string system_a;
  std::string system_b;
  struct Entry {
    std::string doc_id;
    double a = 0.0;
    double b = 0.0;
  };
  std::vector<Entry> per_doc;
  Orientation orientation = Orientation::higher_better;
};

// Builds a paired design from two doc_id -> score maps. Throws
// PreconditionError unless both cover exactly the same documents.
PairedScores pair_scores(const std::string& system_a, const std::map<std::string, double>& a,
                         const std::string& system_b, const std::map<std::string, double>& b,
                         Orientation orientation);

// a_better / b_better are read through the metric's orientation.
enum class Alternative { two_sided, a_better, b_better };
std::string_view to_string(Alternative alt);
Alternative alternative_from_string(std::string_view name);

inline constexpr std::size_t kExactThreshold = 20;
inline constexpr std::size_t kDefaultResamples = 100'000;
inline constexpr double kDefaultAlpha = 0.05;

struct PermutationResult {
  double p_value = 1.0;
  double observed_stat = 0.0;  // mean(a - b)
  bool exact = false;
  std::size_t n_resamples = 0;  // 2^n when exact
  std::uint64_t seed = 0;
  Alternative alternative = Alternative::two_sided;
  bool degenerate = false;  // every difference was zero
  std::size_t n_docs = 0;
};
void to_json(nlohmann::json& j, const PermutationResult& r);
void from_json(const nlohmann::json& j, PermutationResult& r);

struct PermutationOptions {
  Alternative alternative = Alternative::two_sided;
  std::size_t n_resamples = kDefaultResamples;
  std::uint64_t seed = 0;
  std::size_t exact_threshold = kExactThreshold;
  std::size_t threads = 1;  // Monte Carlo only; the result does not depend on it
};

// Sign-flip permutation test on the per-document differences a - b.
// Exact enumeration of all 2^n sign patterns when n <= exact_threshold;
// otherwise Monte Carlo with p = (1 + #extreme) / (1 + n_resamples).
// Resamples are drawn in fixed blocks of kResampleBlock, block k seeded from
// (seed, k), so sharding across threads never changes the result.
// Throws PreconditionError for fewer than two documents.
PermutationResult paired_permutation_test(const PairedScores& scores,
                                          const PermutationOptions& options = {});

inline constexpr std::size_t kResampleBlock = 4096;

// system -> doc_id -> score
using SystemScores = std::map<std::string, std::map<std::string, double>>;

double mean_score(const std::map<std::string, double>& per_doc);

struct SignificanceCluster {
  std::vector<std::string> systems;  // best first
  std::vector<double> p_values;      // vs systems.front(); first entry 1.0
};

// Systems sorted best-first by mean; each joins the current cluster iff its
// test against the cluster's best member gives p >= alpha.
std::vector<SignificanceCluster> significance_clusters(const SystemScores& scores,
                                                       Orientation orientation, double alpha,
                                                       const PermutationOptions& test);

// domain -> system -> mean(system) - mean(baseline) over that domain.
using DomainDeltas = std::map<std::string, std::map<std::string, double>>;

// `domains` maps doc_id -> domain. Throws MissingDomain for a scored
// document with no domain and PreconditionError for unknown systems.
DomainDeltas per_domain_deltas(const std::string& baseline, const std::vector<std::string>& others,
                               const SystemScores& scores,
                               const std::map<std::string, std::string>& domains);

// Presentation class of a delta's magnitude.
enum class DeltaMagnitude { small, medium, large, x_large };
DeltaMagnitude delta_magnitude(double delta);
std::string_view to_string(DeltaMagnitude m);  // "S", "M", "L", "XL"

// Signed, two decimals: "+0.65", "-1.03". Values that round to zero print "+0.00".
std::string format_delta(double delta);

}  // namespace sbys
