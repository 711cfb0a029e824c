#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <string>
#include <thread>
#include <vector>

#include "sbys/corpus.hpp"
#include "sbys/pipeline.hpp"
#include "sbys/run_io.hpp"

namespace sbys {

// Calls fn(i) for i in [0, n) on up to `concurrency` threads. Items are
// claimed in index order; fn must not throw.
template <class Fn>
void parallel_for(std::size_t n, std::size_t concurrency, Fn&& fn) {
  const std::size_t workers = std::max<std::size_t>(1, std::min(concurrency, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
}

struct DocumentFailure {
  std::string doc_id;
  std::string stage;
  std::string kind;
  std::string message;
};
void to_json(nlohmann::json& j, const DocumentFailure& f);

struct BatchOptions {
  std::size_t concurrency = 4;
  PipelineOptions pipeline;
};

struct BatchResult {
  std::vector<StageOutputs> outputs;  // successes, in input order
  std::vector<DocumentFailure> failures;
  RunManifest manifest;               // run-level fields left for the caller
  bool partial_failure() const { return !failures.empty(); }
};

// Runs the step-by-step pipeline over `docs` with document-level
// parallelism. A failing document is recorded and the batch continues.
BatchResult run_batch(const std::vector<AssembledDocument>& docs, const StageSet& stages,
                      const TranslationContext& ctx, const BatchOptions& options = {});

}  // namespace sbys
