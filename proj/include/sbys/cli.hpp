#pragma once

#include <vector>

#include "sbys/corpus.hpp"
#include "sbys/llm.hpp"

namespace sbys {

// Exit codes: 0 success, 1 partial failure or runtime error, 2 usage error.
int cli_main(int argc, char** argv);

// Deterministic offline responder for the mock backend. Translation turns
// echo the document (or segment) source; the structuring call gets a
// valid JSON object.
MockBackend::Responder corpus_mock_responder(std::vector<AssembledDocument> docs);

}  // namespace sbys
