#pragma once

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "sbys/run_io.hpp"

namespace testing {

// Runs the sbys binary with `args`, output discarded. Returns the exit code.
inline int run_cli(const std::string& args, bool quiet = true) {
  const std::string cmd =
      std::string("\"") + SBYS_BIN + "\" " + args + (quiet ? " >/dev/null 2>&1" : "");
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

inline std::filesystem::path fresh_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// assemble -> translate (sbys all + zero-shot row) -> score -> sigtest -> report,
// under `root`. `backend_flags` picks the backend and cache.
inline bool full_flow(const std::filesystem::path& root, const std::string& backend_flags) {
  const auto a = (root / "assembled.jsonl").string();
  const auto full = (root / "runs" / "full").string();
  const auto zs = (root / "runs" / "zero").string();
  if (run_cli("assemble --input " SBYS_FIXTURES "/corpus_small.tsv --out " + a) != 0) return false;
  if (run_cli(backend_flags + " translate --corpus " + a + " --run-dir " + full) != 0) return false;
  if (run_cli(backend_flags + " translate --corpus " + a + " --run-dir " + zs + " --stages none") != 0)
    return false;
  if (run_cli("score --run-dir " + full + " --corpus " + a) != 0) return false;
  if (run_cli("score --run-dir " + zs + " --corpus " + a) != 0) return false;
  if (run_cli("--seed 17 sigtest --a " + full + " --b " + zs + " --out " + full +
           "/sigtests/full_vs_zero.json") != 0)
    return false;
  return run_cli("report --runs " + full + " " + zs) == 0;
}

}  // namespace testing
