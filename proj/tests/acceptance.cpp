// One PASS/FAIL line per acceptance criterion; exits nonzero if any fails.
// Usage: acceptance [out_dir] [--serial]

#include <chrono>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <string>

#include "sburgers/suites.hpp"

int main(int argc, char** argv) {
  using namespace sburgers;
  std::string out_dir;
  Exec exec = Exec::parallel;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--serial") == 0)
      exec = Exec::serial;
    else
      out_dir = argv[i];
  }
  if (!out_dir.empty()) std::filesystem::create_directories(out_dir);

  const Tolerances tol;
  const auto t0 = std::chrono::steady_clock::now();
  auto results = acceptance_suites(tol, exec, out_dir);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  int failed = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    failed += r.pass ? 0 : 1;
    std::printf("%s %2zu %-20s %s\n", r.pass ? "PASS" : "FAIL", i + 1, r.name.c_str(), r.detail.c_str());
    for (const auto& [k, v] : r.metrics) std::printf("       %s = %.6g\n", k.c_str(), v);
  }
  std::printf("%zu criteria, %d failed, %.1f s\n", results.size(), failed, secs);
  return failed == 0 ? 0 : 1;
}
