// Prints one PASS/FAIL line per acceptance criterion. With arguments, runs
// only the listed criterion ids. Exit status 1 if any criterion fails.
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "kvar/acceptance.hpp"

int main(int argc, char** argv) {
  std::vector<int> ids;
  for (int i = 1; i < argc; ++i) {
    char* end = nullptr;
    long id = std::strtol(argv[i], &end, 10);
    if (*end != '\0' || id < 1 || id > kvar::kCriteria) {
      std::fprintf(stderr, "usage: %s [criterion 1-%d ...]\n", argv[0], kvar::kCriteria);
      return 2;
    }
    ids.push_back(static_cast<int>(id));
  }
  if (ids.empty()) ids = kvar::suite_criteria("all");

  kvar::AcceptanceRunner runner;
  bool all = true;
  for (int id : ids) {
    kvar::CheckOutcome c = runner.run(id);
    all = all && c.passed;
    std::printf("criterion %2d %s  %s: %s (%.2f s)\n", c.id, c.passed ? "PASS" : "FAIL", c.name.c_str(),
                c.detail.c_str(), c.seconds);
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
