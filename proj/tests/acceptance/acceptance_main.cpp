// One line per primary acceptance criterion; exit status is the number of
// failed criteria.
#include <chrono>
#include <cstdio>

#include "criteria.hpp"

int main() {
  int failed = 0;
  for (const auto& c : acceptance::primary_criteria()) {
    const auto t0 = std::chrono::steady_clock::now();
    testing_support::PropertyResult r = c.check();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_budget = secs <= c.budget_s;
    const bool pass = r.ok && in_budget;
    if (!pass) ++failed;
    std::printf("[%s] %-22s %7.2fs (budget %.0fs) %zu cases: %s%s\n", pass ? "PASS" : "FAIL", c.name.c_str(), secs,
                c.budget_s, r.cases, r.detail.c_str(), in_budget ? "" : " [over budget]");
    std::fflush(stdout);
  }
  return failed;
}
