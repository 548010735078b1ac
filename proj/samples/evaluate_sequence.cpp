// Evaluates two synthetic active-power-reduction runs: one clean, one with a
// forced disconnection halfway through level 5.

#include <iostream>

#include "testkg/en50549.hpp"
#include "testkg/synth.hpp"

using namespace testkg;

static void report(const char* title, const en50549::Verdict& v) {
  std::cout << title << ": " << en50549::outcome_name(v.outcome) << '\n';
  for (std::size_t i = 0; i < v.per_level.size(); ++i) {
    const auto& level = v.per_level[i];
    std::cout << "  level " << i + 1 << "  expected " << level.expected << "  mean "
              << level.observed_mean << (level.within_tolerance ? "  ok" : "  out")
              << (level.connected ? "" : "  disconnected") << '\n';
  }
  for (const auto& reason : v.reasons) std::cout << "  note: " << reason << '\n';
}

int main() {
  auto spec = en50549::apr_spec(10000);

  auto clean = synth::generate_synthetic_trace(spec, 1.0, 0.002);
  report("clean run", en50549::evaluate(clean, spec));

  auto tripped = synth::generate_synthetic_trace(spec, 1.0, 0.002, 540.0);
  report("tripped run", en50549::evaluate(tripped, spec));
  return 0;
}
