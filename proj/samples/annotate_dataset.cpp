// Builds an annotation graph for a one-test suite with a synthetic log and
// prints it as Turtle.

#include <iostream>

#include "testkg/en50549.hpp"
#include "testkg/ingest.hpp"
#include "testkg/synth.hpp"
#include "testkg/turtle.hpp"

using namespace testkg;

int main() {
  ingest::SuiteConfig suite;
  suite.suite_name = "demo-suite";
  suite.test_refs = {"voltage-range"};

  ingest::TestConfig test;
  test.test_name = "voltage-range";
  test.script_ref = "scripts/voltage_range.py";
  test.standard_ref = "EN 50549-10:2022";
  test.params["Un"] = 230.0;

  auto spec = en50549::nor_spec(230);
  auto tr = synth::with_breaker_channel(synth::generate_synthetic_trace(spec, 1.0, 0.0));
  tr.source_path = "logs/voltage-range.csv";

  ingest::AnnotationContext ctx;
  ctx.organization_id = "demo-lab";
  ctx.organization_label = "Demo Laboratory";
  ctx.system_config_id = "demo-setup";
  ctx.dataset_id = "demo-run-1";

  rdf::Graph g = ingest::annotate(suite, {test}, {{"voltage-range", tr}}, ctx);
  std::cout << turtle::serialize_turtle(g);
  return 0;
}
