// Regenerates the fixtures/ tree: suite and test files, synthetic 1 Hz
// measurement logs (seeded, so byte-stable), system configurations, and the
// knowledge-graph files (annotation, test descriptions, provenance). Run
// from the repository root:
//
//   build/tools/make-fixtures fixtures
//
// The annotation goldens are produced through the same parse/annotate path
// the CLI uses, so `testkg annotate` over the fixture inputs reproduces them
// byte for byte.

#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "testkg/catalog.hpp"
#include "testkg/checksum.hpp"
#include "testkg/en50549.hpp"
#include "testkg/ingest.hpp"
#include "testkg/prov.hpp"
#include "testkg/rdf.hpp"
#include "testkg/scm.hpp"
#include "testkg/synth.hpp"
#include "testkg/trace.hpp"
#include "testkg/turtle.hpp"
#include "testkg/vocab.hpp"

namespace fs = std::filesystem;
using namespace testkg;

namespace {

fs::path g_root;

void emit(const fs::path& relative, const std::string& content) {
  fs::path path = g_root / relative;
  fs::create_directories(path.parent_path());
  catalog::detail::write_file(path, content);
  std::cout << "wrote " << path.string() << '\n';
}

constexpr const char* kSuite = R"(# Conformance suite for the PV inverter setup.

[suite]
name = pv-conformance

[members]
test = voltage-range
test = power-reduction

[params]
Un = 230
Pn = 10000
)";

constexpr const char* kVoltageRangeTest = R"([test]
name = voltage-range
script = scripts/voltage_range.py
standard = EN 50549-10

[params]
Un = 230
levels = 0.85,1.0,1.1
dwell = 600
)";

constexpr const char* kPowerReductionTest = R"([test]
name = power-reduction
script = scripts/power_reduction.py
standard = EN 50549-10

[params]
Pn = 10000
dwell = 120
window = 60
)";

constexpr const char* kChannels = R"({
  "AC_VRMS": {"phenomenon": "Voltage", "unit": "V"},
  "AC_I": {"phenomenon": "Current", "unit": "A"},
  "AC_P": {"phenomenon": "ActivePower", "unit": "W"},
  "AC_Q": {"phenomenon": "ReactivePower", "unit": "var"},
  "Breaker": {"phenomenon": "https://w3id.org/testkg/data/phenomenon/BreakerState", "unit": "state"}
}
)";

constexpr const char* kChannelsGap = R"({
  "AC_VRMS": {"phenomenon": "Voltage", "unit": "V"},
  "AC_I": {"phenomenon": "Current", "unit": "A"},
  "AC_P": {"phenomenon": "ActivePower", "unit": "W"},
  "AC_Q": {"phenomenon": "ReactivePower", "unit": "var"}
}
)";

std::string context_json(const std::string& dataset_id, const std::string& title) {
  return "{\n"
         "  \"organization\": {\"id\": \"ucd\", \"label\": \"UCD laboratory\"},\n"
         "  \"systemConfigId\": \"ucd-setup\",\n"
         "  \"datasetId\": \"" + dataset_id + "\",\n"
         "  \"datasetTitle\": \"" + title + "\"\n"
         "}\n";
}

std::string setup_json(const std::string& id, int phases, double operating_point) {
  return "{\n"
         "  \"id\": \"" + id + "\",\n"
         "  \"testSetup\": true,\n"
         "  \"systems\": [\n"
         "    {\n"
         "      \"id\": \"pv-inverter\",\n"
         "      \"type\": \"PVInverter\",\n"
         "      \"role\": \"SuT\",\n"
         "      \"connectionPoints\": [\n"
         "        {\"id\": \"ac-1\", \"domain\": \"ElectricalAC\", \"label\": \"AC terminal\"},\n"
         "        {\"id\": \"dc-1\", \"domain\": \"ElectricalDC\", \"label\": \"DC input\"},\n"
         "        {\"id\": \"ctl-1\", \"domain\": \"ICT\", \"label\": \"control interface\"}\n"
         "      ],\n"
         "      \"attributes\": [\n"
         "        {\"name\": \"nominalPower\", \"value\": 10000, \"unit\": \"W\"},\n"
         "        {\"name\": \"nominalVoltage\", \"value\": 230, \"unit\": \"V\"},\n"
         "        {\"name\": \"operatingPoint\", \"value\": " +
         numfmt::format_double(operating_point) + "},\n"
         "        {\"name\": \"phases\", \"value\": " + std::to_string(phases) + "}\n"
         "      ]\n"
         "    },\n"
         "    {\n"
         "      \"id\": \"grid-sim\",\n"
         "      \"type\": \"GridSimulator\",\n"
         "      \"role\": \"testEquipment\",\n"
         "      \"connectionPoints\": [{\"id\": \"ac-1\", \"domain\": \"ElectricalAC\"}],\n"
         "      \"attributes\": [{\"name\": \"nominalVoltage\", \"value\": 230, \"unit\": \"V\"}]\n"
         "    },\n"
         "    {\n"
         "      \"id\": \"pv-sim\",\n"
         "      \"type\": \"DCAmplifier\",\n"
         "      \"role\": \"testEquipment\",\n"
         "      \"connectionPoints\": [{\"id\": \"dc-1\", \"domain\": \"ElectricalDC\"}]\n"
         "    },\n"
         "    {\n"
         "      \"id\": \"rt-target\",\n"
         "      \"type\": \"RealTimeComputer\",\n"
         "      \"role\": \"infrastructure\",\n"
         "      \"connectionPoints\": [{\"id\": \"ctl-1\", \"domain\": \"ICT\"}]\n"
         "    },\n"
         "    {\n"
         "      \"id\": \"grid-analyzer\",\n"
         "      \"type\": \"MeasurementSensor\",\n"
         "      \"role\": \"testEquipment\",\n"
         "      \"connectionPoints\": [{\"id\": \"ac-1\", \"domain\": \"ElectricalAC\"}]\n"
         "    }\n"
         "  ],\n"
         "  \"connections\": [\n"
         "    {\"id\": \"c-ac\", \"from\": \"pv-inverter.ac-1\", \"to\": \"grid-sim.ac-1\"},\n"
         "    {\"id\": \"c-dc\", \"from\": \"pv-sim.dc-1\", \"to\": \"pv-inverter.dc-1\"},\n"
         "    {\"id\": \"c-ctl\", \"from\": \"rt-target.ctl-1\", \"to\": \"pv-inverter.ctl-1\"},\n"
         "    {\"id\": \"c-meas\", \"from\": \"grid-analyzer.ac-1\", \"to\": \"pv-inverter.ac-1\"}\n"
         "  ]\n"
         "}\n";
}

// Voltage range log: sequence voltage plus a steady operating-point power
// channel; optionally the breaker-state channel whose absence the gap
// fixture demonstrates.
std::string voltage_range_csv(bool with_breaker) {
  auto spec = en50549::nor_spec(230);
  auto tr = synth::generate_synthetic_trace(spec, 1.0, 0.002, std::nullopt, 42);
  tr.channels.push_back({"AC_P", vocab::annot("ActivePower"), "W"});
  for (auto& row : tr.rows) row.push_back(6200);
  if (with_breaker) tr = synth::with_breaker_channel(std::move(tr));
  return trace::write_log(tr);
}

// Power reduction log: generated power sequence plus steady voltage, derived
// current (rounded to mA), and zero reactive power.
std::string power_reduction_csv() {
  auto spec = en50549::apr_spec(10000);
  auto generated = synth::generate_synthetic_trace(spec, 1.0, 0.002, std::nullopt, 43);
  trace::MeasurementTrace tr;
  tr.channels = {{"AC_VRMS", vocab::annot("Voltage"), "V"},
                 {"AC_I", vocab::annot("Current"), "A"},
                 {"AC_P", vocab::annot("ActivePower"), "W"},
                 {"AC_Q", vocab::annot("ReactivePower"), "var"}};
  tr.times = generated.times;
  for (const auto& row : generated.rows) {
    double p = row[0];
    double i = std::round(p / 230.0 * 1000.0) / 1000.0;
    tr.rows.push_back({230, i, p, 0});
  }
  return trace::write_log(tr);
}

std::string breaker_ph() { return synth::breaker_phenomenon(); }

// Test descriptions: specifications with their required phenomena, the
// object under investigation, and links from the annotated test cases.
rdf::Graph htd_graph(const std::string& base) {
  rdf::Graph g;
  g.add_prefix("annot", rdf::ns::annot);
  g.add_prefix("htd", rdf::ns::htd);
  g.add_prefix("rdf", rdf::ns::rdf);
  g.add_prefix("rdfs", rdf::ns::rdfs);
  auto type = rdf::make_iri(rdf::rdf_type);
  auto label = rdf::make_iri(rdf::rdfs_label);
  auto requires_ph = rdf::make_iri(vocab::htd("requiresPhenomenon"));

  auto spec_vr = rdf::make_iri(base + "spec/voltage-range");
  auto spec_pr = rdf::make_iri(base + "spec/power-reduction");
  auto breaker = rdf::make_iri(breaker_ph());

  g.insert(spec_vr, type, rdf::make_iri(vocab::htd("TestSpecification")));
  g.insert(spec_vr, label, rdf::make_literal("voltage range test specification"));
  g.insert(spec_vr, requires_ph, rdf::make_iri(vocab::annot("Voltage")));
  g.insert(spec_vr, requires_ph, breaker);

  g.insert(spec_pr, type, rdf::make_iri(vocab::htd("TestSpecification")));
  g.insert(spec_pr, label, rdf::make_literal("power reduction test specification"));
  g.insert(spec_pr, requires_ph, rdf::make_iri(vocab::annot("ActivePower")));
  g.insert(spec_pr, requires_ph, breaker);

  g.insert(breaker, type, rdf::make_iri(vocab::annot("Phenomenon")));
  g.insert(breaker, label, rdf::make_literal("breaker state"));

  auto exp_vr = rdf::make_iri(base + "experiment/voltage-range");
  auto exp_pr = rdf::make_iri(base + "experiment/power-reduction");
  auto has_experiment = rdf::make_iri(vocab::htd("hasExperiment"));
  g.insert(exp_vr, type, rdf::make_iri(vocab::htd("ExperimentSpecification")));
  g.insert(exp_vr, label, rdf::make_literal("voltage range bench procedure"));
  g.insert(spec_vr, has_experiment, exp_vr);
  g.insert(exp_pr, type, rdf::make_iri(vocab::htd("ExperimentSpecification")));
  g.insert(exp_pr, label, rdf::make_literal("power reduction bench procedure"));
  g.insert(spec_pr, has_experiment, exp_pr);

  auto oui = rdf::make_iri(base + "oui/pv-inverter");
  g.insert(oui, type, rdf::make_iri(vocab::htd("ObjectUnderInvestigation")));
  g.insert(oui, label, rdf::make_literal("PV inverter"));

  auto has_spec = rdf::make_iri(vocab::htd("hasSpecification"));
  auto investigates = rdf::make_iri(vocab::htd("investigates"));
  auto test_vr = rdf::make_iri(base + "test/voltage-range");
  auto test_pr = rdf::make_iri(base + "test/power-reduction");
  g.insert(test_vr, has_spec, spec_vr);
  g.insert(test_vr, investigates, oui);
  g.insert(test_pr, has_spec, spec_pr);
  g.insert(test_pr, investigates, oui);
  return g;
}

prov::WorkflowTemplate conformance_template() {
  prov::WorkflowTemplate tmpl;
  tmpl.id = "pv-conformance";
  tmpl.variables = {{"setup", prov::VariableKind::Parameter, "system configuration"},
                    {"prLog", prov::VariableKind::Data, "power reduction log"},
                    {"vrLog", prov::VariableKind::Data, "voltage range log"},
                    {"bundle", prov::VariableKind::Data, "published dataset"}};
  tmpl.processes = {
      {"run-power-reduction", "run the power reduction sequence", {"setup"}, {"prLog"}},
      {"run-voltage-range", "run the voltage range sequence", {"setup"}, {"vrLog"}},
      {"assemble-dataset", "assemble the published dataset", {"prLog", "vrLog"}, {"bundle"}}};
  return tmpl;
}

// Execution account for one conformance run. Entity ids are the annotation
// IRIs (dataset, logs, configuration), so the merged knowledge graph links
// provenance to the annotated artifacts. Logs are numbered in sorted test
// name order: log/1 = power-reduction, log/2 = voltage-range.
prov::ExecutionAccount conformance_account(const std::string& base,
                                           const std::string& dataset_id) {
  std::string org = base + "org/ucd";
  std::string config = base + "config/ucd-setup";
  std::string dataset = base + "dataset/" + dataset_id;
  std::string pr_log = dataset + "/log/1";
  std::string vr_log = dataset + "/log/2";

  prov::ExecutionAccount account;
  account.id = dataset_id + "-run";
  account.template_id = "pv-conformance";
  account.agents = {{org, "UCD laboratory", prov::AgentKind::Organization}};
  account.entities = {{config, "UCD test setup", "setup", {}},
                      {pr_log, "power reduction log", "prLog", {config}},
                      {vr_log, "voltage range log", "vrLog", {config}},
                      {dataset, "published dataset", "bundle", {pr_log, vr_log}}};
  account.activities = {{"run-pr", "run-power-reduction", org, "2023-06-12T09:00:00Z",
                         "2023-06-12T09:24:00Z", {config}, {pr_log}},
                        {"run-vr", "run-voltage-range", org, "2023-06-12T10:00:00Z",
                         "2023-06-12T10:30:00Z", {config}, {vr_log}},
                        {"assemble", "assemble-dataset", org, "2023-06-12T11:00:00Z",
                         "2023-06-12T11:05:00Z", {pr_log, vr_log}, {dataset}}};
  return account;
}

rdf::Graph prov_graph(const std::string& base, const std::string& dataset_id) {
  auto tmpl = conformance_template();
  auto account = conformance_account(base, dataset_id);
  rdf::Graph g = prov::to_template_rdf(tmpl, base);
  rdf::merge(g, prov::to_prov_rdf(account, &tmpl, base));

  // Cross-viewpoint links checked by the completeness rules: the account
  // names its test specifications and the system configuration.
  g.add_prefix("htd", rdf::ns::htd);
  g.add_prefix("scm", rdf::ns::scm);
  auto acc = rdf::make_iri(base + "account/" + account.id);
  g.insert(acc, rdf::make_iri(vocab::htd("hasSpecification")),
           rdf::make_iri(base + "spec/voltage-range"));
  g.insert(acc, rdf::make_iri(vocab::htd("hasSpecification")),
           rdf::make_iri(base + "spec/power-reduction"));
  g.insert(acc, rdf::make_iri(vocab::htd("usesSystemConfiguration")),
           rdf::make_iri(base + "config/ucd-setup"));
  return g;
}

// Mirrors the CLI annotate path over in-memory inputs so the committed
// golden equals the CLI output byte for byte.
std::string annotation_ttl(const std::string& dataset_id, const std::string& title,
                           const std::string& channels,
                           const std::map<std::string, std::string>& logs) {
  auto suite = ingest::parse_suite(kSuite);
  std::vector<ingest::TestConfig> tests = {ingest::parse_test(kVoltageRangeTest),
                                           ingest::parse_test(kPowerReductionTest)};
  auto channel_map = ingest::read_channel_map_json(channels);
  auto ctx = ingest::read_context_json(context_json(dataset_id, title));

  std::map<std::string, trace::MeasurementTrace> traces;
  for (const auto& [name, csv] : logs) {
    auto tr = trace::parse_log(csv, channel_map);
    tr.source_path = "logs/" + name + ".csv";
    tr.sha256 = checksum::sha256_hex(csv);
    traces[name] = std::move(tr);
  }
  return turtle::serialize_turtle(ingest::annotate(suite, tests, traces, ctx));
}

void write_pv_fixture(const std::string& dir, const std::string& dataset_id,
                      const std::string& title, bool with_breaker) {
  const char* channels = with_breaker ? kChannels : kChannelsGap;
  std::string vr_csv = voltage_range_csv(with_breaker);
  std::string pr_csv = power_reduction_csv();
  std::string base(rdf::ns::data_base);

  emit(dir + "/suite.ste", kSuite);
  emit(dir + "/tests/voltage-range.tst", kVoltageRangeTest);
  emit(dir + "/tests/power-reduction.tst", kPowerReductionTest);
  emit(dir + "/channels.json", channels);
  emit(dir + "/context.json", context_json(dataset_id, title));
  emit(dir + "/logs/voltage-range.csv", vr_csv);
  emit(dir + "/logs/power-reduction.csv", pr_csv);
  emit(dir + "/scm/ucd-setup.json", setup_json("ucd-setup", 1, 0.62));
  emit(dir + "/kg/annotation.ttl",
       annotation_ttl(dataset_id, title, channels,
                      {{"voltage-range", vr_csv}, {"power-reduction", pr_csv}}));
  emit(dir + "/kg/htd.ttl", turtle::serialize_turtle(htd_graph(base)));
  emit(dir + "/kg/prov.ttl", turtle::serialize_turtle(prov_graph(base, dataset_id)));
  emit(dir + "/kg/scm-ucd.ttl",
       turtle::serialize_turtle(
           scm::to_rdf(scm::read_configuration_json(setup_json("ucd-setup", 1, 0.62)))));
  if (with_breaker) {
    // The comparison setup: three-phase inverter at a higher operating point.
    emit(dir + "/scm/zhaw-setup.json", setup_json("zhaw-setup", 3, 0.92));
    emit(dir + "/kg/scm-zhaw.ttl",
         turtle::serialize_turtle(scm::to_rdf(
             scm::read_configuration_json(setup_json("zhaw-setup", 3, 0.92)))));
  }
}

prov::WorkflowTemplate twin_template() {
  prov::WorkflowTemplate tmpl;
  tmpl.id = "twin-workflow";
  tmpl.variables = {{"trainingData", prov::VariableKind::Data, "training data"},
                    {"operationalData", prov::VariableKind::Data, "operational data"},
                    {"configuration", prov::VariableKind::Parameter, "model configuration"},
                    {"implementation", prov::VariableKind::Data, "model implementation"},
                    {"model", prov::VariableKind::Data, "digital twin model"},
                    {"predictions", prov::VariableKind::Data, "predicted series"}};
  tmpl.processes = {{"train-twin",
                     "train the digital twin",
                     {"trainingData", "configuration", "implementation"},
                     {"model"}},
                    {"apply-twin",
                     "apply the twin to operational data",
                     {"model", "operationalData"},
                     {"predictions"}}};
  return tmpl;
}

prov::ExecutionAccount twin_account() {
  prov::ExecutionAccount account;
  account.id = "twin-run-1";
  account.template_id = "twin-workflow";
  account.agents = {{"twin-team", "digital twin team", prov::AgentKind::Organization}};
  account.entities = {{"DS1", "DS1 field measurements", "trainingData", {}},
                      {"DS2", "DS2 operational measurements", "operationalData", {}},
                      {"modelConfig", "twin model configuration", "configuration", {}},
                      {"code", "twin implementation", "implementation", {}},
                      {"twinModel", "trained twin model", "model",
                       {"DS1", "modelConfig", "code"}},
                      {"DS3", "DS3 predicted series", "predictions", {"twinModel", "DS2"}}};
  account.activities = {{"train", "train-twin", "twin-team", "2023-07-03T08:00:00Z",
                         "2023-07-03T14:00:00Z", {"DS1", "modelConfig", "code"},
                         {"twinModel"}},
                        {"apply", "apply-twin", "twin-team", "2023-07-04T08:00:00Z",
                         "2023-07-04T08:10:00Z", {"twinModel", "DS2"}, {"DS3"}}};
  return account;
}

void write_twin_fixture() {
  auto tmpl = twin_template();
  auto account = twin_account();
  emit("twin/kg/template.ttl", turtle::serialize_turtle(prov::to_template_rdf(tmpl)));
  emit("twin/kg/provenance.ttl",
       turtle::serialize_turtle(prov::to_prov_rdf(account, &tmpl)));

  // Placeholder series: the twin chain is a provenance fixture, not a
  // numerics one, so three rows per file suffice.
  emit("twin/data/ds1.csv", "time,IRRAD\n0,812.4\n60,815.1\n120,809.8\n");
  emit("twin/data/ds2.csv", "time,IRRAD\n0,644.9\n60,651.2\n120,648.3\n");
  emit("twin/data/ds3.csv", "time,AC_P\n0,6190.2\n60,6243.7\n120,6180.5\n");
  emit("twin/channels.json",
       "{\n"
       "  \"IRRAD\": {\"phenomenon\": \"" + std::string(rdf::ns::data_base) +
           "phenomenon/Irradiance\", \"unit\": \"W/m2\"},\n"
       "  \"AC_P\": {\"phenomenon\": \"ActivePower\", \"unit\": \"W\"}\n"
       "}\n");
}

}  // namespace

int main(int argc, char** argv) {
  g_root = argc > 1 ? argv[1] : "fixtures";
  try {
    write_pv_fixture("ucd", "ucd-2023", "PV inverter conformance dataset (single-phase)",
                     true);
    write_pv_fixture("ucd-gap", "ucd-gap-2023",
                     "PV inverter conformance dataset (incomplete annotation example)",
                     false);
    write_twin_fixture();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
