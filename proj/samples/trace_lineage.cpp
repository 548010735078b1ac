// Records a two-step workflow execution (train a model, apply it), exports
// it as provenance RDF, and walks the lineage of the final output.

#include <iostream>

#include "testkg/prov.hpp"
#include "testkg/store.hpp"
#include "testkg/turtle.hpp"

using namespace testkg;

int main() {
  prov::WorkflowTemplate tmpl;
  tmpl.id = "twin-workflow";
  tmpl.variables = {{"inputData", prov::VariableKind::Data, "input data"},
                    {"config", prov::VariableKind::Parameter, "model configuration"},
                    {"model", prov::VariableKind::Data, "trained model"},
                    {"predictions", prov::VariableKind::Data, "predictions"}};
  tmpl.processes = {{"train", "train model", {"inputData", "config"}, {"model"}},
                    {"apply", "apply model", {"model", "inputData"}, {"predictions"}}};

  prov::ExecutionAccount account;
  account.id = "run-1";
  account.template_id = "twin-workflow";
  account.agents = {{"lab", "The Lab", prov::AgentKind::Organization}};
  account.entities = {{"ds1", "measured data", "inputData", {}},
                      {"cfg", "twin config", "config", {}},
                      {"model", "twin model", "model", {"ds1", "cfg"}},
                      {"ds3", "predicted data", "predictions", {"model"}}};
  account.activities = {{"a-train", "train", "lab", "2023-05-02T09:00:00Z",
                         "2023-05-02T10:30:00Z", {"ds1", "cfg"}, {"model"}},
                        {"a-apply", "apply", "lab", "2023-05-02T11:00:00Z",
                         "2023-05-02T11:05:00Z", {"model"}, {"ds3"}}};

  rdf::Graph g = prov::to_prov_rdf(account, &tmpl);
  std::cout << turtle::serialize_turtle(g) << '\n';

  store::Store st;
  st.load(g);
  std::string ds3 =
      prov::detail::mint(std::string(rdf::ns::data_base), "entity/", "ds3");
  std::cout << "upstream of ds3:" << '\n';
  for (const auto& iri : prov::upstream(st, ds3)) std::cout << "  " << iri << '\n';
  return 0;
}
