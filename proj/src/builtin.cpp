#include "decpomdp/builtin.hpp"

#include <stdexcept>

#include "decpomdp/format.hpp"

#include "builtin_models.inc"

namespace decpomdp {

std::vector<std::string> builtin_model_names() { return {"chain2", "toy2agent"}; }

const std::string& builtin_model_text(const std::string& name) {
  static const std::string chain2(kChain2Text);
  static const std::string toy2agent(kToy2AgentText);
  if (name == "chain2") return chain2;
  if (name == "toy2agent") return toy2agent;
  throw std::invalid_argument("unknown builtin model '" + name +
                              "' (available: chain2, toy2agent)");
}

DecPomdpModel builtin_model(const std::string& name) {
  return parse_model(builtin_model_text(name), name);
}

}  // namespace decpomdp
