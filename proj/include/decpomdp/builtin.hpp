#pragma once

#include <string>
#include <vector>

#include "decpomdp/types.hpp"

namespace decpomdp {

/// Names of the bundled toy models ("chain2", "toy2agent").
std::vector<std::string> builtin_model_names();

/// Raw document text of a bundled model (the files under models/ are
/// embedded at build time). Throws std::invalid_argument for unknown names.
const std::string& builtin_model_text(const std::string& name);

/// Parsed and validated bundled model.
DecPomdpModel builtin_model(const std::string& name);

}  // namespace decpomdp
