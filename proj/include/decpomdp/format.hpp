#pragma once

#include <span>
#include <string>

#include "decpomdp/solver.hpp"
#include "decpomdp/types.hpp"

namespace decpomdp {

/// A model file together with its resolved, validated instance.
struct ModelDocument {
  std::string text;
  std::string source_name;
  DecPomdpModel model;
};

/// Parses the line-oriented model dialect ('#' comments; header keys in
/// order agents/discount/values/states/actions/observations/start; body
/// lines T:/O:/R: with label or numeric indices and '*' wildcards; 'uniform'
/// row expansion). Unassigned transition/observation entries default to 0;
/// completed rows must be stochastic within 1e-9 and are renormalized
/// exactly; duplicate cell assignment is an error. Observation tables
/// condition on the new state and the previous joint action.
/// Throws ParseError with a line number.
DecPomdpModel parse_model(const std::string& text, const std::string& source_name = "<input>");

ModelDocument parse_model_document(std::string text, std::string source_name);

/// Canonical document for a model; parse(serialize(m)) == m entrywise.
std::string serialize_model(const DecPomdpModel& model);

/// Policy documents: self-describing key/value blocks in the same
/// line-oriented style. Values printed with 17 significant digits, so a
/// round trip reproduces every entry exactly.
std::string serialize_policy(const JointPolicy& policy);
JointPolicy parse_policy(const std::string& text);

/// CSV with header `iter,J,inner_iters,elapsed_ms,algo`, one row per outer
/// iteration, locale-independent formatting.
std::string write_trace_csv(std::span<const IterationTrace> trace);

}  // namespace decpomdp
