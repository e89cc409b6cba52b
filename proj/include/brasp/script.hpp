#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "brasp/harness.hpp"

namespace brasp {

// Object JSON: {"x": .., "y": ..} or {"hilbert": h}, plus optional
// "keywords" (list) and "payload" (string).
SpatioTextualObject parse_object_json(std::string_view json, const GridSpec& grid);
std::vector<SpatioTextualObject> parse_objects_jsonl(std::string_view text, const GridSpec& grid);
std::string object_to_json(const SpatioTextualObject& obj);

// Query JSON: {"rect": {"x1","y1","x2","y2"}} or {"intervals": [[lo, hi], ..]},
// plus "keywords".
BooleanRangeQuery parse_query_json(std::string_view json, const GridSpec& grid);

struct ScriptAction {
  enum class Op { kIngest, kBuild, kShuffle, kQuery, kRedistribute, kUpdate };
  Op op = Op::kBuild;
  std::vector<SpatioTextualObject> objects;  // ingest
  std::optional<BooleanRangeQuery> query;
  std::optional<ResultMode> mode;
  std::optional<SpatioTextualObject> object;  // update
};

struct Script {
  HarnessConfig config;
  std::vector<ScriptAction> actions;
};

// {"config": {"seed", "paillier_bits", "slot_bits", "order", "box": [x1, y1,
// x2, y2], "auto_shuffle", "mode"}, "actions": [{"op": ..}, ..]}.
Script parse_script(std::string_view json);

struct ActionResult {
  ScriptAction::Op op;
  std::optional<QueryOutcome> outcome;
};

// Applies one action. Protocol-order violations surface as ProtocolError.
ActionResult apply_action(Deployment& d, const ScriptAction& a);

struct SimulationResult {
  std::vector<ActionResult> results;
};

SimulationResult run_actions(Deployment& d, const std::vector<ScriptAction>& actions);

// JSON for a query result: ids plus decoded objects.
std::string outcome_to_json(const QueryOutcome& o);

}  // namespace brasp
