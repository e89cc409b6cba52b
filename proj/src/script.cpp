#include "brasp/script.hpp"

#include <sstream>

#include <nlohmann/json.hpp>

#include "brasp/error.hpp"

namespace brasp {

using nlohmann::json;

namespace {

json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed JSON: ") + e.what());
  }
}

SpatioTextualObject object_from(const json& j, const GridSpec& grid) {
  SpatioTextualObject o;
  if (j.contains("hilbert")) {
    o.location = j.at("hilbert").get<std::uint64_t>();
    if (o.location >= grid.cell_count()) throw InvalidArgument("hilbert value outside grid");
  } else if (j.contains("x") && j.contains("y")) {
    Point p{j.at("x").get<double>(), j.at("y").get<double>()};
    o.location = hilbert_encode(quantize(p, grid), grid);
  } else {
    throw InvalidArgument("object needs x/y or hilbert");
  }
  if (j.contains("keywords")) o.keywords = j.at("keywords").get<std::vector<std::string>>();
  if (j.contains("payload")) o.payload = to_bytes(j.at("payload").get<std::string>());
  if (j.contains("id")) o.id = j.at("id").get<std::uint64_t>();
  return o;
}

BooleanRangeQuery query_from(const json& j, const GridSpec& grid) {
  BooleanRangeQuery q;
  if (j.contains("keywords")) q.keywords = j.at("keywords").get<std::vector<std::string>>();
  if (j.contains("intervals")) {
    std::vector<Interval> ivs;
    for (const json& iv : j.at("intervals")) {
      ivs.push_back(Interval{iv.at(0).get<std::uint64_t>(), iv.at(1).get<std::uint64_t>()});
    }
    q.range = SpatialRange::from_intervals(std::move(ivs), grid.bits());
  } else if (j.contains("rect")) {
    const json& r = j.at("rect");
    Rect rect{r.at("x1").get<double>(), r.at("y1").get<double>(), r.at("x2").get<double>(),
              r.at("y2").get<double>()};
    q.range = region_to_intervals(rect, grid);
  } else {
    throw InvalidArgument("query needs rect or intervals");
  }
  return q;
}

std::optional<ResultMode> mode_from(const json& j) {
  if (!j.contains("mode")) return std::nullopt;
  std::string m = j.at("mode").get<std::string>();
  if (m == "corrected") return ResultMode::kCorrected;
  if (m == "literal") return ResultMode::kLiteral;
  throw InvalidArgument("mode must be corrected or literal");
}

}  // namespace

SpatioTextualObject parse_object_json(std::string_view text, const GridSpec& grid) {
  try {
    return object_from(parse_json(text), grid);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("bad object: ") + e.what());
  }
}

std::vector<SpatioTextualObject> parse_objects_jsonl(std::string_view text, const GridSpec& grid) {
  std::vector<SpatioTextualObject> out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(parse_object_json(line, grid));
  }
  return out;
}

std::string object_to_json(const SpatioTextualObject& obj) {
  nlohmann::ordered_json j;
  j["id"] = obj.id;
  j["hilbert"] = obj.location;
  j["keywords"] = obj.keywords;
  j["payload"] = std::string(obj.payload.begin(), obj.payload.end());
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

BooleanRangeQuery parse_query_json(std::string_view text, const GridSpec& grid) {
  try {
    return query_from(parse_json(text), grid);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("bad query: ") + e.what());
  }
}

Script parse_script(std::string_view text) {
  json j = parse_json(text);
  Script s;
  try {
    if (j.contains("config")) {
      const json& c = j.at("config");
      s.config.seed = c.value("seed", s.config.seed);
      s.config.paillier_bits = c.value("paillier_bits", s.config.paillier_bits);
      s.config.slot_bits = c.value("slot_bits", s.config.slot_bits);
      s.config.auto_shuffle = c.value("auto_shuffle", false);
      unsigned order = c.value("order", 3U);
      if (c.contains("box")) {
        const json& b = c.at("box");
        s.config.grid = GridSpec::make(b.at(0).get<double>(), b.at(1).get<double>(),
                                       b.at(2).get<double>(), b.at(3).get<double>(), order);
      } else {
        s.config.grid = GridSpec::unit_cells(order);
      }
      if (auto m = mode_from(c)) s.config.mode = *m;
    } else {
      s.config.auto_shuffle = false;
    }
    for (const json& a : j.at("actions")) {
      ScriptAction act;
      std::string op = a.at("op").get<std::string>();
      if (op == "ingest") {
        act.op = ScriptAction::Op::kIngest;
        for (const json& o : a.at("objects")) act.objects.push_back(object_from(o, s.config.grid));
      } else if (op == "build") {
        act.op = ScriptAction::Op::kBuild;
      } else if (op == "shuffle") {
        act.op = ScriptAction::Op::kShuffle;
      } else if (op == "query") {
        act.op = ScriptAction::Op::kQuery;
        act.query = query_from(a, s.config.grid);
        act.mode = mode_from(a);
      } else if (op == "redistribute") {
        act.op = ScriptAction::Op::kRedistribute;
      } else if (op == "update") {
        act.op = ScriptAction::Op::kUpdate;
        act.object = object_from(a.at("object"), s.config.grid);
      } else {
        throw InvalidArgument("unknown action: " + op);
      }
      s.actions.push_back(std::move(act));
    }
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("bad script: ") + e.what());
  }
  return s;
}

ActionResult apply_action(Deployment& d, const ScriptAction& a) {
  ActionResult r{a.op, std::nullopt};
  switch (a.op) {
    case ScriptAction::Op::kIngest:
      d.ingest(a.objects);
      break;
    case ScriptAction::Op::kBuild:
      d.build();
      break;
    case ScriptAction::Op::kShuffle:
      d.shuffle();
      break;
    case ScriptAction::Op::kQuery:
      r.outcome = d.query(*a.query, a.mode.value_or(d.config().mode));
      break;
    case ScriptAction::Op::kRedistribute:
      d.redistribute();
      break;
    case ScriptAction::Op::kUpdate:
      d.update(*a.object);
      break;
  }
  return r;
}

SimulationResult run_actions(Deployment& d, const std::vector<ScriptAction>& actions) {
  SimulationResult out;
  for (const ScriptAction& a : actions) out.results.push_back(apply_action(d, a));
  return out;
}

std::string outcome_to_json(const QueryOutcome& o) {
  nlohmann::ordered_json j;
  j["ids"] = o.result.ids;
  j["objects"] = nlohmann::ordered_json::array();
  for (const SpatioTextualObject& obj : o.objects) j["objects"].push_back(nlohmann::ordered_json::parse(object_to_json(obj)));
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

}  // namespace brasp
