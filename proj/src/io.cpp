// Copyright 2026 The exchange-clear Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "exchange/io.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace exchange {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string line_of(std::string_view text, std::size_t byte) {
  const std::size_t end = std::min(byte, text.size());
  const auto lines = std::count(text.begin(), text.begin() + end, '\n');
  return "line " + std::to_string(lines + 1);
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(line_of(text, e.byte == 0 ? 0 : e.byte - 1),
                     "malformed document");
  }
}

const json& field(const json& object, const char* key, const std::string& path) {
  if (!object.is_object()) throw ParseError(path, "expected an object");
  const auto it = object.find(key);
  if (it == object.end()) {
    throw ParseError(path, std::string("missing field '") + key + "'");
  }
  return *it;
}

void only_fields(const json& object, std::initializer_list<const char*> allowed,
                 const std::string& path) {
  for (const auto& [key, value] : object.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) {
          return key == a;
        }) == allowed.end()) {
      throw ParseError(path + "." + key, "unknown field");
    }
  }
}

std::string string_at(const json& value, const std::string& path) {
  if (!value.is_string()) throw ParseError(path, "expected a string");
  return value.get<std::string>();
}

const json& array_at(const json& value, const std::string& path) {
  if (!value.is_array()) throw ParseError(path, "expected an array");
  return value;
}

std::vector<std::string> strings_at(const json& value, const std::string& path) {
  std::vector<std::string> out;
  std::size_t k = 0;
  for (const auto& v : array_at(value, path)) {
    out.push_back(string_at(v, path + "[" + std::to_string(k++) + "]"));
  }
  return out;
}

void check_version(const json& doc) {
  const auto version = string_at(field(doc, "schema_version", "document"),
                                 "schema_version");
  if (version != kSchemaVersion) {
    throw ParseError("schema_version", "unsupported schema version '" + version +
                                           "' (expected '" +
                                           std::string(kSchemaVersion) + "')");
  }
}

ordered_json ids_json(const std::vector<std::string>& ids) {
  ordered_json out = ordered_json::array();
  for (const auto& id : ids) out.push_back(id);
  return out;
}

ordered_json assignment_json(const Market& market, const Allocation& allocation) {
  ordered_json out = ordered_json::object();
  for (ItemIndex i = 0; i < market.item_count(); ++i) {
    const AgentIndex a = allocation.holder(i);
    if (a != kNoAgent) out[market.item_id(i)] = market.agent_id(a);
  }
  return out;
}

std::string dump(const ordered_json& doc) { return doc.dump(2) + "\n"; }

ordered_json witness_json(const Market& market, const Witness& witness) {
  ordered_json out;
  if (const auto* m = std::get_if<ManipulationWitness>(&witness)) {
    out["type"] = "manipulation";
    out["mechanism"] = to_string(m->kind);
    out["priority"] = ids_json(m->priority.ids(market));
    out["agent"] = market.agent_id(m->scenario.agent);
    out["reported_endowment"] =
        ids_json(market.item_ids(m->scenario.reported_endowment));
    ordered_json demands = ordered_json::array();
    for (ItemSet d : m->scenario.reported_demands) {
      demands.push_back(ids_json(market.item_ids(d)));
    }
    out["reported_demands"] = demands;
    out["withheld"] = ids_json(market.item_ids(m->scenario.withheld));
    out["truthful_outcome"] = assignment_json(market, m->truthful_outcome);
    out["misreport_outcome"] = assignment_json(market, m->misreport_outcome);
    out["realized_bundle"] = ids_json(market.item_ids(m->realized));
  } else if (const auto* c = std::get_if<ConsistencyViolation>(&witness)) {
    out["type"] = "consistency";
    out["outer_subset"] = c->outer;
    out["inner_subset"] = c->inner;
    out["outer_choice"] = assignment_json(market, c->outer_choice);
    out["inner_choice"] = assignment_json(market, c->inner_choice);
    out["matching_allocation"] = assignment_json(market, c->matching);
  } else {
    const auto& d = std::get<DominationWitness>(witness);
    out["type"] = "domination";
    out["audited"] = assignment_json(market, d.audited);
    out["dominating"] = assignment_json(market, d.dominating);
  }
  return out;
}

}  // namespace

MarketDescription parse_description(std::string_view text) {
  const json doc = parse_json(text);
  if (!doc.is_object()) throw ParseError("document", "expected an object");
  only_fields(doc, {"schema_version", "items", "agents", "withdrawn"}, "document");
  check_version(doc);

  MarketDescription d;
  std::set<std::string> seen;
  std::size_t k = 0;
  for (const auto& item : array_at(field(doc, "items", "document"), "items")) {
    const std::string path = "items[" + std::to_string(k++) + "]";
    only_fields(item, {"id", "null"}, path);
    ItemDecl decl{string_at(field(item, "id", path), path + ".id"), false};
    if (const auto it = item.find("null"); it != item.end()) {
      if (!it->is_boolean()) throw ParseError(path + ".null", "expected a boolean");
      decl.is_null = it->get<bool>();
    }
    if (!seen.insert(decl.id).second) {
      throw ParseError(path + ".id", "duplicate item id '" + decl.id + "'");
    }
    d.items.push_back(std::move(decl));
  }

  k = 0;
  for (const auto& agent : array_at(field(doc, "agents", "document"), "agents")) {
    const std::string path = "agents[" + std::to_string(k++) + "]";
    only_fields(agent, {"id", "endowment", "demands"}, path);
    AgentDecl decl;
    decl.id = string_at(field(agent, "id", path), path + ".id");
    decl.endowment =
        strings_at(field(agent, "endowment", path), path + ".endowment");
    std::size_t j = 0;
    for (const auto& bundle :
         array_at(field(agent, "demands", path), path + ".demands")) {
      decl.demands.push_back(
          strings_at(bundle, path + ".demands[" + std::to_string(j++) + "]"));
    }
    d.agents.push_back(std::move(decl));
  }

  if (const auto it = doc.find("withdrawn"); it != doc.end()) {
    d.withdrawn = strings_at(*it, "withdrawn");
  }
  return d;
}

Market parse_instance(std::string_view text) {
  return Market::build(parse_description(text));
}

std::string serialize(const Market& market) {
  const MarketDescription d = market.describe();
  ordered_json doc;
  doc["schema_version"] = kSchemaVersion;
  ordered_json items = ordered_json::array();
  for (const auto& item : d.items) {
    ordered_json entry;
    entry["id"] = item.id;
    if (item.is_null) entry["null"] = true;
    items.push_back(entry);
  }
  doc["items"] = items;
  ordered_json agents = ordered_json::array();
  for (const auto& agent : d.agents) {
    ordered_json entry;
    entry["id"] = agent.id;
    entry["endowment"] = ids_json(agent.endowment);
    ordered_json demands = ordered_json::array();
    for (const auto& bundle : agent.demands) demands.push_back(ids_json(bundle));
    entry["demands"] = demands;
    agents.push_back(entry);
  }
  doc["agents"] = agents;
  if (!d.withdrawn.empty()) doc["withdrawn"] = ids_json(d.withdrawn);
  return dump(doc);
}

std::string serialize(const Market& market, const Allocation& allocation) {
  ordered_json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["assignment"] = assignment_json(market, allocation);
  return dump(doc);
}

std::string serialize(const Market& market, const AuditReport& report) {
  ordered_json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["kind"] = to_string(report.kind);
  doc["verdict"] = report.verdict();
  if (report.seed) doc["seed"] = *report.seed;
  ordered_json space = ordered_json::object();
  for (const auto& [key, value] : report.search_space) space[key] = value;
  doc["search_space"] = space;
  doc["witness_count"] = report.witnesses.size();
  ordered_json witnesses = ordered_json::array();
  for (const auto& w : report.witnesses) witnesses.push_back(witness_json(market, w));
  doc["witnesses"] = witnesses;
  return dump(doc);
}

Allocation parse_allocation(const Market& market, std::string_view text) {
  const json doc = parse_json(text);
  if (!doc.is_object()) throw ParseError("document", "expected an object");
  only_fields(doc, {"schema_version", "assignment"}, "document");
  check_version(doc);
  const json& assignment = field(doc, "assignment", "document");
  if (!assignment.is_object()) throw ParseError("assignment", "expected an object");

  std::vector<AgentIndex> holders(market.item_count(), kNoAgent);
  for (const auto& [item, agent] : assignment.items()) {
    const std::string path = "assignment." + item;
    const auto i = market.find_item(item);
    if (!i || !market.pool().contains(*i)) {
      throw ParseError(path, "unknown item '" + item + "'");
    }
    const auto a = market.find_agent(string_at(agent, path));
    if (!a) throw ParseError(path, "unknown agent '" + agent.get<std::string>() + "'");
    holders[*i] = *a;
  }
  market.pool().for_each([&](ItemIndex i) {
    if (holders[i] == kNoAgent) {
      throw ParseError("assignment", "item '" + market.item_id(i) +
                                         "' is not assigned");
    }
  });
  return Allocation(market, std::move(holders));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
  if (!out) throw Error("failed writing '" + path + "'");
}

}  // namespace exchange
