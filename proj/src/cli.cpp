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

#include "exchange/cli.hpp"

#include <charconv>
#include <cstdlib>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "exchange/auditors.hpp"
#include "exchange/io.hpp"
#include "json.hpp"

namespace exchange {

namespace {

using nlohmann::ordered_json;

constexpr const char* kBudgetVariable = "EXCHANGE_CLEAR_BUDGET";

EnumerationOptions options_from_env(int threads) {
  EnumerationOptions options;
  options.threads = threads;
  if (const char* raw = std::getenv(kBudgetVariable); raw != nullptr && *raw) {
    const std::string_view text(raw);
    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || value == 0) {
      throw InvalidArgument(std::string(kBudgetVariable) +
                            " must be a positive integer");
    }
    options.node_budget = value;
  }
  return options;
}

std::vector<std::string> split_ids(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream stream(text);
  std::string id;
  while (std::getline(stream, id, ',')) {
    if (id.empty()) throw InvalidArgument("empty agent id in --priority");
    out.push_back(id);
  }
  return out;
}

PriorityOrder priority_for(const Market& market, const std::string& text) {
  if (text.empty()) return PriorityOrder::canonical(market);
  const auto ids = split_ids(text);
  return PriorityOrder::from_ids(market, ids);
}

ordered_json profile_json(const Market& market, const Allocation& allocation) {
  ordered_json out = ordered_json::object();
  const auto profile = satisfaction_profile(market, allocation);
  for (AgentIndex a = 0; a < market.agent_count(); ++a) {
    out[market.agent_id(a)] = profile.flags[a];
  }
  return out;
}

ordered_json allocation_json(const Market& market, const Allocation& allocation) {
  return ordered_json::parse(serialize(market, allocation))["assignment"];
}

ordered_json bundles_json(const Market& market, const Allocation& allocation) {
  ordered_json out = ordered_json::object();
  for (AgentIndex a = 0; a < market.agent_count(); ++a) {
    out[market.agent_id(a)] = market.item_ids(allocation.bundle(a));
  }
  return out;
}

struct Args {
  std::string mechanism;
  std::string priority;
  std::string constraints = "unrestricted";
  std::string instance;
  std::string allocation;
  std::string out;
  std::string fixture_name;
  bool full = false;
  int threads = 0;
  std::size_t bundle_cap = MisreportBudget{}.bundle_cap;
  std::size_t max_scenarios = MisreportBudget{}.max_scenarios;
  std::uint64_t seed = kDefaultConsistencySeed;
  std::size_t samples = ConsistencySampling{}.samples;
  GeneratorConfig generator;
};

int emit_report(std::ostream& out, const Market& market, const AuditReport& report) {
  out << serialize(market, report);
  return report.violation() ? kExitViolation : kExitOk;
}

int solve(const Args& a, std::ostream& out) {
  const Market market = parse_instance(read_file(a.instance));
  const MechanismSpec spec{parse_mechanism_kind(a.mechanism),
                           priority_for(market, a.priority),
                           ConstraintSet::parse(a.constraints)};
  const Allocation chosen = run_mechanism(market, spec, options_from_env(a.threads));
  ordered_json doc;
  doc["mechanism"] = to_string(spec.kind);
  doc["priority"] = spec.priority.ids(market);
  doc["constraints"] = spec.constraints.to_string();
  doc["allocation"] = allocation_json(market, chosen);
  doc["bundles"] = bundles_json(market, chosen);
  doc["profile"] = profile_json(market, chosen);
  doc["satisfied"] = satisfaction_profile(market, chosen).total();
  out << doc.dump(2) << '\n';
  return kExitOk;
}

int enumerate(const Args& a, std::ostream& out) {
  const Market market = parse_instance(read_file(a.instance));
  const ConstraintSet constraints = ConstraintSet::parse(a.constraints);
  const auto feasible =
      enumerate_feasible(market, constraints, options_from_env(a.threads));
  // Canonically first allocation with the most satisfied agents.
  std::size_t best = 0;
  int best_count = -1;
  for (std::size_t k = 0; k < feasible.size(); ++k) {
    const int count = satisfaction_profile(market, feasible[k]).total();
    if (count > best_count) {
      best = k;
      best_count = count;
    }
  }
  ordered_json doc;
  doc["constraints"] = constraints.to_string();
  doc["feasible_count"] = feasible.size();
  doc["max_satisfied"] = best_count;
  doc["max_satisfied_allocation"] = allocation_json(market, feasible[best]);
  doc["max_satisfied_profile"] = profile_json(market, feasible[best]);
  if (a.full) {
    ordered_json all = ordered_json::array();
    for (const auto& allocation : feasible) {
      all.push_back(allocation_json(market, allocation));
    }
    doc["allocations"] = all;
  }
  out << doc.dump(2) << '\n';
  return kExitOk;
}

int audit_sp(const Args& a, std::ostream& out) {
  const Market market = parse_instance(read_file(a.instance));
  const MechanismSpec spec{parse_mechanism_kind(a.mechanism),
                           priority_for(market, a.priority),
                           ConstraintSet::parse(a.constraints)};
  MisreportBudget budget;
  budget.bundle_cap = a.bundle_cap;
  budget.max_scenarios = a.max_scenarios;
  return emit_report(out, market,
                     audit_strategyproofness(market, spec, budget,
                                             options_from_env(a.threads)));
}

int audit_consistency(const Args& a, std::ostream& out) {
  const Market market = parse_instance(read_file(a.instance));
  const MechanismSpec spec{parse_mechanism_kind(a.mechanism),
                           priority_for(market, a.priority),
                           ConstraintSet::parse(a.constraints)};
  ConsistencySampling sampling;
  sampling.seed = a.seed;
  sampling.samples = a.samples;
  return emit_report(out, market,
                     audit_weak_consistency(market, spec, sampling,
                                            options_from_env(a.threads)));
}

int audit_pareto(const Args& a, std::ostream& out) {
  const Market market = parse_instance(read_file(a.instance));
  const Allocation allocation = parse_allocation(market, read_file(a.allocation));
  return emit_report(out, market,
                     audit_constrained_pareto(market, allocation,
                                              ConstraintSet::parse(a.constraints),
                                              options_from_env(a.threads)));
}

int write_or_print(const std::string& path, const std::string& text,
                   std::ostream& out) {
  if (path.empty()) {
    out << text;
  } else {
    write_file(path, text);
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Clearing engine and axiom auditor for multi-item exchange markets",
               "exchange-clear"};
  app.require_subcommand(1);
  Args a;

  auto add_instance = [&a](CLI::App* cmd) {
    cmd->add_option("--instance", a.instance, "Instance document (JSON)")
        ->required();
  };
  auto add_constraints = [&a](CLI::App* cmd) {
    cmd->add_option("--constraints", a.constraints,
                    "Comma-separated: unrestricted|sir|ir|maxcycle=<L>|pairwise|"
                    "desirable");
  };
  auto add_mechanism = [&a](CLI::App* cmd) {
    cmd->add_option("--mechanism", a.mechanism, "cp or cup")
        ->required()
        ->check(CLI::IsMember({"cp", "cup"}));
    cmd->add_option("--priority", a.priority,
                    "Comma-separated agent ids; default is id order");
  };
  auto add_threads = [&a](CLI::App* cmd) {
    cmd->add_option("--threads", a.threads, "Worker threads (0 = default)");
  };

  auto* solve_cmd = app.add_subcommand("solve", "Run CP or CUP on an instance");
  add_mechanism(solve_cmd);
  add_constraints(solve_cmd);
  add_instance(solve_cmd);
  add_threads(solve_cmd);

  auto* enumerate_cmd =
      app.add_subcommand("enumerate", "Count the feasible allocations");
  add_constraints(enumerate_cmd);
  add_instance(enumerate_cmd);
  enumerate_cmd->add_flag("--full", a.full, "Print every feasible allocation");
  add_threads(enumerate_cmd);

  auto* sp_cmd = app.add_subcommand("audit-sp", "Search for profitable misreports");
  add_mechanism(sp_cmd);
  add_constraints(sp_cmd);
  add_instance(sp_cmd);
  sp_cmd->add_option("--bundle-cap", a.bundle_cap,
                     "Largest single-bundle misreport");
  sp_cmd->add_option("--max-scenarios", a.max_scenarios,
                     "Abort past this many scenarios per agent");
  add_threads(sp_cmd);

  auto* wc_cmd = app.add_subcommand("audit-consistency",
                                    "Check weak consistency on feasible subsets");
  add_mechanism(wc_cmd);
  add_constraints(wc_cmd);
  add_instance(wc_cmd);
  wc_cmd->add_option("--seed", a.seed, "Subset sampling seed");
  wc_cmd->add_option("--samples", a.samples, "Random subsets when not exhaustive");
  add_threads(wc_cmd);

  auto* po_cmd = app.add_subcommand(
      "audit-pareto", "Look for a feasible allocation dominating a given one");
  add_constraints(po_cmd);
  add_instance(po_cmd);
  po_cmd->add_option("--allocation", a.allocation, "Allocation document (JSON)")
      ->required();
  add_threads(po_cmd);

  auto* fixture_cmd = app.add_subcommand("fixture", "Write a built-in instance");
  fixture_cmd->add_option("name", a.fixture_name, "example1 or theorem5")
      ->required()
      ->check(CLI::IsMember({"example1", "theorem5"}));
  fixture_cmd->add_option("--out", a.out, "Output path (default stdout)");

  auto* replicate_cmd = app.add_subcommand(
      "replicate-theorem5",
      "Reproduce the three-agent impossibility under every priority order");
  add_threads(replicate_cmd);

  auto* generate_cmd =
      app.add_subcommand("generate", "Write a seeded random instance");
  auto& g = a.generator;
  generate_cmd->add_option("--seed", g.seed, "Random seed")->required();
  generate_cmd->add_option("--min-agents", g.agents.min);
  generate_cmd->add_option("--max-agents", g.agents.max);
  generate_cmd->add_option("--min-items", g.items_per_agent.min,
                           "Fewest items per agent");
  generate_cmd->add_option("--max-items", g.items_per_agent.max,
                           "Most items per agent");
  generate_cmd->add_option("--min-demands", g.demands_per_agent.min);
  generate_cmd->add_option("--max-demands", g.demands_per_agent.max);
  generate_cmd->add_option("--min-bundle", g.bundle_size.min);
  generate_cmd->add_option("--max-bundle", g.bundle_size.max);
  generate_cmd->add_flag("--null-padding", g.null_padding,
                         "Give every agent one null item");
  generate_cmd->add_option("--out", a.out, "Output path (default stdout)");

  std::vector<const char*> argv;
  for (const auto& s : args) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitError;
  }

  try {
    if (*solve_cmd) return solve(a, out);
    if (*enumerate_cmd) return enumerate(a, out);
    if (*sp_cmd) return audit_sp(a, out);
    if (*wc_cmd) return audit_consistency(a, out);
    if (*po_cmd) return audit_pareto(a, out);
    if (*fixture_cmd) {
      return write_or_print(a.out, serialize(fixture(a.fixture_name).market), out);
    }
    if (*replicate_cmd) {
      const Market market = fixture("theorem5").market;
      return emit_report(out, market,
                         replicate_impossibility(options_from_env(a.threads)));
    }
    if (*generate_cmd) {
      return write_or_print(a.out, serialize(generate_instance(a.generator)), out);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
  err << app.help();
  return kExitError;
}

}  // namespace exchange
