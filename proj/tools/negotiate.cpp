// Copyright 2026 The Bargain Arena Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// negotiate: run tournaments, build reports, and print game-theoretic
// reference points.
//
//   negotiate run --game single --trials 1 --agents rational
//   negotiate report runs/<run-id>
//   negotiate equilibrium --game multi --rounds 6
//   negotiate pareto --game multi
//
// Exit codes: 0 success, 1 usage or configuration error, 2 runtime failure.

#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bargain/bargain.hpp"
#include "bargain/http_transport.hpp"

namespace {

using namespace bargain;
namespace fs = std::filesystem;

constexpr int kOk = 0;
constexpr int kUserError = 1;
constexpr int kRuntimeError = 2;

constexpr const char* kConfigFile = "config.json";
constexpr const char* kDefaultCacheName = "llm_cache.jsonl";

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<std::string> SplitList(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  for (std::string part; std::getline(in, part, ',');) {
    part.erase(0, part.find_first_not_of(" \t"));
    part.erase(part.find_last_not_of(" \t") + 1);
    if (!part.empty()) out.push_back(part);
  }
  return out;
}

std::vector<int> IntList(const std::string& s, const char* what) {
  std::vector<int> out;
  for (const auto& p : SplitList(s)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(p, &used));
      if (used != p.size()) throw std::invalid_argument(p);
    } catch (const std::exception&) {
      throw UsageError(std::string(what) + ": '" + p + "' is not an integer");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Game configuration shared by the subcommands.

struct SpaceFlags {
  std::string game = "single";
  int rounds = 6;
  int total = 100;
  std::string quantities;
  std::string p1_values;
  std::string p2_values;

  void Add(CLI::App* app, bool custom_space) {
    app->add_option("--game", game, "single or multi")->check(CLI::IsMember({"single", "multi"}));
    app->add_option("--rounds", rounds, "Maximum number of offers");
    if (!custom_space) return;
    app->add_option("--total", total, "Dollars to divide (single)");
    app->add_option("--quantities", quantities, "Item quantities, e.g. 10,10,10 (multi)");
    app->add_option("--p1-values", p1_values, "P1 per-item values (multi)");
    app->add_option("--p2-values", p2_values, "P2 per-item values (multi)");
  }

  GameConfig Resolve() const {
    GameConfig c;
    if (game == "single") {
      c = GameConfig::Canonical(IssueSpace::Single(total));
    } else {
      std::vector<int> q = quantities.empty() ? std::vector<int>{10, 10, 10} : IntList(quantities, "--quantities");
      std::vector<std::string> names = {"apples", "bananas", "crepes"};
      if (q.size() != names.size()) {
        names.clear();
        for (std::size_t i = 0; i < q.size(); ++i) names.push_back("item" + std::to_string(i + 1));
      }
      const IssueSpace space = IssueSpace::Multi(names, q);
      c = GameConfig::Canonical(space);
      if (!p1_values.empty()) c.profiles[0].unit_values = IntList(p1_values, "--p1-values");
      if (!p2_values.empty()) c.profiles[1].unit_values = IntList(p2_values, "--p2-values");
    }
    c.max_rounds = rounds;
    c.Validate();
    return c;
  }
};

std::string DescribeShare(const IssueSpace& space, const std::vector<int>& share) {
  if (space.is_single()) return "$" + std::to_string(share.front());
  std::string out;
  for (std::size_t i = 0; i < share.size(); ++i)
    out += (i ? ", " : "") + std::to_string(share[i]) + " " + space.item_names()[i];
  return out;
}

std::string DescribeAllocation(const IssueSpace& space, const Allocation& a) {
  return "P1: " + DescribeShare(space, a.p1_share) +
         "; P2: " + DescribeShare(space, ShareOf(space, a, Seat::kP2));
}

// ---------------------------------------------------------------------------
// equilibrium / pareto

int CmdEquilibrium(const SpaceFlags& flags) {
  const GameConfig c = flags.Resolve();
  const BargainingSolution solution(c.space, c.profiles, c.max_rounds);
  const EquilibriumOutcome& eq = solution.outcome();
  std::cout << "P1: " << eq.payoffs[0] << ", P2: " << eq.payoffs[1] << "\n";
  if (eq.allocation) {
    std::cout << "allocation: " << DescribeAllocation(c.space, *eq.allocation) << "\n";
    std::cout << "agreement round: " << eq.agreement_round << " of " << c.max_rounds << "\n";
  } else {
    std::cout << "perfect play ends in default\n";
  }
  return kOk;
}

int CmdPareto(const SpaceFlags& flags, bool all) {
  const GameConfig c = flags.Resolve();
  const FrontierSet f = ParetoFrontier(c.space, c.profiles);
  std::cout << "allocations enumerated: " << f.enumerated << "\n";
  std::cout << "max joint utility: " << f.max_joint_utility << "\n";
  auto list = [&](const char* title, const std::vector<FrontierPoint>& pts) {
    std::cout << title << " (" << pts.size() << "):\n";
    for (const auto& p : pts)
      std::cout << "  " << DescribeAllocation(c.space, p.allocation) << "  payoffs (" << p.payoffs[0] << ", "
                << p.payoffs[1] << ")\n";
  };
  list("joint-max allocations", f.joint_max);
  if (all) list("undominated allocations", f.undominated);
  return kOk;
}

// ---------------------------------------------------------------------------
// run

struct AgentSpec {
  ImplKind kind = ImplKind::kLlm;
  int step = 10;

  static AgentSpec Parse(const std::string& s) {
    if (s == "llm") return {ImplKind::kLlm};
    if (s == "rational") return {ImplKind::kRational};
    if (s == "scripted" || s == "scripted:never-accept") return {ImplKind::kScripted};
    if (s == "conceder") return {ImplKind::kConceder};
    if (s.rfind("conceder:", 0) == 0) {
      const auto v = IntList(s.substr(9), "conceder step");
      if (v.size() != 1 || v[0] < 1) throw UsageError("conceder step must be a positive integer");
      return {ImplKind::kConceder, v[0]};
    }
    throw UsageError("unknown agent '" + s + "' (expected llm, rational, scripted:never-accept or conceder[:step])");
  }

  std::string Name() const {
    switch (kind) {
      case ImplKind::kLlm: return "llm";
      case ImplKind::kRational: return "rational";
      case ImplKind::kScripted: return "scripted:never-accept";
      case ImplKind::kConceder: return "conceder:" + std::to_string(step);
    }
    return "?";
  }
};

struct RunFlags {
  SpaceFlags space;
  int trials = 1;
  std::string agents = "llm";
  std::vector<std::string> assign;
  std::string personalities;
  std::string mode = "record";
  std::string cache;
  std::string run_dir;
  std::string run_id;
  std::string runs_root = "runs";
  int concurrency = 1;
  std::int64_t seed = 0;
  std::string model = "gpt-4-turbo";
  double temperature = 1.0;
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string api_key_env = "OPENAI_API_KEY";
  int rpm = 60;
  bool case_insensitive_accept = false;
  std::string timestamp;
  bool quiet = false;
};

class OfflineTransport final : public HttpTransport {
 public:
  HttpResponse Post(const std::string&, const std::vector<std::pair<std::string, std::string>>&,
                    const std::string&) override {
    throw TransportFailure("network access is disabled in replay mode");
  }
};

std::string DefaultRunId() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%d-%H%M%S", &tm);
  return buf;
}

int CmdRun(RunFlags f) {
  if (f.trials < 1) throw UsageError("--trials must be at least 1");
  if (f.concurrency < 1) throw UsageError("--concurrency must be at least 1");
  const auto mode = ParseCacheMode(f.mode);
  if (!mode) throw UsageError("--mode must be live, record or replay");

  std::vector<Personality> personalities;
  if (f.personalities.empty()) {
    personalities = AllPersonalities();
  } else {
    for (const auto& name : SplitList(f.personalities)) {
      const auto p = ParsePersonality(name);
      if (!p) throw UsageError("unknown personality '" + name + "'");
      personalities.push_back(*p);
    }
  }

  const AgentSpec base_agent = AgentSpec::Parse(f.agents);
  std::map<std::string, AgentSpec> overrides;
  for (const auto& a : f.assign) {
    const auto eq = a.find('=');
    if (eq == std::string::npos) throw UsageError("--assign expects Personality=agent, got '" + a + "'");
    const auto p = ParsePersonality(a.substr(0, eq));
    if (!p) throw UsageError("unknown personality in --assign '" + a + "'");
    overrides[PersonalityName(*p)] = AgentSpec::Parse(a.substr(eq + 1));
  }
  auto spec_for = [&](const Personality& p) {
    const auto it = overrides.find(PersonalityName(p));
    return it == overrides.end() ? base_agent : it->second;
  };
  bool needs_llm = base_agent.kind == ImplKind::kLlm;
  for (const auto& [name, spec] : overrides) needs_llm |= spec.kind == ImplKind::kLlm;

  GameConfig base = f.space.Resolve();
  base.case_insensitive_accept = f.case_insensitive_accept;
  const TournamentPlan plan = MakePlan(personalities, f.trials, base, f.seed);

  if (f.run_dir.empty()) f.run_dir = (fs::path(f.runs_root) / (f.run_id.empty() ? DefaultRunId() : f.run_id)).string();
  const fs::path run_dir = f.run_dir;
  if (f.cache.empty()) f.cache = (run_dir / kDefaultCacheName).string();

  // The settings that decide what each game is. A resumed run must match them.
  nlohmann::json assign_json = nlohmann::json::object();
  for (const auto& [name, spec] : overrides) assign_json[name] = spec.Name();
  nlohmann::json identity = {{"plan", PlanToJson(plan)},
                             {"agents", base_agent.Name()},
                             {"assign", assign_json},
                             {"model", needs_llm ? nlohmann::json(f.model) : nlohmann::json()},
                             {"temperature", needs_llm ? nlohmann::json(f.temperature) : nlohmann::json()}};
  const fs::path config_path = run_dir / kConfigFile;
  if (fs::exists(config_path)) {
    std::ifstream in(config_path);
    const auto previous = nlohmann::json::parse(in, nullptr, /*allow_exceptions=*/false);
    if (previous.is_discarded() || !previous.contains("identity"))
      throw UsageError(config_path.string() + " is not a run configuration");
    if (previous.at("identity") != identity)
      throw UsageError("run directory " + run_dir.string() +
                       " was started with different settings; use a new --run-id to start a new run");
  }
  fs::create_directories(run_dir);
  const nlohmann::json resolved = {
      {"command", "run"},
      {"identity", identity},
      {"game", f.space.game},
      {"rounds", f.space.rounds},
      {"trials", f.trials},
      {"seed", f.seed},
      {"mode", f.mode},
      {"cache", needs_llm ? nlohmann::json(f.cache) : nlohmann::json()},
      {"endpoint", needs_llm ? nlohmann::json(f.endpoint) : nlohmann::json()},
      {"rpm", f.rpm},
      {"api_key_env", f.api_key_env},
      {"concurrency", f.concurrency},
      {"run_dir", run_dir.string()},
  };
  WriteFileAtomic(config_path, resolved.dump(2) + "\n");

  std::shared_ptr<LlmClient> client;
  if (needs_llm) {
    LlmClientConfig cc;
    cc.endpoint = f.endpoint;
    cc.api_key_env = f.api_key_env;
    cc.mode = *mode;
    cc.cache_path = f.cache;
    cc.requests_per_minute = f.rpm;
    std::shared_ptr<HttpTransport> transport;
    if (*mode == CacheMode::kReplay)
      transport = std::make_shared<OfflineTransport>();
    else
      transport = std::make_shared<HttplibTransport>();
    client = std::make_shared<LlmClient>(cc, transport);
  }

  const LlmAgentOptions llm_options{f.model, f.temperature};
  AgentFactory factory = [&](const PlannedGame& g, Seat seat) -> std::unique_ptr<Agent> {
    const Personality& p = seat == Seat::kP1 ? g.p1 : g.p2;
    const AgentSpec spec = spec_for(p);
    switch (spec.kind) {
      case ImplKind::kLlm: return std::make_unique<LlmAgent>(p, client, llm_options);
      case ImplKind::kRational: return std::make_unique<RationalAgent>(p);
      case ImplKind::kScripted: return std::make_unique<NeverAcceptAgent>(p);
      case ImplKind::kConceder: return std::make_unique<ConcederAgent>(spec.step, p);
    }
    throw std::logic_error("unhandled agent kind");
  };

  ExecuteOptions eo;
  eo.concurrency = f.concurrency;
  if (!f.timestamp.empty()) eo.engine.timestamp = [ts = f.timestamp] { return ts; };
  if (!f.quiet)
    eo.after_write = [total = plan.games.size()](std::size_t n) {
      if (n % 25 == 0) std::cerr << "  " << n << " games written (plan has " << total << ")\n";
    };

  const RunLedger ledger = Execute(plan, factory, run_dir, eo);
  const auto records = ReadRecords(run_dir / kRecordsFile);
  int agreements = 0, defaults = 0, invalid = 0, flagged = 0;
  for (const auto& r : records) {
    agreements += IsAgreement(r.outcome);
    defaults += IsDefault(r.outcome);
    invalid += IsInvalid(r.outcome);
    flagged += IsFlagged(r.outcome);
  }
  std::cout << "run directory: " << run_dir.string() << "\n"
            << "games: " << records.size() << " of " << plan.games.size() << " (" << ledger.executed
            << " played now)\n"
            << "agreements: " << agreements << "\n"
            << "defaults: " << defaults << "\n"
            << "invalid: " << invalid << "\n"
            << "flagged for review: " << flagged << "\n";
  if (client) std::cout << "network calls: " << client->network_calls() << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// report

struct ReportFlags {
  std::string run_dir;
  std::string out_dir;
  std::string corrections;
  bool include_defaults = false;
};

int CmdReport(const ReportFlags& f) {
  const fs::path run_dir = f.run_dir;
  const fs::path records_path = run_dir / kRecordsFile;
  if (!fs::exists(records_path)) throw UsageError("no " + records_path.string() + "; nothing to report");
  const auto records = ReadRecords(records_path);
  const fs::path corrections_path = f.corrections.empty() ? run_dir / kCorrectionsFile : fs::path(f.corrections);
  const auto corrections = ReadCorrections(corrections_path);
  const CleanResult clean = Clean(records, corrections);
  WriteFileAtomic(run_dir / kReviewFile, [&] {
    std::string s;
    for (const auto& r : clean.flagged) s += ReviewEntry(r).dump() + "\n";
    return s;
  }());

  MetricsReport rep;
  try {
    rep = AggregateMetrics(clean.kept, {.head_to_head_includes_defaults = f.include_defaults});
  } catch (const EmptyReportError& e) {
    throw UsageError(std::string("empty run: ") + e.what());
  }
  const fs::path out = f.out_dir.empty() ? run_dir / "report" : fs::path(f.out_dir);
  fs::create_directories(out);
  for (const auto& [name, table] : ReportTables(rep)) WriteFileAtomic(out / name, SerializeCsv(table));
  nlohmann::json j = MetricsToJson(rep);
  j["records"] = records.size();
  j["dropped_invalid"] = clean.dropped_invalid.size();
  j["awaiting_review"] = clean.flagged.size();
  j["unused_corrections"] = clean.unused_corrections;
  WriteFileAtomic(out / "report.json", j.dump(2) + "\n");

  std::cout << "records: " << records.size() << "\n"
            << "analyzed: " << rep.games << " (" << rep.agreements << " agreements, " << rep.defaults
            << " defaults)\n"
            << "excluded: " << clean.dropped_invalid.size() << " invalid, " << clean.flagged.size()
            << " awaiting review in " << (run_dir / kReviewFile).string() << "\n"
            << "default rate: " << CsvNumber(rep.default_rate) << "\n";
  if (rep.final_round_decline_rate)
    std::cout << "final-round decline rate: " << CsvNumber(*rep.final_round_decline_rate) << " ("
              << rep.final_round_declines << "/" << rep.final_round_games << ")\n";
  for (const auto& id : clean.unused_corrections)
    std::cerr << "warning: correction for " << id << " matched no flagged record\n";
  std::cout << "tables written to " << out.string() << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Personality-conditioned bargaining tournaments"};
  app.set_config("--config", "", "TOML file with option values ([run], [report], ... sections)");
  app.require_subcommand(1);

  RunFlags run;
  CLI::App* run_cmd = app.add_subcommand("run", "Play (or resume) a round-robin tournament");
  run.space.Add(run_cmd, /*custom_space=*/false);
  run_cmd->add_option("--trials", run.trials, "Round-robin repetitions");
  run_cmd->add_option("--agents", run.agents, "llm | rational | scripted:never-accept | conceder[:step]");
  run_cmd->add_option("--assign", run.assign, "Per-personality agent override, e.g. LowNeuroticism=scripted");
  run_cmd->add_option("--personalities", run.personalities, "Comma-separated subset (default: all ten)");
  run_cmd->add_option("--mode", run.mode, "LLM cache mode: live | record | replay");
  run_cmd->add_option("--cache", run.cache, "LLM response cache (default: <run-dir>/llm_cache.jsonl)");
  run_cmd->add_option("--run-dir", run.run_dir, "Run directory (overrides --runs-root/--run-id)");
  run_cmd->add_option("--run-id", run.run_id, "Run name under --runs-root (default: UTC time)");
  run_cmd->add_option("--runs-root", run.runs_root, "Parent directory for runs");
  run_cmd->add_option("--concurrency", run.concurrency, "Games played in parallel");
  run_cmd->add_option("--seed", run.seed, "Tournament seed");
  run_cmd->add_option("--model", run.model, "Chat model name");
  run_cmd->add_option("--temperature", run.temperature, "Sampling temperature");
  run_cmd->add_option("--endpoint", run.endpoint, "Chat-completion endpoint URL");
  run_cmd->add_option("--api-key-env", run.api_key_env, "Environment variable holding the API key");
  run_cmd->add_option("--rpm", run.rpm, "Requests-per-minute ceiling (0 disables)");
  run_cmd->add_flag("--case-insensitive-accept", run.case_insensitive_accept, "Match \"I accept\" in any case");
  run_cmd->add_option("--timestamp", run.timestamp, "Fixed record timestamp, for reproducible fixtures");
  run_cmd->add_flag("--quiet", run.quiet, "No progress output");

  ReportFlags report;
  CLI::App* report_cmd = app.add_subcommand("report", "Write metric tables for a run directory");
  report_cmd->add_option("run_dir", report.run_dir, "Run directory")->required();
  report_cmd->add_option("--out", report.out_dir, "Output directory (default: <run-dir>/report)");
  report_cmd->add_option("--corrections", report.corrections, "Review corrections (default: <run-dir>/corrections.jsonl)");
  report_cmd->add_flag("--include-defaults", report.include_defaults, "Count defaults as 0 in the head-to-head matrix");

  SpaceFlags eq;
  CLI::App* eq_cmd = app.add_subcommand("equilibrium", "Subgame-perfect outcome under perfect play");
  eq.Add(eq_cmd, /*custom_space=*/true);

  SpaceFlags pareto;
  pareto.game = "multi";
  bool pareto_all = false;
  CLI::App* pareto_cmd = app.add_subcommand("pareto", "Pareto frontier and joint-utility maximizers");
  pareto.Add(pareto_cmd, /*custom_space=*/true);
  pareto_cmd->add_flag("--all", pareto_all, "Also list every undominated allocation");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUserError;
  }

  try {
    if (*run_cmd) return CmdRun(run);
    if (*report_cmd) return CmdReport(report);
    if (*eq_cmd) return CmdEquilibrium(eq);
    if (*pareto_cmd) return CmdPareto(pareto, pareto_all);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUserError;
  } catch (const ContractViolation& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUserError;
  } catch (const CapacityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUserError;
  } catch (const LlmError& e) {
    std::cerr << "error (" << LlmErrorKindName(e.kind()) << "): " << e.what() << "\n";
    if (e.kind() == LlmErrorKind::kCacheMiss)
      std::cerr << "the replay cache has no entry for this request; re-run with --mode record to fill it\n";
    std::cerr << "finished games are kept; re-run the same command to resume\n";
    return kRuntimeError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kUserError;
}
