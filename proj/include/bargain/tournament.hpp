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

// Round-robin scheduling, resumable execution and record cleaning.
//
// A run directory holds:
//   records.jsonl     one GameRecord per line, appended as games finish
//   ledger.json       per-game status, rewritten atomically after each game
//   review.jsonl      flagged multi-issue agreements awaiting a human
//   corrections.jsonl human-written resolutions for review entries
//
// records.jsonl is the source of truth on resume. The ledger is derived from
// it and may lag by one game after a crash.

#ifndef BARGAIN_TOURNAMENT_HPP_
#define BARGAIN_TOURNAMENT_HPP_

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "bargain/agents.hpp"
#include "bargain/core.hpp"
#include "bargain/engine.hpp"
#include "bargain/llm_client.hpp"
#include "bargain/record.hpp"
#include "json.hpp"

namespace bargain {

namespace fs = std::filesystem;

inline constexpr std::string_view kRecordsFile = "records.jsonl";
inline constexpr std::string_view kLedgerFile = "ledger.json";
inline constexpr std::string_view kReviewFile = "review.jsonl";
inline constexpr std::string_view kCorrectionsFile = "corrections.jsonl";

// 64-bit FNV-1a. Stable across platforms and runs, unlike std::hash.
inline std::uint64_t StableHash(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

struct PlannedGame {
  std::string game_id;
  int trial = 0;
  Personality p1;
  Personality p2;
  std::int64_t seed = 0;
};

struct TournamentPlan {
  GameConfig base;  // seed is replaced per game
  int trials = 0;
  std::int64_t seed = 0;
  std::vector<Personality> personalities;
  std::vector<PlannedGame> games;

  std::size_t games_per_trial() const { return personalities.size() * personalities.size(); }
};

inline std::int64_t GameSeed(std::int64_t plan_seed, int trial, const Personality& p1, const Personality& p2) {
  std::ostringstream os;
  os << plan_seed << '/' << trial << '/' << PersonalityName(p1) << '/' << PersonalityName(p2);
  return static_cast<std::int64_t>(StableHash(os.str()) & 0x7fffffffffffffffull);
}

inline std::string GameId(int trial, const Personality& p1, const Personality& p2) {
  std::ostringstream os;
  os << 't' << trial << '-' << PersonalityName(p1) << '-' << PersonalityName(p2);
  return os.str();
}

// Every ordered pair, self-play included, for each trial.
inline TournamentPlan MakePlan(const std::vector<Personality>& personalities, int trials, const GameConfig& base,
                               std::int64_t seed = 0) {
  if (personalities.empty()) throw ContractViolation("plan needs at least one personality");
  if (trials < 1) throw ContractViolation("plan needs at least one trial");
  base.Validate();
  TournamentPlan plan{base, trials, seed, personalities, {}};
  plan.games.reserve(static_cast<std::size_t>(trials) * plan.games_per_trial());
  for (int t = 1; t <= trials; ++t)
    for (const auto& a : personalities)
      for (const auto& b : personalities) plan.games.push_back({GameId(t, a, b), t, a, b, GameSeed(seed, t, a, b)});
  return plan;
}

inline GameConfig ConfigFor(const TournamentPlan& plan, const PlannedGame& g) {
  GameConfig c = plan.base;
  c.random_seed = g.seed;
  return c;
}

inline nlohmann::json PlanToJson(const TournamentPlan& plan) {
  nlohmann::json ps = nlohmann::json::array();
  for (const auto& p : plan.personalities) ps.push_back(PersonalityName(p));
  return {{"base", plan.base}, {"trials", plan.trials}, {"seed", plan.seed}, {"personalities", ps},
          {"games", plan.games.size()}};
}

// ---------------------------------------------------------------------------
// Record files.

// Reads records.jsonl. A final line that is incomplete (no newline) or does
// not parse is a write torn by a crash; it is ignored and, when `repair` is
// set, truncated away. Damage anywhere else is an error.
inline std::vector<GameRecord> ReadRecords(const fs::path& path, bool repair = false) {
  std::vector<GameRecord> out;
  std::ifstream in(path, std::ios::binary);
  if (!in) return out;
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  in.close();

  std::size_t pos = 0, good_end = 0;
  while (pos < content.size()) {
    const std::size_t nl = content.find('\n', pos);
    const bool complete = nl != std::string::npos;
    const std::string line = content.substr(pos, complete ? nl - pos : std::string::npos);
    const std::size_t next = complete ? nl + 1 : content.size();
    if (!complete) break;  // torn, even if it happens to parse
    if (!line.empty()) {
      try {
        out.push_back(RecordFromJson(nlohmann::json::parse(line)));
      } catch (const std::exception&) {
        if (next < content.size())
          throw std::runtime_error("corrupt record line at byte " + std::to_string(pos) + " of " + path.string());
        break;
      }
    }
    good_end = next;
    pos = next;
  }
  if (repair && good_end < content.size()) fs::resize_file(path, good_end);
  return out;
}

inline void WriteFileAtomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// Ledger.

enum class GameStatus { kPending, kDone, kInvalid, kFlagged };

inline std::string StatusName(GameStatus s) {
  switch (s) {
    case GameStatus::kPending: return "pending";
    case GameStatus::kDone: return "done";
    case GameStatus::kInvalid: return "invalid";
    case GameStatus::kFlagged: return "flagged";
  }
  return "?";
}

inline GameStatus StatusOf(const GameRecord& r) {
  if (IsInvalid(r.outcome)) return GameStatus::kInvalid;
  if (IsFlagged(r.outcome)) return GameStatus::kFlagged;
  return GameStatus::kDone;
}

struct RunLedger {
  fs::path run_dir;
  std::vector<std::string> order;  // plan order
  std::map<std::string, GameStatus> status;
  std::size_t completed = 0;   // resume cursor: games with a record
  std::size_t executed = 0;    // games run by this invocation

  std::size_t Count(GameStatus s) const {
    return static_cast<std::size_t>(
        std::count_if(status.begin(), status.end(), [&](const auto& kv) { return kv.second == s; }));
  }
  bool complete() const { return completed == order.size(); }

  nlohmann::json ToJson(const TournamentPlan& plan) const {
    nlohmann::json games = nlohmann::json::object();
    for (const auto& id : order) games[id] = StatusName(status.at(id));
    return {{"plan", PlanToJson(plan)},
            {"paths",
             {{"records", std::string(kRecordsFile)},
              {"review", std::string(kReviewFile)},
              {"corrections", std::string(kCorrectionsFile)}}},
            {"cursor", completed},
            {"total", order.size()},
            {"games", games}};
  }
};

// ---------------------------------------------------------------------------
// Execution.

// Builds the agent for one seat of one planned game.
using AgentFactory = std::function<std::unique_ptr<Agent>(const PlannedGame&, Seat)>;

struct ExecuteOptions {
  int concurrency = 1;
  EngineOptions engine;
  // Called after each record is durably appended, with the count written by
  // this invocation. Test hook for crash injection.
  std::function<void(std::size_t)> after_write;
};

class FatalRunError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Runs every planned game that has no record yet. Per-game failures become
// Invalid records; fatal client errors (authentication, replay cache miss)
// stop the run after in-flight games finish, and are rethrown.
inline RunLedger Execute(const TournamentPlan& plan, const AgentFactory& factory, const fs::path& run_dir,
                         const ExecuteOptions& options = {}) {
  if (options.concurrency < 1) throw ContractViolation("concurrency must be at least 1");
  fs::create_directories(run_dir);
  const fs::path records_path = run_dir / kRecordsFile;
  const fs::path ledger_path = run_dir / kLedgerFile;

  RunLedger ledger;
  ledger.run_dir = run_dir;
  std::set<std::string> planned;
  for (const auto& g : plan.games) {
    ledger.order.push_back(g.game_id);
    ledger.status[g.game_id] = GameStatus::kPending;
    planned.insert(g.game_id);
  }
  for (const auto& r : ReadRecords(records_path, /*repair=*/true)) {
    if (!planned.count(r.game_id))
      throw ContractViolation("run directory holds game " + r.game_id + " which is not in this plan");
    if (ledger.status[r.game_id] != GameStatus::kPending)
      throw std::runtime_error("duplicate record for game " + r.game_id);
    ledger.status[r.game_id] = StatusOf(r);
    ++ledger.completed;
  }

  std::vector<const PlannedGame*> pending;
  for (const auto& g : plan.games)
    if (ledger.status[g.game_id] == GameStatus::kPending) pending.push_back(&g);

  std::ofstream sink(records_path, std::ios::binary | std::ios::app);
  if (!sink) throw std::runtime_error("cannot open " + records_path.string());
  WriteFileAtomic(ledger_path, ledger.ToJson(plan).dump(1) + "\n");

  std::mutex write_mu;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr fatal;

  auto commit = [&](const GameRecord& rec) {
    std::lock_guard<std::mutex> lock(write_mu);
    sink << RecordToLine(rec) << '\n';
    sink.flush();
    if (!sink) throw std::runtime_error("write failed for " + records_path.string());
    ledger.status[rec.game_id] = StatusOf(rec);
    ++ledger.completed;
    ++ledger.executed;
    WriteFileAtomic(ledger_path, ledger.ToJson(plan).dump(1) + "\n");
    if (options.after_write) options.after_write(ledger.executed);
  };

  auto worker = [&] {
    while (!stop.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= pending.size()) return;
      const PlannedGame& g = *pending[i];
      try {
        auto a = factory(g, Seat::kP1);
        auto b = factory(g, Seat::kP2);
        commit(RunGame(ConfigFor(plan, g), *a, *b, g.game_id, options.engine));
      } catch (...) {
        std::lock_guard<std::mutex> lock(write_mu);
        if (!fatal) fatal = std::current_exception();
        stop = true;
      }
    }
  };

  const int n = std::min<int>(options.concurrency, static_cast<int>(std::max<std::size_t>(pending.size(), 1)));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (fatal) std::rethrow_exception(fatal);
  return ledger;
}

// ---------------------------------------------------------------------------
// Cleaning.

// A human resolution of a flagged record: either the corrected allocation
// (P1's share) or an instruction to drop the game.
struct Correction {
  std::string game_id;
  std::optional<Allocation> allocation;
  bool drop = false;
  std::string note;
};

inline Correction CorrectionFromJson(const nlohmann::json& j) {
  Correction c;
  c.game_id = j.at("game_id").get<std::string>();
  if (j.contains("allocation") && !j.at("allocation").is_null())
    c.allocation = Allocation{j.at("allocation").get<std::vector<int>>()};
  c.drop = j.value("drop", false);
  c.note = j.value("note", std::string());
  if (c.drop == c.allocation.has_value())
    throw std::invalid_argument("correction for " + c.game_id + " must give exactly one of allocation or drop");
  return c;
}

inline std::vector<Correction> ReadCorrections(const fs::path& path) {
  std::vector<Correction> out;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line))
    if (line.find_first_not_of(" \t\r") != std::string::npos) out.push_back(CorrectionFromJson(nlohmann::json::parse(line)));
  return out;
}

struct CleanResult {
  std::vector<GameRecord> kept;
  std::vector<GameRecord> dropped_invalid;
  std::vector<GameRecord> flagged;       // unresolved; excluded from kept
  std::vector<std::string> unused_corrections;
};

// Invalid records are dropped. Flagged records stay out of `kept` until a
// correction resolves them; a resolved copy joins `kept` while the original
// record is left as it was.
inline CleanResult Clean(const std::vector<GameRecord>& records, const std::vector<Correction>& corrections = {}) {
  std::map<std::string, const Correction*> by_id;
  for (const auto& c : corrections) by_id[c.game_id] = &c;
  std::set<std::string> used;

  CleanResult out;
  for (const auto& r : records) {
    if (IsInvalid(r.outcome)) {
      out.dropped_invalid.push_back(r);
      continue;
    }
    const auto* f = std::get_if<FlaggedOutcome>(&r.outcome);
    if (!f) {
      out.kept.push_back(r);
      continue;
    }
    const auto it = by_id.find(r.game_id);
    if (it == by_id.end()) {
      out.flagged.push_back(r);
      continue;
    }
    used.insert(r.game_id);
    const Correction& c = *it->second;
    GameRecord fixed = r;
    if (c.drop) {
      fixed.outcome = InvalidOutcome{"dropped in review"};
      fixed.payoffs = {Payoff::Invalid(), Payoff::Invalid()};
      out.dropped_invalid.push_back(std::move(fixed));
      continue;
    }
    CheckWithinBounds(r.config.space, c.allocation->p1_share);
    fixed.outcome = Agreement{*c.allocation, f->accepted_round};
    const auto u = SeatPayoffs(r.config.space, r.config.profiles, *c.allocation);
    fixed.payoffs = {Payoff::Dollars(u[0]), Payoff::Dollars(u[1])};
    fixed.flags.push_back("corrected-in-review" + (c.note.empty() ? std::string() : ": " + c.note));
    out.kept.push_back(std::move(fixed));
  }
  for (const auto& c : corrections)
    if (!used.count(c.game_id)) out.unused_corrections.push_back(c.game_id);
  return out;
}

inline nlohmann::json ReviewEntry(const GameRecord& r) {
  const auto& f = std::get<FlaggedOutcome>(r.outcome);
  nlohmann::json conf = nlohmann::json::array();
  for (const auto& c : r.confirmations) conf.push_back({{"seat", SeatName(c.seat)}, {"text", c.text}});
  const int idx = f.accepted_round - 1;
  const bool have_offer = idx >= 0 && static_cast<std::size_t>(idx) < r.events.size();
  return {{"game_id", r.game_id},
          {"reasons", f.reasons},
          {"provisional", f.provisional.p1_share},
          {"accepted_round", f.accepted_round},
          {"accepted_offer_parsed", have_offer ? nlohmann::json(r.events[idx].offer.p1_share) : nlohmann::json()},
          {"accepted_offer_text", have_offer ? r.events[idx].raw_text : std::string()},
          {"confirmation", conf}};
}

inline void WriteReviewFile(const fs::path& path, const std::vector<GameRecord>& flagged) {
  std::string content;
  for (const auto& r : flagged) content += ReviewEntry(r).dump() + "\n";
  WriteFileAtomic(path, content);
}

}  // namespace bargain

#endif  // BARGAIN_TOURNAMENT_HPP_
