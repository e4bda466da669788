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


#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include <gtest/gtest.h>

#include "bargain/tournament.hpp"
#include "support/conformance.hpp"
#include "support/fake_llm.hpp"
#include "support/replay_fixture.hpp"

namespace bargain {
namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() {
    static int serial = 0;
    path = fs::temp_directory_path() /
           ("bargain-tour-" + std::to_string(::getpid()) + "-" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name() + "-" +
            std::to_string(serial++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::string> Lines(const fs::path& p) {
  std::vector<std::string> out;
  std::ifstream in(p);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

ExecuteOptions Fixed(int concurrency = 1) {
  ExecuteOptions o;
  o.concurrency = concurrency;
  o.engine.timestamp = [] { return std::string("2026-01-01T00:00:00Z"); };
  return o;
}

// Deterministic stand-ins whose behavior depends on the personality, so
// different pairings produce different records.
std::unique_ptr<Agent> PolicyAgent(const PlannedGame& g, Seat s) {
  const Personality& p = s == Seat::kP1 ? g.p1 : g.p2;
  const int step = 5 + 7 * static_cast<int>(p.trait) + (p.level == Level::kLow ? 30 : 0);
  if (p.trait == Trait::kNeuroticism && p.level == Level::kLow) return std::make_unique<NeverAcceptAgent>(p);
  return std::make_unique<ConcederAgent>(step, p);
}

GameConfig Single() { return GameConfig::Canonical(IssueSpace::Single()); }

TEST(PlanTest, RoundRobinCounts) {
  const auto all = AllPersonalities();
  EXPECT_EQ(MakePlan(all, 1, Single()).games.size(), 100u);
  const auto full = MakePlan(all, 10, Single());
  EXPECT_EQ(full.games.size(), 1000u);
  std::set<std::string> ids;
  std::set<std::int64_t> seeds;
  for (const auto& g : full.games) {
    ids.insert(g.game_id);
    seeds.insert(g.seed);
  }
  EXPECT_EQ(ids.size(), 1000u);
  EXPECT_EQ(seeds.size(), 1000u);
  // Each ordered pair, self-play included, appears once per trial.
  for (int t = 1; t <= 10; ++t)
    for (const auto& a : all)
      for (const auto& b : all)
        EXPECT_EQ(std::count_if(full.games.begin(), full.games.end(),
                                [&](const PlannedGame& g) { return g.trial == t && g.p1 == a && g.p2 == b; }),
                  1);
}

TEST(PlanTest, TwoPersonalitiesGiveFourOrderedGames) {
  const Personality a{Trait::kOpenness, Level::kHigh}, b{Trait::kAgreeableness, Level::kLow};
  const auto plan = MakePlan({a, b}, 1, Single());
  ASSERT_EQ(plan.games.size(), 4u);
  EXPECT_EQ(plan.games[0].game_id, "t1-HighOpenness-HighOpenness");
  EXPECT_EQ(plan.games[1].game_id, "t1-HighOpenness-LowAgreeableness");
  EXPECT_EQ(plan.games[2].game_id, "t1-LowAgreeableness-HighOpenness");
  EXPECT_EQ(plan.games[3].game_id, "t1-LowAgreeableness-LowAgreeableness");
}

TEST(PlanTest, SeedsAreStableAndDependOnPlanSeed) {
  const auto all = AllPersonalities();
  const auto p = MakePlan(all, 2, Single(), 7);
  const auto q = MakePlan(all, 2, Single(), 7);
  const auto r = MakePlan(all, 2, Single(), 8);
  for (std::size_t i = 0; i < p.games.size(); ++i) {
    EXPECT_EQ(p.games[i].seed, q.games[i].seed);
    EXPECT_NE(p.games[i].seed, r.games[i].seed);
    EXPECT_GE(p.games[i].seed, 0);
  }
  // FNV-1a reference values.
  EXPECT_EQ(StableHash(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(StableHash("a"), 0xaf63dc4c8601ec8cull);
}

TEST(PlanTest, RejectsEmptyPlans) {
  EXPECT_THROW(MakePlan({}, 1, Single()), ContractViolation);
  EXPECT_THROW(MakePlan(AllPersonalities(), 0, Single()), ContractViolation);
}

TEST(ExecuteTest, RunsEveryGameOnceAndResumeIsANoOp) {
  TempDir dir;
  const auto plan = MakePlan(AllPersonalities(), 2, Single());
  const auto ledger = Execute(plan, PolicyAgent, dir.path, Fixed());
  EXPECT_TRUE(ledger.complete());
  EXPECT_EQ(ledger.executed, 200u);
  EXPECT_EQ(ledger.Count(GameStatus::kPending), 0u);

  const auto records = ReadRecords(dir.path / kRecordsFile);
  ASSERT_EQ(records.size(), 200u);
  for (std::size_t i = 0; i < records.size(); ++i) {
    EXPECT_EQ(records[i].game_id, plan.games[i].game_id);
    EXPECT_EQ(records[i].config.random_seed, static_cast<std::uint64_t>(plan.games[i].seed));
    for (const auto& v : conformance::Violations(records[i])) ADD_FAILURE() << records[i].game_id << ": " << v;
  }
  const std::string before = Slurp(dir.path / kRecordsFile);
  const auto again = Execute(plan, PolicyAgent, dir.path, Fixed());
  EXPECT_EQ(again.executed, 0u);
  EXPECT_TRUE(again.complete());
  EXPECT_EQ(Slurp(dir.path / kRecordsFile), before);

  const auto j = nlohmann::json::parse(Slurp(dir.path / kLedgerFile));
  EXPECT_EQ(j.at("cursor"), 200);
  EXPECT_EQ(j.at("total"), 200);
  EXPECT_EQ(j.at("games").size(), 200u);
  EXPECT_EQ(j.at("paths").at("records"), "records.jsonl");
}

TEST(ExecuteTest, RecordLinesCarryTheWholeSchema) {
  TempDir dir;
  Execute(MakePlan(AllPersonalities(), 1, GameConfig::Canonical(IssueSpace::Multi())), PolicyAgent, dir.path, Fixed());
  const auto lines = Lines(dir.path / kRecordsFile);
  ASSERT_EQ(lines.size(), 100u);
  for (const auto& line : lines) {
    const auto j = nlohmann::json::parse(line);
    for (const char* key : {"game_id", "config", "seats", "events", "closing_text", "confirmation", "outcome", "payoffs",
                            "flags", "prompt_template_id", "seed", "timestamps"})
      EXPECT_TRUE(j.contains(key)) << key;
    EXPECT_EQ(j.at("seats").size(), 2u);
    EXPECT_TRUE(j.at("seats").at(0).contains("personality"));
    EXPECT_EQ(RecordToLine(RecordFromJson(j)), line);
  }
}

TEST(ExecuteTest, KilledRunResumesToTheSameRecords) {
  const auto plan = MakePlan(AllPersonalities(), 2, Single(), 11);
  TempDir clean, crashed;
  Execute(plan, PolicyAgent, clean.path, Fixed());

  const pid_t pid = ::fork();
  ASSERT_GE(pid, 0);
  if (pid == 0) {
    auto opts = Fixed();
    opts.after_write = [&](std::size_t n) {
      if (n == 37) {
        // Die halfway through the next line.
        std::ofstream out(crashed.path / kRecordsFile, std::ios::app | std::ios::binary);
        out << R"({"game_id":"t1-Low)";
        out.flush();
        ::kill(::getpid(), SIGKILL);
      }
    };
    try {
      Execute(plan, PolicyAgent, crashed.path, opts);
    } catch (const std::exception& e) {
      std::fprintf(stderr, "child: %s\n", e.what());
    }
    ::_exit(3);  // not reached
  }
  int status = 0;
  ASSERT_EQ(::waitpid(pid, &status, 0), pid);
  ASSERT_TRUE(WIFSIGNALED(status)) << "exit status " << status;
  EXPECT_EQ(WTERMSIG(status), SIGKILL);
  EXPECT_EQ(ReadRecords(crashed.path / kRecordsFile).size(), 37u);

  const auto ledger = Execute(plan, PolicyAgent, crashed.path, Fixed());
  EXPECT_EQ(ledger.executed, plan.games.size() - 37);
  EXPECT_TRUE(ledger.complete());
  const auto records = ReadRecords(crashed.path / kRecordsFile);
  EXPECT_EQ(records.size(), plan.games.size());
  std::set<std::string> ids;
  for (const auto& r : records) ids.insert(r.game_id);
  EXPECT_EQ(ids.size(), plan.games.size());
  EXPECT_EQ(Slurp(crashed.path / kRecordsFile), Slurp(clean.path / kRecordsFile));
}

TEST(ExecuteTest, ConcurrencyDoesNotChangeRecords) {
  const auto plan = MakePlan(AllPersonalities(), 1, GameConfig::Canonical(IssueSpace::Multi()), 5);
  TempDir serial, parallel;
  Execute(plan, PolicyAgent, serial.path, Fixed(1));
  Execute(plan, PolicyAgent, parallel.path, Fixed(8));
  auto a = Lines(serial.path / kRecordsFile), b = Lines(parallel.path / kRecordsFile);
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.size(), 100u);
}

TEST(ExecuteTest, ForeignOrDuplicateRecordsAreRejected) {
  TempDir dir;
  const Personality a{Trait::kOpenness, Level::kHigh}, b{Trait::kOpenness, Level::kLow};
  const auto plan = MakePlan({a, b}, 1, Single());
  Execute(plan, PolicyAgent, dir.path, Fixed());
  const auto line = Lines(dir.path / kRecordsFile).front();
  {
    std::ofstream out(dir.path / kRecordsFile, std::ios::app);
    out << line << '\n';
  }
  EXPECT_THROW(Execute(plan, PolicyAgent, dir.path, Fixed()), std::runtime_error);
  EXPECT_THROW(Execute(MakePlan({a}, 1, Single()), PolicyAgent, dir.path, Fixed()), ContractViolation);
}

TEST(ReadRecordsTest, MidFileCorruptionIsAnError) {
  TempDir dir;
  Execute(MakePlan({Personality{Trait::kOpenness, Level::kHigh}}, 2, Single()), PolicyAgent, dir.path, Fixed());
  auto lines = Lines(dir.path / kRecordsFile);
  ASSERT_EQ(lines.size(), 2u);
  std::ofstream(dir.path / kRecordsFile, std::ios::trunc) << "{oops\n" << lines[1] << '\n';
  EXPECT_THROW(ReadRecords(dir.path / kRecordsFile), std::runtime_error);
  std::ofstream(dir.path / kRecordsFile, std::ios::trunc) << lines[0] << "\n{oops\n";
  EXPECT_EQ(ReadRecords(dir.path / kRecordsFile, /*repair=*/true).size(), 1u);
  EXPECT_EQ(Slurp(dir.path / kRecordsFile), lines[0] + "\n");
}

std::shared_ptr<LlmClient> Client(CacheMode mode, const fs::path& cache, std::shared_ptr<HttpTransport> t) {
  LlmClientConfig c;
  c.mode = mode;
  c.cache_path = cache;
  c.api_key = "sk-test";
  c.requests_per_minute = 0;
  return std::make_shared<LlmClient>(c, std::move(t));
}

AgentFactory LlmFactory(std::shared_ptr<LlmClient> client) {
  return [client](const PlannedGame& g, Seat s) -> std::unique_ptr<Agent> {
    return std::make_unique<LlmAgent>(s == Seat::kP1 ? g.p1 : g.p2, client);
  };
}

TEST(ReplayTest, RecordedTournamentReplaysByteForByteOffline) {
  TempDir dir;
  const auto all = AllPersonalities();
  const std::vector<Personality> four(all.begin(), all.begin() + 4);
  for (const auto& space : {IssueSpace::Single(), IssueSpace::Multi()}) {
    const std::string tag = space.is_single() ? "single" : "multi";
    const auto plan = MakePlan(four, 2, GameConfig::Canonical(space), 3);
    const fs::path cache = dir.path / (tag + "-cache.jsonl");
    auto live = std::make_shared<fake::FakeTransport>();
    Execute(plan, LlmFactory(Client(CacheMode::kRecord, cache, live)), dir.path / (tag + "-rec"), Fixed(4));
    EXPECT_GT(live->calls(), 0);

    auto offline = std::make_shared<fake::NoNetworkTransport>();
    auto replay = Client(CacheMode::kReplay, cache, offline);
    Execute(plan, LlmFactory(replay), dir.path / (tag + "-a"), Fixed(1));
    Execute(plan, LlmFactory(replay), dir.path / (tag + "-b"), Fixed(6));
    EXPECT_EQ(offline->calls.load(), 0);
    EXPECT_EQ(replay->network_calls(), 0u);

    auto rec = Lines(dir.path / (tag + "-rec") / kRecordsFile);
    auto a = Lines(dir.path / (tag + "-a") / kRecordsFile);
    auto b = Lines(dir.path / (tag + "-b") / kRecordsFile);
    ASSERT_EQ(a.size(), plan.games.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(RecordFromJson(nlohmann::json::parse(a[i])).game_id, plan.games[i].game_id);
    std::sort(rec.begin(), rec.end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    EXPECT_EQ(a, rec);
    EXPECT_EQ(b, rec);
  }
}

TEST(ReplayTest, CommittedFixturesReplayOffline) {
  TempDir dir;
  const fs::path fixtures = fs::path(BARGAIN_FIXTURE_DIR) / "replay";
  for (const std::string game : replay_fixture::kGames) {
    auto offline = std::make_shared<fake::NoNetworkTransport>();
    auto client = Client(CacheMode::kReplay, fixtures / game / replay_fixture::kCacheFile, offline);
    Execute(replay_fixture::Plan(game), replay_fixture::Factory(client), dir.path / game, replay_fixture::Options());
    EXPECT_EQ(Slurp(dir.path / game / kRecordsFile), Slurp(fixtures / game / kRecordsFile)) << game;
    EXPECT_EQ(offline->calls.load(), 0);
    // One cache entry per agent turn in the transcript.
    std::size_t turns = 0;
    for (const auto& r : ReadRecords(fixtures / game / kRecordsFile)) {
      for (const auto& e : r.events) turns += 1 + e.drafts.size();
      turns += !r.closing_text.empty();
      turns += r.confirmations.size();
    }
    EXPECT_EQ(client->cache().size(), turns) << game;
  }
}

TEST(ReplayTest, ColdCacheStopsTheRun) {
  TempDir dir;
  const auto plan = MakePlan(AllPersonalities(), 1, Single());
  auto offline = std::make_shared<fake::NoNetworkTransport>();
  try {
    Execute(plan, LlmFactory(Client(CacheMode::kReplay, dir.path / "none.jsonl", offline)), dir.path / "run", Fixed(4));
    FAIL() << "expected a cache miss";
  } catch (const LlmError& e) {
    EXPECT_EQ(e.kind(), LlmErrorKind::kCacheMiss);
  }
  EXPECT_TRUE(ReadRecords(dir.path / "run" / kRecordsFile).empty());
  EXPECT_EQ(offline->calls.load(), 0);
}

GameRecord Multi(const std::string& id, GameOutcome outcome) {
  GameRecord r;
  r.game_id = id;
  r.config = GameConfig::Canonical(IssueSpace::Multi());
  r.outcome = std::move(outcome);
  r.payoffs = engine_detail::PayoffsFor(r.config, r.outcome);
  RoundEvent e;
  e.round = 1;
  e.raw_text = "Part B: Round 1. Offer: I get 7 apples, 4 bananas, 2 crepes; you get 3 apples, 6 bananas, 8 crepes.";
  e.offer = Allocation{{7, 4, 2}};
  e.response = Response::kAccept;
  r.events.push_back(e);
  r.confirmations.push_back({Seat::kP1, "P1: 7, 4, 2; P2: 6, 3, 8"});
  return r;
}

TEST(CleanTest, PartitionsAndAppliesCorrections) {
  const std::vector<GameRecord> records = {
      Multi("ok", Agreement{{{7, 4, 2}}, 1}),
      Multi("def", DefaultOutcome{}),
      Multi("bad", InvalidOutcome{"parse"}),
      Multi("fix", FlaggedOutcome{{{7, 4, 2}}, {"item order suspect"}, 1}),
      Multi("drop", FlaggedOutcome{{{7, 4, 2}}, {"too many numbers"}, 1}),
      Multi("open", FlaggedOutcome{{{7, 4, 2}}, {"shares do not complement"}, 1}),
  };
  const std::vector<Correction> corrections = {
      {"fix", Allocation{{7, 4, 2}}, false, "order checked"},
      {"drop", std::nullopt, true, ""},
      {"ghost", std::nullopt, true, ""},
  };
  const auto c = Clean(records, corrections);
  EXPECT_EQ(c.kept.size() + c.dropped_invalid.size() + c.flagged.size(), records.size());
  ASSERT_EQ(c.kept.size(), 3u);
  EXPECT_EQ(c.kept[2].game_id, "fix");
  EXPECT_TRUE(IsAgreement(c.kept[2].outcome));
  EXPECT_EQ(c.kept[2].payoffs[0].amount(), 7 * 1 + 4 * 2 + 2 * 3);
  EXPECT_EQ(c.kept[2].flags.back(), "corrected-in-review: order checked");
  ASSERT_EQ(c.flagged.size(), 1u);
  EXPECT_EQ(c.flagged[0].game_id, "open");
  EXPECT_EQ(c.dropped_invalid.size(), 2u);
  EXPECT_EQ(c.unused_corrections, std::vector<std::string>{"ghost"});
  for (const auto& r : c.kept) EXPECT_FALSE(IsInvalid(r.outcome) || IsFlagged(r.outcome));
  // The input is left as it was.
  EXPECT_TRUE(IsFlagged(records[3].outcome));
}

TEST(CleanTest, CorrectionsMustBeInBoundsAndUnambiguous) {
  EXPECT_THROW(Clean({Multi("x", FlaggedOutcome{{{7, 4, 2}}, {"too many numbers"}, 1})},
                     {{"x", Allocation{{11, 0, 0}}, false, ""}}),
               std::invalid_argument);
  EXPECT_THROW(CorrectionFromJson({{"game_id", "x"}}), std::invalid_argument);
  EXPECT_THROW(CorrectionFromJson({{"game_id", "x"}, {"drop", true}, {"allocation", {1, 2, 3}}}),
               std::invalid_argument);
  const auto c = CorrectionFromJson({{"game_id", "x"}, {"allocation", {1, 2, 3}}, {"note", "n"}});
  EXPECT_EQ(c.allocation->p1_share, (std::vector<int>{1, 2, 3}));
}

TEST(CleanTest, ReviewFileShowsWhatTheReviewerNeeds) {
  TempDir dir;
  const auto flagged = Multi("rev", FlaggedOutcome{{{7, 4, 2}}, {"item order suspect"}, 1});
  WriteReviewFile(dir.path / kReviewFile, {flagged});
  const auto lines = Lines(dir.path / kReviewFile);
  ASSERT_EQ(lines.size(), 1u);
  const auto j = nlohmann::json::parse(lines[0]);
  EXPECT_EQ(j.at("game_id"), "rev");
  EXPECT_EQ(j.at("reasons").at(0), "item order suspect");
  EXPECT_EQ(j.at("provisional"), nlohmann::json({7, 4, 2}));
  EXPECT_EQ(j.at("accepted_offer_parsed"), nlohmann::json({7, 4, 2}));
  EXPECT_EQ(j.at("confirmation").at(0).at("text"), "P1: 7, 4, 2; P2: 6, 3, 8");
}

}  // namespace
}  // namespace bargain
