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


#include <functional>
#include <memory>

#include <gtest/gtest.h>

#include "bargain/engine.hpp"
#include "support/conformance.hpp"
#include "support/fake_llm.hpp"

namespace bargain {
namespace {

EngineOptions FixedClock() {
  EngineOptions o;
  o.timestamp = [] { return std::string("2026-01-01T00:00:00Z"); };
  return o;
}

using AgentMaker = std::function<std::unique_ptr<Agent>(const GameConfig&, Seat)>;

std::vector<std::pair<std::string, AgentMaker>> DeterministicKinds() {
  return {
      {"rational", [](const GameConfig&, Seat) { return std::make_unique<RationalAgent>(); }},
      {"conceder5", [](const GameConfig&, Seat) { return std::make_unique<ConcederAgent>(5); }},
      {"conceder13", [](const GameConfig&, Seat) { return std::make_unique<ConcederAgent>(13); }},
      {"conceder40", [](const GameConfig&, Seat) { return std::make_unique<ConcederAgent>(40); }},
      {"never", [](const GameConfig&, Seat) { return std::make_unique<NeverAcceptAgent>(); }},
  };
}

TEST(ProtocolConformanceTest, DeterministicAgentsEverySpaceAndHorizon) {
  int games = 0;
  for (const auto& space : {IssueSpace::Single(), IssueSpace::Multi()}) {
    for (int h = 1; h <= 6; ++h) {
      GameConfig cfg = GameConfig::Canonical(space, 3);
      cfg.max_rounds = h;
      for (const auto& [n1, make1] : DeterministicKinds()) {
        for (const auto& [n2, make2] : DeterministicKinds()) {
          auto a = make1(cfg, Seat::kP1);
          auto b = make2(cfg, Seat::kP2);
          const auto rec = RunGame(cfg, *a, *b, n1 + "-" + n2, FixedClock());
          ++games;
          for (const auto& v : conformance::Violations(rec)) ADD_FAILURE() << v;
          EXPECT_FALSE(IsInvalid(rec.outcome)) << n1 << " vs " << n2;
          if (n1 == "never" || n2 == "never") {
            // A never-accept seat can only agree by accepting, which it never does,
            // unless its opponent accepts one of its full claims.
            if (!IsAgreement(rec.outcome)) EXPECT_TRUE(IsDefault(rec.outcome));
          }
          if (n1 == "never" && n2 == "never") {
            EXPECT_TRUE(IsDefault(rec.outcome));
            EXPECT_EQ(rec.payoffs[0].amount() + rec.payoffs[1].amount(), 0);
          }
        }
      }
    }
  }
  EXPECT_EQ(games, 2 * 6 * 25);
}

TEST(ProtocolConformanceTest, FakeLlmGamesAcrossSeeds) {
  auto transport = std::make_shared<fake::FakeTransport>();
  LlmClientConfig cc;
  cc.mode = CacheMode::kLive;
  cc.api_key = "k";
  cc.requests_per_minute = 0;
  auto client = std::make_shared<LlmClient>(cc, transport);
  int invalid = 0, flagged = 0, agreed = 0, defaulted = 0;
  const auto all = AllPersonalities();
  for (int seed = 0; seed < 60; ++seed) {
    for (const auto& space : {IssueSpace::Single(), IssueSpace::Multi()}) {
      LlmAgent a(all[seed % 10], client), b(all[(seed * 3 + 1) % 10], client);
      const auto rec = RunGame(GameConfig::Canonical(space, seed), a, b, "s" + std::to_string(seed), FixedClock());
      for (const auto& v : conformance::Violations(rec)) ADD_FAILURE() << v;
      invalid += IsInvalid(rec.outcome);
      flagged += IsFlagged(rec.outcome);
      agreed += IsAgreement(rec.outcome);
      defaulted += IsDefault(rec.outcome);
    }
  }
  // The fake provider misbehaves often enough to exercise every outcome.
  EXPECT_GT(agreed, 0);
  EXPECT_GT(invalid, 0);
  EXPECT_GT(flagged, 0);
  EXPECT_EQ(agreed + invalid + flagged + defaulted, 120);
}

const char* kOpen60 = "Part A: I open.\nPart B: Round 1. Offer: I get $60, you get $40.\nPart C: start high";

TEST(EngineTest, FormatReminderRecoversOnce) {
  GameConfig cfg = GameConfig::Canonical(IssueSpace::Single(), 1);
  ScriptedAgent a({kOpen60, "Part A: I accept.", "I kept $45, my opponent kept $55."});
  ScriptedAgent b({"Part A: I reject.\nPart B: Let's talk.\nPart C: stall",
                   "Part A: I reject.\nPart B: Round 2. Offer: I get $55, you get $45.",
                   "I kept $55, my opponent kept $45."});
  const auto rec = RunGame(cfg, a, b, "g", FixedClock());
  ASSERT_TRUE(IsAgreement(rec.outcome));
  EXPECT_EQ(std::get<Agreement>(rec.outcome).accepted_round, 2);
  EXPECT_EQ(rec.payoffs[0].amount(), 45);
  ASSERT_EQ(rec.events.size(), 2u);
  ASSERT_EQ(rec.events[1].drafts.size(), 1u);
  EXPECT_NE(rec.events[1].drafts[0].find("Let's talk"), std::string::npos);
  // The reminder went to P2 only.
  EXPECT_NE(b.history()[2].content.find("could be read"), std::string::npos);
  for (const auto& v : conformance::Violations(rec)) ADD_FAILURE() << v;
}

TEST(EngineTest, SecondUnreadableOfferInvalidatesGame) {
  GameConfig cfg = GameConfig::Canonical(IssueSpace::Single(), 1);
  ScriptedAgent a({kOpen60});
  ScriptedAgent b({"Part A: I reject.\nPart B: Let's talk.", "Part A: I reject.\nPart B: Still talking."});
  const auto rec = RunGame(cfg, a, b, "g", FixedClock());
  ASSERT_TRUE(IsInvalid(rec.outcome));
  EXPECT_EQ(std::get<InvalidOutcome>(rec.outcome).reason, "parse");
  EXPECT_EQ(rec.payoffs[0].wire_value(), -1);
  EXPECT_EQ(rec.payoffs[1].wire_value(), -1);
  for (const auto& v : conformance::Violations(rec)) ADD_FAILURE() << v;
}

TEST(EngineTest, MismatchedSingleConfirmationPaysMinusOne) {
  GameConfig cfg = GameConfig::Canonical(IssueSpace::Single(), 1);
  ScriptedAgent a({kOpen60, "I kept $60, my opponent kept $40."});
  ScriptedAgent b({"Part A: I accept.", "I kept $60, my opponent kept $40."});
  const auto rec = RunGame(cfg, a, b, "g", FixedClock());
  ASSERT_TRUE(IsInvalid(rec.outcome));
  EXPECT_EQ(std::get<InvalidOutcome>(rec.outcome).reason, "confirmation mismatch");
  EXPECT_EQ(rec.payoffs[0].wire_value(), -1);
  EXPECT_EQ(rec.payoffs[1].wire_value(), -1);
  EXPECT_EQ(rec.confirmations.size(), 2u);
  EXPECT_EQ(rec.events[0].response, Response::kAccept);
  for (const auto& v : conformance::Violations(rec)) ADD_FAILURE() << v;
}

TEST(EngineTest, MultiConfirmationWithExtraNumbersIsFlagged) {
  GameConfig cfg = GameConfig::Canonical(IssueSpace::Multi(), 1);
  ScriptedAgent a({"Part A: I open.\nPart B: Round 1. Offer: I get 4 apples, 4 bananas, 4 crepes; you get 6 "
                   "apples, 6 bananas, 6 crepes.",
                   "P1: 4 apples, 4 bananas, 4 crepes; P2: 6 apples, 6 bananas, 6 crepes. That is 24 for me."});
  ScriptedAgent b({"Part A: Worth 36 to me. I accept."});
  const auto rec = RunGame(cfg, a, b, "g", FixedClock());
  ASSERT_TRUE(IsFlagged(rec.outcome));
  const auto& f = std::get<FlaggedOutcome>(rec.outcome);
  EXPECT_EQ(f.reasons, std::vector<std::string>{"too many numbers"});
  EXPECT_EQ(f.provisional.p1_share, (std::vector<int>{4, 4, 4}));
  EXPECT_EQ(rec.payoffs[0].amount(), 24);
  EXPECT_EQ(rec.payoffs[1].amount(), 36);
  // Only the proposer of the accepted offer restates it.
  ASSERT_EQ(rec.confirmations.size(), 1u);
  EXPECT_EQ(rec.confirmations[0].seat, Seat::kP1);
  for (const auto& v : conformance::Violations(rec)) ADD_FAILURE() << v;
}

TEST(EngineTest, WrongDeclaredRoundIsFlaggedNotFatal) {
  GameConfig cfg = GameConfig::Canonical(IssueSpace::Single(), 1);
  ScriptedAgent a({"Part A: I open.\nPart B: Round 2. Offer: I get $60, you get $40.",
                   "I kept $60, my opponent kept $40."});
  ScriptedAgent b({"Part A: I accept.", "I kept $40, my opponent kept $60."});
  const auto rec = RunGame(cfg, a, b, "g", FixedClock());
  ASSERT_TRUE(IsAgreement(rec.outcome));
  EXPECT_EQ(rec.flags, std::vector<std::string>{"round-declared-mismatch:1"});
}

TEST(EngineTest, DegradedTurnStillPlays) {
  GameConfig cfg = GameConfig::Canonical(IssueSpace::Single(), 1);
  ScriptedAgent a({"Round 1. Offer: I get $70, you get $30.", "I kept $70, my opponent kept $30."});
  ScriptedAgent b({"I accept.", "I kept $30, my opponent kept $70."});
  const auto rec = RunGame(cfg, a, b, "g", FixedClock());
  ASSERT_TRUE(IsAgreement(rec.outcome));
  EXPECT_EQ(rec.payoffs[0].amount(), 70);
  EXPECT_EQ(rec.flags, std::vector<std::string>{"degraded-turn:1"});
}

TEST(EngineTest, StrategyPartIsNeverForwarded) {
  GameConfig cfg = GameConfig::Canonical(IssueSpace::Single(), 1);
  RationalAgent a, b;
  RunGame(cfg, a, b, "g", FixedClock());
  for (const Agent* agent : {static_cast<Agent*>(&a), static_cast<Agent*>(&b)})
    for (const auto& m : agent->history())
      if (m.role == "user") EXPECT_EQ(m.content.find("backward-induction"), std::string::npos) << m.content;
}

TEST(EngineTest, TransportFailureInvalidatesOnlyThisGame) {
  auto transport = std::make_shared<fake::FakeTransport>();
  transport->script = [](int) { return std::optional<HttpResponse>(HttpResponse{503, "busy"}); };
  LlmClientConfig cc;
  cc.mode = CacheMode::kLive;
  cc.api_key = "k";
  cc.max_retries = 2;
  auto client = std::make_shared<LlmClient>(cc, transport, std::make_shared<fake::VirtualClock>());
  LlmAgent a({Trait::kOpenness, Level::kHigh}, client), b({Trait::kOpenness, Level::kLow}, client);
  const auto rec = RunGame(GameConfig::Canonical(IssueSpace::Single(), 1), a, b, "g", FixedClock());
  ASSERT_TRUE(IsInvalid(rec.outcome));
  EXPECT_EQ(std::get<InvalidOutcome>(rec.outcome).reason, "transport");
  EXPECT_EQ(transport->calls(), 3);
  for (const auto& v : conformance::Violations(rec)) ADD_FAILURE() << v;
}

TEST(EngineTest, MissingCredentialsAbortTheRun) {
  auto transport = std::make_shared<fake::FakeTransport>();
  LlmClientConfig cc;
  cc.mode = CacheMode::kLive;
  cc.api_key_env = "BARGAIN_TEST_UNSET_KEY_VARIABLE";
  auto client = std::make_shared<LlmClient>(cc, transport);
  LlmAgent a({Trait::kOpenness, Level::kHigh}, client), b({Trait::kOpenness, Level::kLow}, client);
  try {
    RunGame(GameConfig::Canonical(IssueSpace::Single(), 1), a, b, "g", FixedClock());
    FAIL() << "expected LlmError";
  } catch (const LlmError& e) {
    EXPECT_EQ(e.kind(), LlmErrorKind::kAuth);
  }
  EXPECT_EQ(transport->calls(), 0);
}

TEST(EngineTest, ConfigIsValidated) {
  GameConfig cfg = GameConfig::Canonical(IssueSpace::Single(), 1);
  cfg.max_rounds = 0;
  RationalAgent a, b;
  EXPECT_THROW(RunGame(cfg, a, b), ContractViolation);
}

}  // namespace
}  // namespace bargain
