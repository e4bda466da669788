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


// The recorded tournaments kept under tests/fixtures/replay/. The CLI
// equivalent of each is ReplayArgs().

#ifndef BARGAIN_TESTS_SUPPORT_REPLAY_FIXTURE_HPP_
#define BARGAIN_TESTS_SUPPORT_REPLAY_FIXTURE_HPP_

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "bargain/tournament.hpp"

namespace replay_fixture {

inline constexpr std::array<const char*, 2> kGames = {"single", "multi"};
inline constexpr const char* kCacheFile = "cache.jsonl";
inline constexpr const char* kTimestamp = "2026-01-01T00:00:00Z";
inline constexpr const char* kPersonalities = "HighOpenness,LowAgreeableness,HighNeuroticism";

inline bargain::TournamentPlan Plan(const std::string& game) {
  std::vector<bargain::Personality> ps;
  std::string list = kPersonalities;
  for (std::size_t pos = 0; pos <= list.size();) {
    const std::size_t comma = std::min(list.find(',', pos), list.size());
    ps.push_back(*bargain::ParsePersonality(list.substr(pos, comma - pos)));
    pos = comma + 1;
  }
  const auto space = game == "single" ? bargain::IssueSpace::Single() : bargain::IssueSpace::Multi();
  return bargain::MakePlan(ps, 1, bargain::GameConfig::Canonical(space), 0);
}

inline bargain::AgentFactory Factory(std::shared_ptr<bargain::LlmClient> client) {
  return [client](const bargain::PlannedGame& g, bargain::Seat s) -> std::unique_ptr<bargain::Agent> {
    return std::make_unique<bargain::LlmAgent>(s == bargain::Seat::kP1 ? g.p1 : g.p2, client);
  };
}

inline bargain::ExecuteOptions Options(int concurrency = 1) {
  bargain::ExecuteOptions o;
  o.concurrency = concurrency;
  o.engine.timestamp = [] { return std::string(kTimestamp); };
  return o;
}

// negotiate run arguments that replay the same tournament.
inline std::vector<std::string> ReplayArgs(const std::string& game, const std::string& cache,
                                           const std::string& run_dir) {
  return {"run",       "--game",     game,      "--trials",        "1",          "--agents", "llm",
          "--mode",    "replay",     "--cache", cache,             "--run-dir",  run_dir,    "--seed",
          "0",         "--timestamp", kTimestamp, "--personalities", kPersonalities, "--quiet"};
}

}  // namespace replay_fixture

#endif  // BARGAIN_TESTS_SUPPORT_REPLAY_FIXTURE_HPP_
