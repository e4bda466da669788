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

#ifndef BARGAIN_RECORD_HPP_
#define BARGAIN_RECORD_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "bargain/core.hpp"
#include "bargain/parser.hpp"
#include "json.hpp"

namespace bargain {

using nlohmann::json;

inline constexpr std::string_view kPromptTemplateId = "bargain-prompts-v1";

struct GameConfig {
  IssueSpace space = IssueSpace::Single();
  ProfilePair profiles = CanonicalProfiles(IssueSpace::Single());
  int max_rounds = 6;
  std::string prompt_template_id{kPromptTemplateId};
  std::uint64_t random_seed = 0;
  bool disclose_opponent_values = false;
  bool case_insensitive_accept = false;

  static GameConfig Canonical(IssueSpace space, std::uint64_t seed = 0) {
    GameConfig c;
    c.profiles = CanonicalProfiles(space);
    c.space = std::move(space);
    c.random_seed = seed;
    return c;
  }

  void Validate() const {
    if (max_rounds < 1) throw ContractViolation("max_rounds must be at least 1");
    for (const auto& p : profiles)
      if (p.size() != space.num_items()) throw ContractViolation("profile length does not match issue space");
  }

  ParseOptions parse_options() const { return {.case_sensitive_accept = !case_insensitive_accept}; }

  friend bool operator==(const GameConfig&, const GameConfig&) = default;
};

enum class ImplKind { kLlm, kRational, kScripted, kConceder };

inline std::string_view ImplName(ImplKind k) {
  switch (k) {
    case ImplKind::kLlm: return "llm";
    case ImplKind::kRational: return "rational";
    case ImplKind::kScripted: return "scripted";
    case ImplKind::kConceder: return "conceder";
  }
  return "?";
}

struct AgentIdentity {
  std::optional<Personality> personality;
  ImplKind impl = ImplKind::kScripted;
  std::string detail;  // e.g. "never-accept", "step=10"
  std::optional<std::string> model;
  std::optional<double> temperature;

  friend bool operator==(const AgentIdentity&, const AgentIdentity&) = default;
};

// One round: the proposer's offer and the responder's verdict on it.
struct RoundEvent {
  int round = 0;
  Seat proposer = Seat::kP1;
  std::string raw_text;             // the proposer's turn that made this offer
  std::vector<std::string> drafts;  // earlier attempts rejected for format, in order
  Allocation offer;
  std::optional<int> round_declared;
  std::string strategy_text;
  Response response = Response::kReject;

  friend bool operator==(const RoundEvent&, const RoundEvent&) = default;
};

struct Agreement {
  Allocation allocation;
  int accepted_round = 0;
  friend bool operator==(const Agreement&, const Agreement&) = default;
};
struct DefaultOutcome {
  friend bool operator==(const DefaultOutcome&, const DefaultOutcome&) = default;
};
struct InvalidOutcome {
  std::string reason;
  friend bool operator==(const InvalidOutcome&, const InvalidOutcome&) = default;
};
struct FlaggedOutcome {
  Allocation provisional;
  std::vector<std::string> reasons;
  int accepted_round = 0;
  friend bool operator==(const FlaggedOutcome&, const FlaggedOutcome&) = default;
};

using GameOutcome = std::variant<Agreement, DefaultOutcome, InvalidOutcome, FlaggedOutcome>;

inline bool IsAgreement(const GameOutcome& o) { return std::holds_alternative<Agreement>(o); }
inline bool IsDefault(const GameOutcome& o) { return std::holds_alternative<DefaultOutcome>(o); }
inline bool IsInvalid(const GameOutcome& o) { return std::holds_alternative<InvalidOutcome>(o); }
inline bool IsFlagged(const GameOutcome& o) { return std::holds_alternative<FlaggedOutcome>(o); }

struct ConfirmationText {
  Seat seat = Seat::kP1;
  std::string text;
  friend bool operator==(const ConfirmationText&, const ConfirmationText&) = default;
};

struct GameRecord {
  std::string game_id;
  GameConfig config;
  std::array<AgentIdentity, 2> seats;
  std::vector<RoundEvent> events;
  // The turn that ended the offer sequence: an acceptance, or the rejection
  // of the final offer. Empty for games that ended in a failure.
  std::string closing_text;
  std::vector<ConfirmationText> confirmations;
  GameOutcome outcome = DefaultOutcome{};
  std::array<Payoff, 2> payoffs = {Payoff::Dollars(0), Payoff::Dollars(0)};
  std::vector<std::string> flags;
  std::string started_at;
  std::string finished_at;

  friend bool operator==(const GameRecord&, const GameRecord&) = default;
};

// ---------------------------------------------------------------------------
// JSON

inline void to_json(json& j, const IssueSpace& s) {
  if (s.is_single()) {
    j = json{{"kind", "single"}, {"total", s.total_money()}};
  } else {
    j = json{{"kind", "multi"},
             {"items", s.item_names()},
             {"quantities", std::vector<int>(s.quantities().begin(), s.quantities().end())}};
  }
}

inline IssueSpace IssueSpaceFromJson(const json& j) {
  if (j.at("kind") == "single") return IssueSpace::Single(j.at("total").get<int>());
  return IssueSpace::Multi(j.at("items").get<std::vector<std::string>>(),
                           j.at("quantities").get<std::vector<int>>());
}

inline void to_json(json& j, const Allocation& a) { j = a.p1_share; }
inline void from_json(const json& j, Allocation& a) { a.p1_share = j.get<std::vector<int>>(); }

inline std::string SeatJson(Seat s) { return SeatName(s); }
inline Seat SeatFromJson(const json& j) { return j.get<std::string>() == "P1" ? Seat::kP1 : Seat::kP2; }

inline void to_json(json& j, const GameConfig& c) {
  j = json{{"space", c.space},
           {"profiles", {c.profiles[0].unit_values, c.profiles[1].unit_values}},
           {"max_rounds", c.max_rounds},
           {"prompt_template_id", c.prompt_template_id},
           {"random_seed", c.random_seed},
           {"disclose_opponent_values", c.disclose_opponent_values},
           {"case_insensitive_accept", c.case_insensitive_accept}};
}

inline GameConfig GameConfigFromJson(const json& j) {
  GameConfig c;
  c.space = IssueSpaceFromJson(j.at("space"));
  c.profiles = {PreferenceProfile{j.at("profiles").at(0).get<std::vector<int>>()},
                PreferenceProfile{j.at("profiles").at(1).get<std::vector<int>>()}};
  c.max_rounds = j.at("max_rounds").get<int>();
  c.prompt_template_id = j.at("prompt_template_id").get<std::string>();
  c.random_seed = j.at("random_seed").get<std::uint64_t>();
  c.disclose_opponent_values = j.value("disclose_opponent_values", false);
  c.case_insensitive_accept = j.value("case_insensitive_accept", false);
  return c;
}

inline ImplKind ImplFromName(std::string_view name) {
  for (ImplKind k : {ImplKind::kLlm, ImplKind::kRational, ImplKind::kScripted, ImplKind::kConceder})
    if (ImplName(k) == name) return k;
  throw ContractViolation("unknown agent implementation '" + std::string(name) + "'");
}

inline void to_json(json& j, const AgentIdentity& a) {
  j = json{{"personality", a.personality ? json(PersonalityName(*a.personality)) : json(nullptr)},
           {"impl", ImplName(a.impl)},
           {"detail", a.detail}};
  if (a.model) j["model"] = *a.model;
  if (a.temperature) j["temperature"] = *a.temperature;
}

inline AgentIdentity AgentIdentityFromJson(const json& j) {
  AgentIdentity a;
  if (!j.at("personality").is_null()) {
    a.personality = ParsePersonality(j.at("personality").get<std::string>());
    if (!a.personality) throw ContractViolation("unknown personality in record");
  }
  a.impl = ImplFromName(j.at("impl").get<std::string>());
  a.detail = j.value("detail", "");
  if (j.contains("model")) a.model = j.at("model").get<std::string>();
  if (j.contains("temperature")) a.temperature = j.at("temperature").get<double>();
  return a;
}

inline void to_json(json& j, const RoundEvent& e) {
  j = json{{"round", e.round},
           {"proposer", SeatJson(e.proposer)},
           {"raw_text", e.raw_text},
           {"drafts", e.drafts},
           {"offer", e.offer},
           {"round_declared", e.round_declared ? json(*e.round_declared) : json(nullptr)},
           {"strategy_text", e.strategy_text},
           {"response", ResponseName(e.response)}};
}

inline RoundEvent RoundEventFromJson(const json& j) {
  RoundEvent e;
  e.round = j.at("round").get<int>();
  e.proposer = SeatFromJson(j.at("proposer"));
  e.raw_text = j.at("raw_text").get<std::string>();
  e.drafts = j.value("drafts", std::vector<std::string>{});
  e.offer = j.at("offer").get<Allocation>();
  if (!j.at("round_declared").is_null()) e.round_declared = j.at("round_declared").get<int>();
  e.strategy_text = j.value("strategy_text", "");
  e.response = j.at("response") == "accept" ? Response::kAccept : Response::kReject;
  return e;
}

inline json OutcomeToJson(const GameOutcome& o) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Agreement>) {
          return {{"kind", "agreement"}, {"allocation", v.allocation}, {"accepted_round", v.accepted_round}};
        } else if constexpr (std::is_same_v<T, DefaultOutcome>) {
          return {{"kind", "default"}};
        } else if constexpr (std::is_same_v<T, InvalidOutcome>) {
          return {{"kind", "invalid"}, {"reason", v.reason}};
        } else {
          return {{"kind", "flagged"},
                  {"provisional", v.provisional},
                  {"reasons", v.reasons},
                  {"accepted_round", v.accepted_round}};
        }
      },
      o);
}

inline GameOutcome OutcomeFromJson(const json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "agreement") return Agreement{j.at("allocation").get<Allocation>(), j.at("accepted_round").get<int>()};
  if (kind == "default") return DefaultOutcome{};
  if (kind == "invalid") return InvalidOutcome{j.at("reason").get<std::string>()};
  if (kind == "flagged")
    return FlaggedOutcome{j.at("provisional").get<Allocation>(),
                          j.at("reasons").get<std::vector<std::string>>(),
                          j.value("accepted_round", 0)};
  throw ContractViolation("unknown outcome kind '" + kind + "'");
}

// One JSONL line per game.
inline json RecordToJson(const GameRecord& r) {
  json events = json::array();
  for (const auto& e : r.events) events.push_back(e);
  json confirmations = json::array();
  for (const auto& c : r.confirmations) confirmations.push_back({{"seat", SeatJson(c.seat)}, {"text", c.text}});
  return json{{"game_id", r.game_id},
              {"config", r.config},
              {"seats", {r.seats[0], r.seats[1]}},
              {"events", events},
              {"closing_text", r.closing_text},
              {"confirmation", confirmations},
              {"outcome", OutcomeToJson(r.outcome)},
              {"payoffs", {r.payoffs[0].wire_value(), r.payoffs[1].wire_value()}},
              {"flags", r.flags},
              {"prompt_template_id", r.config.prompt_template_id},
              {"seed", r.config.random_seed},
              {"timestamps", {{"started", r.started_at}, {"finished", r.finished_at}}}};
}

inline GameRecord RecordFromJson(const json& j) {
  GameRecord r;
  r.game_id = j.at("game_id").get<std::string>();
  r.config = GameConfigFromJson(j.at("config"));
  r.seats = {AgentIdentityFromJson(j.at("seats").at(0)), AgentIdentityFromJson(j.at("seats").at(1))};
  for (const auto& e : j.at("events")) r.events.push_back(RoundEventFromJson(e));
  r.closing_text = j.value("closing_text", "");
  for (const auto& c : j.at("confirmation"))
    r.confirmations.push_back({SeatFromJson(c.at("seat")), c.at("text").get<std::string>()});
  r.outcome = OutcomeFromJson(j.at("outcome"));
  r.payoffs = {Payoff::FromWire(j.at("payoffs").at(0).get<int>()),
               Payoff::FromWire(j.at("payoffs").at(1).get<int>())};
  r.flags = j.value("flags", std::vector<std::string>{});
  r.started_at = j.at("timestamps").value("started", "");
  r.finished_at = j.at("timestamps").value("finished", "");
  return r;
}

inline std::string RecordToLine(const GameRecord& r) { return RecordToJson(r).dump(); }

}  // namespace bargain

#endif  // BARGAIN_RECORD_HPP_
