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

// Drives one game through the offer/response protocol.
//
// Round r has one offer (P1 in odd rounds, P2 in even rounds) and one
// response. A responder's turn carries its verdict in Part A and, when it
// rejects, the next round's offer in Part B. Only Parts A and B reach the
// opponent. After an acceptance the agreement is confirmed: in single-issue
// games both seats report the split and must agree; in multi-issue games the
// proposer of the accepted offer restates it and suspicious restatements are
// flagged for review.

#ifndef BARGAIN_ENGINE_HPP_
#define BARGAIN_ENGINE_HPP_

#include <array>
#include <chrono>
#include <ctime>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bargain/agents.hpp"
#include "bargain/core.hpp"
#include "bargain/parser.hpp"
#include "bargain/prompts.hpp"
#include "bargain/protocol.hpp"
#include "bargain/record.hpp"

namespace bargain {

inline std::string UtcTimestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct EngineOptions {
  std::function<std::string()> timestamp = UtcTimestamp;
  // Re-prompts allowed after a turn whose offer cannot be read.
  int format_retries = 1;
};

inline constexpr std::string_view kReasonTransport = "transport";
inline constexpr std::string_view kReasonParse = "parse";
inline constexpr std::string_view kReasonAgent = "agent";
inline constexpr std::string_view kReasonMismatch = "confirmation mismatch";

namespace engine_detail {

// The part of a proposer's turn that states its offer.
inline std::string OfferText(const std::string& raw_text) {
  const TurnParts parts = SplitParts(raw_text);
  return parts.degraded || parts.part_b.empty() ? raw_text : parts.part_b;
}

// The text whose Part A carries a responder's verdict: the first attempt,
// before any format re-prompt.
inline const std::string& VerdictText(const RoundEvent& e) { return e.drafts.empty() ? e.raw_text : e.drafts.front(); }

inline std::array<Payoff, 2> PayoffsFor(const GameConfig& config, const GameOutcome& outcome) {
  auto dollars = [&](const Allocation& a) {
    const auto u = SeatPayoffs(config.space, config.profiles, a);
    return std::array<Payoff, 2>{Payoff::Dollars(u[0]), Payoff::Dollars(u[1])};
  };
  if (const auto* a = std::get_if<Agreement>(&outcome)) return dollars(a->allocation);
  if (const auto* f = std::get_if<FlaggedOutcome>(&outcome)) return dollars(f->provisional);
  if (IsInvalid(outcome)) return {Payoff::Invalid(), Payoff::Invalid()};
  return {Payoff::Dollars(0), Payoff::Dollars(0)};
}

// Turns confirmation texts into an outcome. `texts` holds P1's and P2's
// reports for single-issue games, or the proposer's restatement for
// multi-issue games.
inline GameOutcome ResolveConfirmation(const GameConfig& config, int accepted_round,
                                       const std::vector<ConfirmationText>& texts,
                                       std::vector<std::string>* flags) {
  if (config.space.is_single()) {
    std::string t1, t2;
    for (const auto& c : texts) (c.seat == Seat::kP1 ? t1 : t2) = c.text;
    try {
      const auto [p1, p2] = ParseConfirmationSingle(t1, t2, config.space.total_money());
      (void)p2;
      return Agreement{{{p1}}, accepted_round};
    } catch (const ConfirmationMismatch& e) {
      if (flags) flags->push_back(std::string("confirmation: ") + e.what());
      return InvalidOutcome{std::string(kReasonMismatch)};
    }
  }
  const std::string restated = texts.empty() ? std::string() : texts.front().text;
  MultiConfirmation mc = FlagConfirmationMulti(restated, config.space);
  if (mc.flags.empty()) return Agreement{std::move(mc.allocation), accepted_round};
  FlaggedOutcome f{std::move(mc.allocation), {}, accepted_round};
  for (auto flag : mc.flags) f.reasons.emplace_back(FlagName(flag));
  return f;
}

}  // namespace engine_detail

// Asks for and resolves the post-acceptance confirmation of the offer made
// in `accepted_round`.
inline GameOutcome ConfirmAgreement(GameRecord& record, int accepted_round, Agent& p1, Agent& p2) {
  const GameConfig& config = record.config;
  const Seat proposer = ProposerOf(accepted_round);
  const std::string offer_text = engine_detail::OfferText(record.events.at(accepted_round - 1).raw_text);
  std::array<Agent*, 2> agents = {&p1, &p2};

  record.confirmations.clear();
  if (config.space.is_single()) {
    const std::string prompt = RenderSingleConfirmationPrompt(config, proposer, offer_text, accepted_round);
    for (Seat s : kSeats) {
      const std::string text = agents[SeatIndex(s)]->Respond({PromptKind::kConfirmation, accepted_round, prompt, ""});
      record.confirmations.push_back({s, text});
    }
  } else {
    const std::string prompt = RenderMultiConfirmationPrompt(config, offer_text, accepted_round);
    const std::string text = agents[SeatIndex(proposer)]->Respond({PromptKind::kConfirmation, accepted_round, prompt, ""});
    record.confirmations.push_back({proposer, text});
  }
  return engine_detail::ResolveConfirmation(config, accepted_round, record.confirmations, &record.flags);
}

inline GameRecord RunGame(const GameConfig& config, Agent& p1, Agent& p2, std::string game_id = {},
                          const EngineOptions& options = {}) {
  config.Validate();
  GameRecord record;
  record.game_id = std::move(game_id);
  record.config = config;
  record.seats = {p1.identity(), p2.identity()};
  record.started_at = options.timestamp();

  std::array<Agent*, 2> agents = {&p1, &p2};
  p1.BeginGame(config, Seat::kP1);
  p2.BeginGame(config, Seat::kP2);
  const ParseOptions popts = config.parse_options();
  const int horizon = config.max_rounds;

  // Reads the offer for `round` out of `text`, re-prompting on format failure.
  // Returns false when the offer stays unreadable.
  auto take_offer = [&](Seat speaker, int round, std::string text, const std::string& opponent_message,
                        bool responds) {
    RoundEvent ev;
    ev.round = round;
    ev.proposer = speaker;
    ParsedTurn pt = ParseTurn(text, config.space, speaker, responds, popts);
    for (int attempt = 0; !pt.offer && attempt < options.format_retries; ++attempt) {
      ev.drafts.push_back(text);
      const std::string problem = pt.offer_error.empty() ? "no offer found" : pt.offer_error;
      text = agents[SeatIndex(speaker)]->Respond(
          {PromptKind::kFormatReminder, round, RenderFormatReminder(config, round, problem), opponent_message});
      pt = ParseTurn(text, config.space, speaker, /*responds=*/false, popts);
    }
    ev.raw_text = std::move(text);
    ev.strategy_text = pt.strategy_text;
    ev.round_declared = pt.round_declared;
    if (pt.parts.degraded) record.flags.push_back("degraded-turn:" + std::to_string(round));
    const bool ok = pt.offer.has_value();
    if (ok) {
      ev.offer = *pt.offer;
      if (pt.round_declared && *pt.round_declared != round)
        record.flags.push_back("round-declared-mismatch:" + std::to_string(round));
    }
    record.events.push_back(std::move(ev));
    return ok;
  };

  try {
    const std::string opening = p1.Respond({PromptKind::kOpening, 1, RenderOpeningPrompt(config, Seat::kP1, {}), ""});
    if (!take_offer(Seat::kP1, 1, opening, "", /*responds=*/false)) {
      record.outcome = InvalidOutcome{std::string(kReasonParse)};
    } else {
      for (int r = 1; r <= horizon; ++r) {
        const Seat responder = Opponent(ProposerOf(r));
        const std::string forwarded = ForwardedText(SplitParts(record.events.back().raw_text));
        AgentPrompt prompt = r == 1 ? AgentPrompt{PromptKind::kOpening, 2,
                                                  RenderOpeningPrompt(config, Seat::kP2, forwarded), forwarded}
                                    : AgentPrompt{PromptKind::kOpponentTurn, r + 1, forwarded, forwarded};
        const std::string reply = agents[SeatIndex(responder)]->Respond(prompt);
        const Response verdict = ParseTurn(reply, config.space, responder, true, popts).response;
        record.events.back().response = verdict;

        if (verdict == Response::kAccept) {
          record.closing_text = reply;
          record.outcome = ConfirmAgreement(record, r, p1, p2);
          break;
        }
        if (r == horizon) {
          record.closing_text = reply;
          record.outcome = DefaultOutcome{};
          break;
        }
        if (!take_offer(responder, r + 1, reply, forwarded, /*responds=*/true)) {
          record.outcome = InvalidOutcome{std::string(kReasonParse)};
          break;
        }
      }
    }
  } catch (const LlmError& e) {
    if (e.fatal()) throw;
    record.flags.push_back(std::string("error: ") + e.what());
    record.outcome = InvalidOutcome{std::string(kReasonTransport)};
  } catch (const AgentFailure& e) {
    record.flags.push_back(std::string("error: ") + e.what());
    record.outcome = InvalidOutcome{std::string(kReasonAgent)};
  }

  record.payoffs = engine_detail::PayoffsFor(config, record.outcome);
  record.finished_at = options.timestamp();
  return record;
}

// Re-derives a record's outcome from its raw texts alone. Outcomes caused by
// failures outside the text (transport, agent errors) are returned as stored.
inline GameOutcome ReconstructOutcome(const GameRecord& record) {
  if (const auto* inv = std::get_if<InvalidOutcome>(&record.outcome))
    if (inv->reason == kReasonTransport || inv->reason == kReasonAgent) return record.outcome;

  const GameConfig& config = record.config;
  const ParseOptions popts = config.parse_options();
  const auto& events = record.events;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const RoundEvent& e = events[i];
    const ParsedTurn pt = ParseTurn(e.raw_text, config.space, e.proposer, /*responds=*/false, popts);
    if (!pt.offer) return InvalidOutcome{std::string(kReasonParse)};
    if (i + 1 == events.size() && record.closing_text.empty()) return InvalidOutcome{std::string(kReasonParse)};

    const std::string& verdict_text = i + 1 < events.size() ? engine_detail::VerdictText(events[i + 1]) : record.closing_text;
    const Response verdict = ParseTurn(verdict_text, config.space, Opponent(e.proposer), true, popts).response;
    if (verdict == Response::kAccept)
      return engine_detail::ResolveConfirmation(config, e.round, record.confirmations, nullptr);
    if (i + 1 == events.size()) {
      if (e.round == config.max_rounds) return DefaultOutcome{};
      return InvalidOutcome{std::string(kReasonParse)};
    }
  }
  return InvalidOutcome{std::string(kReasonParse)};
}

}  // namespace bargain

#endif  // BARGAIN_ENGINE_HPP_
