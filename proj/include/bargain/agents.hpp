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

#ifndef BARGAIN_AGENTS_HPP_
#define BARGAIN_AGENTS_HPP_

#include <algorithm>
#include <cstdint>
#include <memory>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bargain/core.hpp"
#include "bargain/equilibrium.hpp"
#include "bargain/llm_client.hpp"
#include "bargain/parser.hpp"
#include "bargain/protocol.hpp"
#include "bargain/record.hpp"

namespace bargain {

// System content that gives an LLM agent its personality.
inline std::string SystemContent(const Personality& p) {
  const bool high = p.level == Level::kHigh;
  std::string words;
  std::string name;
  switch (p.trait) {
    case Trait::kOpenness:
      name = "openness";
      words = high ? "imaginative, daydreams, appreciates art and beauty, values all emotions, prefers variety, "
                     "tries new things, broad intellectual curiosity, open to reexamining values"
                   : "focuses on here and now, uninterested in art, ignores and discounts feelings, prefers the "
                     "familiar, narrower intellectual focus, dogmatic, conservative";
      break;
    case Trait::kConscientiousness:
      name = "conscientiousness";
      words = high ? "feels capable and effective, well-organized, neat, tidy, governed by conscience, reliable, "
                     "driven to achieve success, focused on completing tasks, thinks carefully before acting"
                   : "often feels unprepared, unorganized, unmethodical, casual about obligations, low need for "
                     "achievement, procrastinates, distracted, spontaneous, hasty";
      break;
    case Trait::kExtraversion:
      name = "extraversion";
      words = high ? "affectionate, friendly, intimate, gregarious, prefers company, assertive, speaks up, leads, "
                     "vigorous pace, craves excitement, cheerful, optimistic"
                   : "reserved, formal, seldom seeks company, stays in background, leisurely pace, low need for "
                     "thrills, less exuberant";
      break;
    case Trait::kAgreeableness:
      name = "agreeableness";
      words = high ? "see others as honest & well-intentioned, straightforward, frank, willing to help others, "
                     "yields under conflict, defers, self-effacing, humble, tender-minded, easily moved"
                   : "cynical, skeptical, guarded, stretches truth, reluctant to get involved, aggressive, "
                     "competitive, feels superior to others, hardheaded, rational";
      break;
    case Trait::kNeuroticism:
      name = "neuroticism";
      words = high ? "worrying, uneasy, quick to feel anger, easily discouraged, more easily embarrassed, easily "
                     "tempted, difficulty coping"
                   : "relaxed, calm, composed, slow to anger, slowly discouraged, hard to embarrass, resists urges "
                     "easily, handles stress easily";
      break;
  }
  return "You are a bot with a " + std::string(high ? "high" : "low") + " level of " + name +
         ". Words that describe you are: " + words;
}

enum class PromptKind { kOpening, kOpponentTurn, kFormatReminder, kConfirmation };

// What the engine sends an agent. LLM agents only see `text`; deterministic
// agents read the opponent's forwarded Parts A and B from `opponent_message`
// with the same parser the engine uses.
struct AgentPrompt {
  PromptKind kind = PromptKind::kOpening;
  int round = 1;  // round of the offer this reply would make (max_rounds + 1 for the closing turn)
  std::string text;
  std::string opponent_message;
};

// Thrown by agents that cannot produce a turn (e.g. a script ran out).
class AgentFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Agent {
 public:
  explicit Agent(AgentIdentity identity) : identity_(std::move(identity)) {}
  virtual ~Agent() = default;
  Agent(const Agent&) = delete;
  Agent& operator=(const Agent&) = delete;

  const AgentIdentity& identity() const { return identity_; }
  const std::vector<ChatMessage>& history() const { return history_; }
  Seat seat() const { return seat_; }

  void BeginGame(const GameConfig& config, Seat seat) {
    config_ = config;
    seat_ = seat;
    history_.clear();
    OnBeginGame();
  }

  std::string Respond(const AgentPrompt& prompt) {
    history_.push_back({"user", prompt.text});
    std::string reply = Reply(prompt);
    history_.push_back({"assistant", reply});
    return reply;
  }

 protected:
  virtual void OnBeginGame() {}
  virtual std::string Reply(const AgentPrompt& prompt) = 0;

  const GameConfig& config() const { return config_; }
  std::vector<ChatMessage>& mutable_history() { return history_; }

 private:
  AgentIdentity identity_;
  GameConfig config_;
  Seat seat_ = Seat::kP1;
  std::vector<ChatMessage> history_;
};

// ---------------------------------------------------------------------------
// Perfect play

struct PolicyDecision {
  Response response = Response::kReject;
  std::optional<Allocation> counteroffer;
};

// Subgame-perfect play for `seat`. `incoming_round` is the round of the offer
// being answered (0 when opening). Accepts only offers strictly better than
// the seat's continuation value; otherwise makes the next round's equilibrium
// offer, or nothing once the final offer has been rejected.
inline PolicyDecision RationalPolicy(const BargainingSolution& solution, Seat seat, int incoming_round,
                                     const std::optional<Allocation>& incoming) {
  PolicyDecision d;
  if (incoming && incoming_round >= 1 && solution.Accepts(seat, incoming_round, *incoming)) {
    d.response = Response::kAccept;
    return d;
  }
  const int next = incoming_round + 1;
  if (next > solution.horizon()) return d;
  const RoundPlan& plan = solution.plan(next);
  if (plan.proposer != seat) throw ContractViolation("seat does not propose in round " + std::to_string(next));
  d.counteroffer = plan.offer;
  return d;
}

// ---------------------------------------------------------------------------
// Deterministic agents

// Shared machinery for agents whose turns are generated: they read the
// opponent's offer back out of the forwarded text, and answer confirmation
// requests from the offer they made or accepted.
class DeterministicAgent : public Agent {
 public:
  using Agent::Agent;

 protected:
  virtual PolicyDecision Decide(int incoming_round, const std::optional<Allocation>& incoming) = 0;
  virtual std::string StrategyNote(const PolicyDecision& d) const = 0;

  void OnBeginGame() override {
    last_made_.reset();
    last_received_.reset();
    accepted_by_me_ = false;
    last_turn_.clear();
  }

  std::string Reply(const AgentPrompt& prompt) override {
    switch (prompt.kind) {
      case PromptKind::kConfirmation: return Confirm();
      case PromptKind::kFormatReminder: return last_turn_;
      case PromptKind::kOpening:
      case PromptKind::kOpponentTurn: break;
    }
    const int incoming_round = prompt.round - 1;
    std::optional<Allocation> incoming;
    if (incoming_round >= 1) {
      const TurnParts parts = SplitParts(prompt.opponent_message);
      try {
        incoming = ExtractOffer(parts.degraded ? prompt.opponent_message : parts.part_b, config().space,
                                Opponent(seat()))
                       .allocation;
      } catch (const MalformedOffer&) {
      }
    }
    last_received_ = incoming;
    const PolicyDecision d = Decide(incoming_round, incoming);

    TurnParts turn;
    if (d.response == Response::kAccept) {
      accepted_by_me_ = true;
      turn.part_a = std::string(kAcceptPhrase) + ".";
    } else {
      turn.part_a = incoming_round == 0 ? "I am opening the negotiation." : "I reject your offer.";
      if (d.counteroffer) {
        last_made_ = d.counteroffer;
        turn.part_b = RenderOffer(config().space, seat(), *d.counteroffer, prompt.round) +
                      " This is the offer I stand behind.";
      }
    }
    turn.part_c = StrategyNote(d);
    last_turn_ = RenderTurn(turn);
    return last_turn_;
  }

 private:
  std::string Confirm() const {
    const auto& agreed = accepted_by_me_ ? last_received_ : last_made_;
    if (!agreed) throw AgentFailure("asked to confirm without an agreed offer");
    const IssueSpace& space = config().space;
    if (space.is_single()) {
      const int mine = ShareOf(space, *agreed, seat())[0];
      return RenderSingleConfirmation(mine, space.total_money() - mine);
    }
    return RenderMultiConfirmation(space, *agreed);
  }

  std::optional<Allocation> last_made_;
  std::optional<Allocation> last_received_;
  bool accepted_by_me_ = false;
  std::string last_turn_;
};

// Plays the subgame-perfect strategy. It is given both seats' valuations.
class RationalAgent final : public DeterministicAgent {
 public:
  explicit RationalAgent(std::optional<Personality> personality = std::nullopt)
      : DeterministicAgent(AgentIdentity{personality, ImplKind::kRational, "subgame-perfect", {}, {}}) {}

 protected:
  void OnBeginGame() override {
    DeterministicAgent::OnBeginGame();
    solution_.emplace(config().space, config().profiles, config().max_rounds);
  }

  PolicyDecision Decide(int incoming_round, const std::optional<Allocation>& incoming) override {
    return RationalPolicy(*solution_, seat(), incoming_round, incoming);
  }

  std::string StrategyNote(const PolicyDecision& d) const override {
    if (d.response == Response::kAccept) return "The offer beats what waiting would get me.";
    if (!d.counteroffer) return "Declining leaves me no worse off than this offer.";
    return "Playing the backward-induction strategy for the remaining rounds.";
  }

 private:
  std::optional<BargainingSolution> solution_;
};

// Replays a fixed list of turn texts verbatim, one per Respond() call.
class ScriptedAgent final : public Agent {
 public:
  ScriptedAgent(std::vector<std::string> script, std::string name = "fixture",
                std::optional<Personality> personality = std::nullopt)
      : Agent(AgentIdentity{personality, ImplKind::kScripted, std::move(name), {}, {}}),
        script_(std::move(script)) {}

  std::size_t turns_used() const { return next_; }

 protected:
  void OnBeginGame() override { next_ = 0; }

  std::string Reply(const AgentPrompt&) override {
    if (next_ >= script_.size())
      throw AgentFailure("script exhausted after " + std::to_string(script_.size()) + " turns");
    return script_[next_++];
  }

 private:
  std::vector<std::string> script_;
  std::size_t next_ = 0;
};

// Rejects every offer and claims everything for itself each turn. Still
// confirms honestly if the opponent accepts one of its claims.
class NeverAcceptAgent final : public DeterministicAgent {
 public:
  explicit NeverAcceptAgent(std::optional<Personality> personality = std::nullopt)
      : DeterministicAgent(AgentIdentity{personality, ImplKind::kScripted, "never-accept", {}, {}}) {}

 protected:
  PolicyDecision Decide(int incoming_round, const std::optional<Allocation>&) override {
    PolicyDecision d;
    if (incoming_round + 1 <= config().max_rounds) {
      const auto q = config().space.quantities();
      d.counteroffer = AllocationFromShare(config().space, seat(), std::vector<int>(q.begin(), q.end()));
    }
    return d;
  }

  std::string StrategyNote(const PolicyDecision&) const override { return "Hold out for everything."; }
};

// Linear concession: the k-th offer demands max_payoff - k * step for itself.
// Accepts anything worth at least its next demand, and any positive offer
// when no counteroffer is left.
class ConcederAgent final : public DeterministicAgent {
 public:
  explicit ConcederAgent(int step, std::optional<Personality> personality = std::nullopt)
      : DeterministicAgent(AgentIdentity{personality, ImplKind::kConceder, "step=" + std::to_string(step), {}, {}}),
        step_(step) {
    if (step <= 0) throw ContractViolation("concession step must be positive");
  }

  int Demand(int k) const {
    const int max = MaxIndividualPayoff(config().space, own_profile());
    return std::max(0, max - step_ * k);
  }

 protected:
  void OnBeginGame() override {
    DeterministicAgent::OnBeginGame();
    offers_made_ = 0;
  }

  PolicyDecision Decide(int incoming_round, const std::optional<Allocation>& incoming) override {
    PolicyDecision d;
    const bool can_counter = incoming_round + 1 <= config().max_rounds;
    if (incoming) {
      const int u = ComputePayoff(own_profile(), ShareOf(config().space, *incoming, seat()));
      if ((can_counter && u >= Demand(offers_made_ + 1)) || (!can_counter && u > 0)) {
        d.response = Response::kAccept;
        return d;
      }
    }
    if (can_counter) d.counteroffer = OfferWorth(Demand(++offers_made_));
    return d;
  }

  std::string StrategyNote(const PolicyDecision& d) const override {
    if (d.response == Response::kAccept) return "The offer meets my current target.";
    return "Conceding " + std::to_string(step_) + " per offer.";
  }

 private:
  const PreferenceProfile& own_profile() const { return config().profiles[SeatIndex(seat())]; }

  // Starts from the full claim and gives away the units it values least
  // while staying at or above `target`.
  Allocation OfferWorth(int target) const {
    const IssueSpace& space = config().space;
    const auto& values = own_profile().unit_values;
    std::vector<int> keep(space.quantities().begin(), space.quantities().end());
    std::vector<std::size_t> order(keep.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    int utility = ComputePayoff(own_profile(), keep);
    for (std::size_t i : order) {
      while (keep[i] > 0 && utility - values[i] >= target) {
        --keep[i];
        utility -= values[i];
      }
    }
    return AllocationFromShare(space, seat(), std::move(keep));
  }

  int step_;
  int offers_made_ = 0;
};

// ---------------------------------------------------------------------------
// LLM agent

struct LlmAgentOptions {
  std::string model = "gpt-4-turbo";
  double temperature = 1.0;
  int max_output_tokens = 1024;
};

// Personality-prompted chat agent. The full conversation is kept and sent
// on every turn.
class LlmAgent final : public Agent {
 public:
  LlmAgent(Personality personality, std::shared_ptr<LlmClient> client, LlmAgentOptions options = {})
      : Agent(AgentIdentity{personality, ImplKind::kLlm, "chat", options.model, options.temperature}),
        personality_(personality),
        client_(std::move(client)),
        options_(std::move(options)) {}

 protected:
  void OnBeginGame() override { mutable_history().push_back({"system", SystemContent(personality_)}); }

  std::string Reply(const AgentPrompt&) override {
    ChatRequest req;
    req.model = options_.model;
    req.temperature = options_.temperature;
    req.max_output_tokens = options_.max_output_tokens;
    req.messages = history();
    req.seed = static_cast<std::int64_t>((config().random_seed + static_cast<std::uint64_t>(SeatIndex(seat()))) &
                                         0x7fffffffffffffffULL);
    return client_->Complete(req);
  }

 private:
  Personality personality_;
  std::shared_ptr<LlmClient> client_;
  LlmAgentOptions options_;
};

}  // namespace bargain

#endif  // BARGAIN_AGENTS_HPP_
