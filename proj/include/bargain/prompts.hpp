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

// Engine-authored prompt texts. Every text here belongs to the template set
// named by kPromptTemplateId; changing any wording means bumping that id.

#ifndef BARGAIN_PROMPTS_HPP_
#define BARGAIN_PROMPTS_HPP_

#include <optional>
#include <sstream>
#include <string>

#include "bargain/core.hpp"
#include "bargain/record.hpp"

namespace bargain {

namespace prompt_detail {

inline std::string ListItems(const IssueSpace& space) {
  std::ostringstream os;
  const auto q = space.quantities();
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (i > 0) os << (i + 1 == q.size() ? ", and " : ", ");
    os << q[i] << ' ' << space.item_names()[i];
  }
  return os.str();
}

inline std::string Valuation(const IssueSpace& space, const PreferenceProfile& profile) {
  std::ostringstream os;
  for (std::size_t i = 0; i < profile.size(); ++i) {
    if (i > 0) os << (i + 1 == profile.size() ? ", and " : ", ");
    os << space.item_names()[i] << " at $" << profile.unit_values[i] << " each";
  }
  return os.str();
}

inline std::string RoundsOf(Seat seat, int max_rounds) {
  std::ostringstream os;
  bool first = true;
  for (int r = 1; r <= max_rounds; ++r) {
    if (ProposerOf(r) != seat) continue;
    os << (first ? "" : ", ") << r;
    first = false;
  }
  return os.str();
}

inline std::string OfferForm(const IssueSpace& space) {
  if (space.is_single()) return "\"Round <n>. Offer: I get $<amount>, you get $<amount>.\"";
  std::ostringstream os;
  os << "\"Round <n>. Offer: I get ";
  for (std::size_t i = 0; i < space.num_items(); ++i)
    os << (i ? ", " : "") << '<' << space.item_names()[i] << "> " << space.item_names()[i];
  os << "; you get ";
  for (std::size_t i = 0; i < space.num_items(); ++i)
    os << (i ? ", " : "") << '<' << space.item_names()[i] << "> " << space.item_names()[i];
  os << ".\"";
  return os.str();
}

}  // namespace prompt_detail

// The rules message that opens a game for one seat. P2's version embeds P1's
// first offer (its forwarded Parts A and B) verbatim. The opponent's
// valuations appear only when the config discloses them.
inline std::string RenderOpeningPrompt(const GameConfig& config, Seat seat,
                                       const std::optional<std::string>& first_offer) {
  using namespace prompt_detail;
  if (seat == Seat::kP2 && !first_offer)
    throw ContractViolation("P2's opening prompt needs P1's first offer");
  const IssueSpace& space = config.space;
  const Seat other = Opponent(seat);
  const int n = config.max_rounds;
  std::ostringstream os;

  os << "You are playing a negotiation game as Player " << SeatNumber(seat) << " (" << SeatName(seat)
     << ") against another player (" << SeatName(other) << ").\n";
  if (space.is_single()) {
    os << "You and your opponent must agree on how to divide $" << space.total_money()
       << ". Only whole-dollar amounts can be offered. Your payoff is the money you end up with.\n";
  } else {
    os << "You and your opponent must agree on how to divide " << ListItems(space)
       << ". Only whole items can be offered. You value " << Valuation(space, config.profiles[SeatIndex(seat)])
       << ". Your payoff is the total value of the items you end up with.\n";
    if (config.disclose_opponent_values)
      os << "Your opponent values " << Valuation(space, config.profiles[SeatIndex(other)]) << ".\n";
  }
  os << "The game lasts at most " << n << " rounds. In each round one player makes an offer and the other "
     << "responds. P1 makes the offers in rounds " << RoundsOf(Seat::kP1, n);
  if (n > 1) os << " and P2 makes the offers in rounds " << RoundsOf(Seat::kP2, n);
  os << ". The offer in round " << n << " is the final offer.\n";
  os << "If no agreement is reached by the end of round " << n
     << ", the game ends in default and both players receive nothing ("
     << (space.is_single() ? std::string("$0") : "0 " + [&] {
          std::string s;
          for (std::size_t i = 0; i < space.num_items(); ++i)
            s += (i ? (i + 1 == space.num_items() ? ", and 0 " : ", 0 ") : "") + space.item_names()[i];
          return s;
        }())
     << ").\n\n";

  os << "Respond in three parts.\n";
  os << "Part A: Respond to your opponent's most recent offer.";
  if (!space.is_single()) os << " First calculate what that offer is worth to you.";
  os << " To accept it you must state \"" << kAcceptPhrase
     << ".\" Any response without this exact phrase is treated as a rejection.\n";
  os << "Part B: If you reject, make a counteroffer. First state the current round, then state your offer "
        "with the outcome for each player in the form "
     << OfferForm(space) << " Then try to persuade your opponent to accept.\n";
  os << "Part C: Explain your strategy. Part C is never shown to your opponent.\n";
  os << "Parts A and B of every message are sent to your opponent. Begin each part with its label "
        "(\"Part A:\", \"Part B:\", \"Part C:\").\n\n";

  if (seat == Seat::kP1) {
    os << "This is round 1 and there is no previous offer, so in Part A just say that you are opening. "
          "Make your initial offer in Part B.";
  } else {
    os << "Your opponent (P1) made this offer in round 1:\n" << *first_offer
       << "\n\nRespond to it. If you reject it, your counteroffer is for round 2.";
  }
  return os.str();
}

inline std::string RenderFormatReminder(const GameConfig& config, int round, const std::string& problem) {
  return "Your last message did not contain an offer that could be read (" + problem +
         "). Reply again in the three-part format. In Part B, state that this is round " +
         std::to_string(round) + " and give your offer in the form " +
         prompt_detail::OfferForm(config.space);
}

// Asks a seat to report the single-issue split it ended with.
inline std::string RenderSingleConfirmationPrompt(const GameConfig& config, Seat proposer,
                                                  const std::string& accepted_offer_text, int round) {
  return "The game is over: the offer " + SeatName(proposer) + " made in round " + std::to_string(round) +
         " was accepted. The accepted offer was:\n" + accepted_offer_text +
         "\n\nState how much of the $" + std::to_string(config.space.total_money()) +
         " you kept and how much your opponent kept according to this final offer, using exactly the "
         "form: I kept $<amount>, my opponent kept $<amount>.";
}

// Asks the proposer of the accepted multi-issue offer to restate it.
inline std::string RenderMultiConfirmationPrompt(const GameConfig& config, const std::string& accepted_offer_text,
                                                 int round) {
  const auto& names = config.space.item_names();
  std::string form;
  for (const char* who : {"P1", "P2"}) {
    form += std::string(form.empty() ? "" : "; ") + who + ": ";
    for (std::size_t i = 0; i < names.size(); ++i)
      form += (i ? ", " : "") + ("<" + names[i] + "> " + names[i]);
  }
  std::string order;
  for (std::size_t i = 0; i < names.size(); ++i) order += (i ? ", " : "") + names[i];
  return "The game is over: your offer in round " + std::to_string(round) +
         " was accepted. The accepted offer was:\n" + accepted_offer_text +
         "\n\nRestate the final division for both players in exactly this form, with counts in the order " +
         order + ", and no other numbers:\n" + form;
}

}  // namespace bargain

#endif  // BARGAIN_PROMPTS_HPP_
