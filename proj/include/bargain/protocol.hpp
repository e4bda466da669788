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

// The textual shape of a turn. Prompts instruct agents to answer in this shape,
// deterministic agents emit it, and the parser reads it back.

#ifndef BARGAIN_PROTOCOL_HPP_
#define BARGAIN_PROTOCOL_HPP_

#include <sstream>
#include <string>
#include <string_view>

#include "bargain/core.hpp"

namespace bargain {

inline constexpr std::string_view kAcceptPhrase = "I accept";
inline constexpr std::string_view kPartAMarker = "Part A:";
inline constexpr std::string_view kPartBMarker = "Part B:";
inline constexpr std::string_view kPartCMarker = "Part C:";

struct TurnParts {
  std::string part_a;  // response to the previous offer
  std::string part_b;  // round declaration, counteroffer, persuasion
  std::string part_c;  // private strategy; never forwarded
  bool degraded = false;  // no part markers were found

  friend bool operator==(const TurnParts&, const TurnParts&) = default;
};

inline std::string RenderTurn(const TurnParts& parts) {
  std::string out;
  out.append(kPartAMarker).append(" ").append(parts.part_a);
  if (!parts.part_b.empty()) out.append("\n").append(kPartBMarker).append(" ").append(parts.part_b);
  if (!parts.part_c.empty()) out.append("\n").append(kPartCMarker).append(" ").append(parts.part_c);
  return out;
}

// What the opponent gets to see of a turn: Parts A and B only.
inline std::string ForwardedText(const TurnParts& parts) {
  if (parts.degraded) return parts.part_a;
  std::string out;
  out.append(kPartAMarker).append(" ").append(parts.part_a);
  if (!parts.part_b.empty()) out.append("\n").append(kPartBMarker).append(" ").append(parts.part_b);
  return out;
}

inline std::string JoinItems(const IssueSpace& space, std::span<const int> share) {
  std::ostringstream os;
  for (std::size_t i = 0; i < share.size(); ++i) {
    if (i > 0) os << ", ";
    os << share[i] << ' ' << space.item_names()[i];
  }
  return os.str();
}

// "Round 3. Offer: I get $60, you get $40." from the proposer's point of view.
inline std::string RenderOffer(const IssueSpace& space, Seat proposer, const Allocation& offer,
                               int round) {
  const auto mine = ShareOf(space, offer, proposer);
  const auto yours = ShareOf(space, offer, Opponent(proposer));
  std::ostringstream os;
  os << "Round " << round << ". Offer: ";
  if (space.is_single()) {
    os << "I get $" << mine[0] << ", you get $" << yours[0] << '.';
  } else {
    os << "I get " << JoinItems(space, mine) << "; you get " << JoinItems(space, yours) << '.';
  }
  return os.str();
}

inline std::string RenderSingleConfirmation(int kept, int opponent_kept) {
  return "I kept $" + std::to_string(kept) + ", my opponent kept $" +
         std::to_string(opponent_kept) + ".";
}

inline std::string RenderMultiConfirmation(const IssueSpace& space, const Allocation& a) {
  return "P1: " + JoinItems(space, ShareOf(space, a, Seat::kP1)) +
         "; P2: " + JoinItems(space, ShareOf(space, a, Seat::kP2));
}

}  // namespace bargain

#endif  // BARGAIN_PROTOCOL_HPP_
