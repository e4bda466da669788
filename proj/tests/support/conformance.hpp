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


// Protocol invariants every finished game record must satisfy.

#ifndef BARGAIN_TESTS_SUPPORT_CONFORMANCE_HPP_
#define BARGAIN_TESTS_SUPPORT_CONFORMANCE_HPP_

#include <string>
#include <vector>

#include "bargain/engine.hpp"
#include "bargain/record.hpp"

namespace conformance {

inline std::vector<std::string> Violations(const bargain::GameRecord& r) {
  using namespace bargain;
  std::vector<std::string> v;
  auto fail = [&](std::string s) { v.push_back(r.game_id + ": " + std::move(s)); };
  const auto& space = r.config.space;

  if (r.events.size() > static_cast<std::size_t>(r.config.max_rounds)) fail("more offers than rounds");
  for (std::size_t i = 0; i < r.events.size(); ++i) {
    const auto& e = r.events[i];
    if (e.round != static_cast<int>(i) + 1) fail("event " + std::to_string(i) + " has round " + std::to_string(e.round));
    if (e.proposer != ProposerOf(e.round)) fail("round " + std::to_string(e.round) + " proposed by the wrong seat");
    if (i + 1 < r.events.size() && e.response != Response::kReject) fail("a non-final offer was accepted");
    if (!IsInvalid(r.outcome) || i + 1 < r.events.size()) {
      try {
        CheckWithinBounds(space, e.offer.p1_share);
        if (e.offer.p1_share.size() != space.num_items()) fail("offer has wrong arity");
      } catch (const ContractViolation&) {
        fail("offer out of bounds in round " + std::to_string(e.round));
      }
    }
  }

  const auto p1 = r.payoffs[0], p2 = r.payoffs[1];
  if (const auto* a = std::get_if<Agreement>(&r.outcome)) {
    if (a->accepted_round < 1 || a->accepted_round > static_cast<int>(r.events.size()))
      fail("agreement round outside the played rounds");
    else if (r.events[a->accepted_round - 1].response != Response::kAccept)
      fail("agreement without an accepting response");
    if (!p1.is_valid() || !p2.is_valid()) {
      fail("agreement with invalid payoffs");
    } else {
      const auto u = SeatPayoffs(space, r.config.profiles, a->allocation);
      if (u[0] != p1.amount() || u[1] != p2.amount()) fail("payoffs do not match the agreed allocation");
      if (space.is_single() && p1.amount() + p2.amount() != space.total_money()) fail("money not conserved");
      const auto s1 = ShareOf(space, a->allocation, Seat::kP1);
      const auto s2 = ShareOf(space, a->allocation, Seat::kP2);
      for (std::size_t k = 0; k < space.num_items(); ++k)
        if (s1[k] + s2[k] != space.quantities()[k] || s1[k] < 0 || s2[k] < 0) fail("shares do not complement");
    }
  } else if (IsDefault(r.outcome)) {
    if (!p1.is_valid() || !p2.is_valid() || p1.amount() != 0 || p2.amount() != 0) fail("default did not pay 0/0");
    if (static_cast<int>(r.events.size()) != r.config.max_rounds) fail("default before the final round");
    if (!r.events.empty() && r.events.back().response != Response::kReject) fail("default after an acceptance");
  } else if (IsInvalid(r.outcome)) {
    if (p1.wire_value() != -1 || p2.wire_value() != -1) fail("invalid game did not pay -1/-1");
  }

  if (OutcomeToJson(ReconstructOutcome(r)) != OutcomeToJson(r.outcome)) fail("outcome not reproducible from text");
  if (RecordToLine(RecordFromJson(nlohmann::json::parse(RecordToLine(r)))) != RecordToLine(r))
    fail("record does not survive a JSON round trip");
  return v;
}

}  // namespace conformance

#endif  // BARGAIN_TESTS_SUPPORT_CONFORMANCE_HPP_
