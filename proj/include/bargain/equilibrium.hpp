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

#ifndef BARGAIN_EQUILIBRIUM_HPP_
#define BARGAIN_EQUILIBRIUM_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bargain/core.hpp"

namespace bargain {

class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint64_t kMaxEnumeratedAllocations = 1'000'000;
inline constexpr int kMaxHorizon = 6;

inline void CheckEnumerable(const IssueSpace& space) {
  if (space.allocation_count() > kMaxEnumeratedAllocations)
    throw CapacityError("issue space has " + std::to_string(space.allocation_count()) +
                        " allocations; exhaustive enumeration is capped at " +
                        std::to_string(kMaxEnumeratedAllocations));
}

inline void CheckProfiles(const IssueSpace& space, const ProfilePair& profiles) {
  for (const auto& p : profiles) {
    if (p.size() != space.num_items())
      throw ContractViolation("profile length does not match issue space");
    for (int v : p.unit_values)
      if (v < 0) throw ContractViolation("unit values must be non-negative");
  }
}

struct EquilibriumOutcome {
  std::optional<Allocation> allocation;  // absent when perfect play defaults
  std::array<int, 2> payoffs{0, 0};
  int agreement_round = 0;  // 0 when perfect play defaults
};

// What perfect play does in one round of the alternating-offers game.
struct RoundPlan {
  int round = 0;
  Seat proposer = Seat::kP1;
  // Payoffs both seats receive if this round's offer is rejected.
  std::array<int, 2> continuation{0, 0};
  // True when the proposer's best acceptable offer beats waiting.
  bool agreement_here = false;
  // The offer the proposer makes. When agreement_here is false it is a demand
  // the responder rejects.
  Allocation offer;
  // Subgame value from the start of this round.
  std::array<int, 2> value{0, 0};
  int agreement_round = 0;
  std::optional<Allocation> agreed;
};

// Backward induction over the finite-horizon alternating-offers game.
//
// Responders accept only offers strictly better than their continuation value
// (rejecting the final offer yields the default payoff 0). Proposers agree
// early only when that is strictly better than waiting. Among equally good
// acceptable offers the proposer prefers the one that leaves the responder
// more, then the first in enumeration order.
class BargainingSolution {
 public:
  BargainingSolution(IssueSpace space, ProfilePair profiles, int horizon)
      : space_(std::move(space)), profiles_(std::move(profiles)), horizon_(horizon) {
    if (horizon_ < 1 || horizon_ > kMaxHorizon)
      throw ContractViolation("horizon must be in 1.." + std::to_string(kMaxHorizon));
    CheckProfiles(space_, profiles_);
    CheckEnumerable(space_);
    Solve();
  }

  const IssueSpace& space() const { return space_; }
  const ProfilePair& profiles() const { return profiles_; }
  int horizon() const { return horizon_; }

  const RoundPlan& plan(int round) const {
    if (round < 1 || round > horizon_) throw ContractViolation("round outside horizon");
    return plans_[round - 1];
  }

  EquilibriumOutcome outcome() const {
    const RoundPlan& first = plans_.front();
    return {first.agreed, first.value, first.agreement_round};
  }

  // Whether `seat`, responding to the round-`round` offer, accepts `offer`.
  bool Accepts(Seat seat, int round, const Allocation& offer) const {
    const RoundPlan& p = plan(round);
    if (Opponent(p.proposer) != seat) throw ContractViolation("seat does not respond in this round");
    const int u = SeatPayoffs(space_, profiles_, offer)[SeatIndex(seat)];
    return u > p.continuation[SeatIndex(seat)];
  }

 private:
  struct Best {
    Allocation allocation;
    std::array<int, 2> payoffs;
  };

  // Best offer for `proposer` among allocations giving the responder strictly
  // more than `responder_floor`.
  std::optional<Best> BestOfferAbove(Seat proposer, int responder_floor) const {
    const int pi = SeatIndex(proposer);
    const int ri = 1 - pi;
    std::optional<Best> best;
    ForEachAllocation(space_, [&](const std::vector<int>& share) {
      const Allocation a{share};
      const auto u = SeatPayoffs(space_, profiles_, a);
      if (u[ri] <= responder_floor) return;
      if (!best || u[pi] > best->payoffs[pi] ||
          (u[pi] == best->payoffs[pi] && u[ri] > best->payoffs[ri]))
        best = Best{a, u};
    });
    return best;
  }

  Allocation FullClaim(Seat proposer) const {
    std::vector<int> all(space_.quantities().begin(), space_.quantities().end());
    return AllocationFromShare(space_, proposer, std::move(all));
  }

  void Solve() {
    plans_.resize(horizon_);
    for (int r = horizon_; r >= 1; --r) {
      RoundPlan& p = plans_[r - 1];
      p.round = r;
      p.proposer = ProposerOf(r);
      if (r < horizon_) {
        const RoundPlan& next = plans_[r];
        p.continuation = next.value;
        p.agreement_round = next.agreement_round;
        p.agreed = next.agreed;
      }
      p.value = p.continuation;
      const int pi = SeatIndex(p.proposer);
      const int ri = 1 - pi;

      const auto best = BestOfferAbove(p.proposer, p.continuation[ri]);
      if (best && best->payoffs[pi] > p.continuation[pi]) {
        p.agreement_here = true;
        p.offer = best->allocation;
        p.value = best->payoffs;
        p.agreement_round = r;
        p.agreed = best->allocation;
        continue;
      }
      // Waiting is at least as good: make the demand that would win a
      // last-round ultimatum, unless the responder would take it.
      const auto ultimatum = BestOfferAbove(p.proposer, 0);
      if (ultimatum && ultimatum->payoffs[ri] <= p.continuation[ri]) {
        p.offer = ultimatum->allocation;
      } else {
        p.offer = FullClaim(p.proposer);
      }
    }
  }

  IssueSpace space_;
  ProfilePair profiles_;
  int horizon_;
  std::vector<RoundPlan> plans_;
};

inline EquilibriumOutcome SubgamePerfect(const IssueSpace& space, const ProfilePair& profiles,
                                         int horizon) {
  return BargainingSolution(space, profiles, horizon).outcome();
}

// ---------------------------------------------------------------------------
// Pareto efficiency

struct FrontierPoint {
  Allocation allocation;
  std::array<int, 2> payoffs;
};

struct FrontierSet {
  std::vector<FrontierPoint> undominated;  // enumeration order
  std::vector<FrontierPoint> joint_max;    // subset maximizing u1 + u2
  int max_joint_utility = 0;
  std::uint64_t enumerated = 0;
};

// a dominates b: weakly better for both, strictly better for one.
inline bool Dominates(const std::array<int, 2>& a, const std::array<int, 2>& b) {
  return a[0] >= b[0] && a[1] >= b[1] && (a[0] > b[0] || a[1] > b[1]);
}

inline FrontierSet ParetoFrontier(const IssueSpace& space, const ProfilePair& profiles) {
  CheckProfiles(space, profiles);
  CheckEnumerable(space);

  std::vector<FrontierPoint> all;
  all.reserve(static_cast<std::size_t>(space.allocation_count()));
  ForEachAllocation(space, [&](const std::vector<int>& share) {
    Allocation a{share};
    auto u = SeatPayoffs(space, profiles, a);
    all.push_back({std::move(a), u});
  });

  // For each u1 level keep the best u2; a point is undominated iff its u2
  // equals that best and exceeds every u2 achievable at a strictly higher u1.
  std::vector<int> u1_levels;
  for (const auto& p : all) u1_levels.push_back(p.payoffs[0]);
  std::sort(u1_levels.begin(), u1_levels.end());
  u1_levels.erase(std::unique(u1_levels.begin(), u1_levels.end()), u1_levels.end());

  auto level_of = [&](int u1) {
    return std::lower_bound(u1_levels.begin(), u1_levels.end(), u1) - u1_levels.begin();
  };
  std::vector<int> best_u2(u1_levels.size(), std::numeric_limits<int>::min());
  for (const auto& p : all) {
    auto& b = best_u2[level_of(p.payoffs[0])];
    b = std::max(b, p.payoffs[1]);
  }
  // best u2 among strictly higher u1 levels
  std::vector<int> above(u1_levels.size(), std::numeric_limits<int>::min());
  for (std::size_t i = u1_levels.size(); i-- > 1;) above[i - 1] = std::max(above[i], best_u2[i]);

  FrontierSet out;
  out.enumerated = all.size();
  out.max_joint_utility = std::numeric_limits<int>::min();
  for (const auto& p : all) out.max_joint_utility = std::max(out.max_joint_utility, p.payoffs[0] + p.payoffs[1]);
  for (auto& p : all) {
    const auto lvl = level_of(p.payoffs[0]);
    const bool undominated = p.payoffs[1] == best_u2[lvl] && p.payoffs[1] > above[lvl];
    if (!undominated) continue;
    if (p.payoffs[0] + p.payoffs[1] == out.max_joint_utility) out.joint_max.push_back(p);
    out.undominated.push_back(std::move(p));
  }
  return out;
}

// Utilities are additive per item, so the joint maximum gives every unit to
// whoever values it more.
inline int MaxJointUtility(const IssueSpace& space, const ProfilePair& profiles) {
  CheckProfiles(space, profiles);
  int total = 0;
  for (std::size_t i = 0; i < space.num_items(); ++i)
    total += space.quantities()[i] *
             std::max(profiles[0].unit_values[i], profiles[1].unit_values[i]);
  return total;
}

inline double Efficiency(const IssueSpace& space, const ProfilePair& profiles, const Allocation& a) {
  const int max = MaxJointUtility(space, profiles);
  if (max <= 0) return 1.0;
  const auto u = SeatPayoffs(space, profiles, a);
  return static_cast<double>(u[0] + u[1]) / max;
}

// Euclidean distance in payoff space from an outcome to the nearest
// undominated payoff pair. Zero exactly when the outcome is undominated.
inline double FrontierDistance(const FrontierSet& frontier, const std::array<int, 2>& payoffs) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : frontier.undominated) {
    const double d0 = p.payoffs[0] - payoffs[0];
    const double d1 = p.payoffs[1] - payoffs[1];
    best = std::min(best, std::hypot(d0, d1));
  }
  return best;
}

}  // namespace bargain

#endif  // BARGAIN_EQUILIBRIUM_HPP_
