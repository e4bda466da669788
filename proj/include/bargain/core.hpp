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

#ifndef BARGAIN_CORE_HPP_
#define BARGAIN_CORE_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace bargain {

// Raised when a caller breaks a documented precondition (length mismatch,
// out-of-bounds share, filtering an Invalid payoff that should have been
// dropped, ...).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Seat { kP1 = 0, kP2 = 1 };

inline constexpr std::array<Seat, 2> kSeats = {Seat::kP1, Seat::kP2};

constexpr Seat Opponent(Seat s) { return s == Seat::kP1 ? Seat::kP2 : Seat::kP1; }
constexpr int SeatIndex(Seat s) { return static_cast<int>(s); }
constexpr int SeatNumber(Seat s) { return SeatIndex(s) + 1; }

// P1 proposes in odd rounds, P2 in even rounds.
constexpr Seat ProposerOf(int round) { return round % 2 == 1 ? Seat::kP1 : Seat::kP2; }

inline std::string SeatName(Seat s) { return s == Seat::kP1 ? "P1" : "P2"; }

// What is being divided. A single-issue space is modelled as one item ("dollars")
// so payoff arithmetic is uniform across game types.
class IssueSpace {
 public:
  enum class Kind { kSingle, kMulti };

  static IssueSpace Single(int total_money = 100) {
    if (total_money <= 0) throw ContractViolation("single-issue total must be positive");
    return IssueSpace(Kind::kSingle, {"dollars"}, {total_money});
  }

  static IssueSpace Multi(std::vector<std::string> item_names = {"apples", "bananas", "crepes"},
                          std::vector<int> quantities = {10, 10, 10}) {
    if (item_names.size() != quantities.size() || quantities.empty())
      throw ContractViolation("multi-issue space needs one name per quantity");
    for (int q : quantities)
      if (q <= 0) throw ContractViolation("multi-issue quantities must be positive");
    return IssueSpace(Kind::kMulti, std::move(item_names), std::move(quantities));
  }

  Kind kind() const { return kind_; }
  bool is_single() const { return kind_ == Kind::kSingle; }
  int total_money() const { return quantities_.front(); }
  std::span<const int> quantities() const { return quantities_; }
  const std::vector<std::string>& item_names() const { return item_names_; }
  std::size_t num_items() const { return quantities_.size(); }

  // Number of distinct integer allocations; saturates instead of overflowing.
  std::uint64_t allocation_count() const {
    std::uint64_t n = 1;
    for (int q : quantities_) {
      const auto f = static_cast<std::uint64_t>(q) + 1;
      if (n > UINT64_MAX / f) return UINT64_MAX;
      n *= f;
    }
    return n;
  }

  friend bool operator==(const IssueSpace&, const IssueSpace&) = default;

 private:
  IssueSpace(Kind kind, std::vector<std::string> names, std::vector<int> quantities)
      : kind_(kind), item_names_(std::move(names)), quantities_(std::move(quantities)) {}

  Kind kind_;
  std::vector<std::string> item_names_;
  std::vector<int> quantities_;
};

// Per-item dollar valuations for one seat.
struct PreferenceProfile {
  std::vector<int> unit_values;

  static PreferenceProfile Single() { return {{1}}; }
  static PreferenceProfile CanonicalP1() { return {{1, 2, 3}}; }
  static PreferenceProfile CanonicalP2() { return {{3, 2, 1}}; }

  std::size_t size() const { return unit_values.size(); }
  friend bool operator==(const PreferenceProfile&, const PreferenceProfile&) = default;
};

using ProfilePair = std::array<PreferenceProfile, 2>;

inline ProfilePair CanonicalProfiles(const IssueSpace& space) {
  if (space.is_single()) return {PreferenceProfile::Single(), PreferenceProfile::Single()};
  return {PreferenceProfile::CanonicalP1(), PreferenceProfile::CanonicalP2()};
}

// A division, always stored from P1's perspective. P2 holds the complement.
struct Allocation {
  std::vector<int> p1_share;

  friend bool operator==(const Allocation&, const Allocation&) = default;
  friend auto operator<=>(const Allocation&, const Allocation&) = default;
};

inline void CheckWithinBounds(const IssueSpace& space, std::span<const int> share) {
  if (share.size() != space.num_items())
    throw ContractViolation("share length " + std::to_string(share.size()) +
                            " does not match issue space of " +
                            std::to_string(space.num_items()) + " items");
  for (std::size_t i = 0; i < share.size(); ++i)
    if (share[i] < 0 || share[i] > space.quantities()[i])
      throw ContractViolation("share component " + std::to_string(i) + " = " +
                              std::to_string(share[i]) + " outside [0, " +
                              std::to_string(space.quantities()[i]) + "]");
}

inline int ComputePayoff(const PreferenceProfile& profile, std::span<const int> share) {
  if (share.size() != profile.size())
    throw ContractViolation("share length " + std::to_string(share.size()) +
                            " does not match profile length " + std::to_string(profile.size()));
  int total = 0;
  for (std::size_t i = 0; i < share.size(); ++i) total += share[i] * profile.unit_values[i];
  return total;
}

inline std::vector<int> Complement(const IssueSpace& space, std::span<const int> share) {
  CheckWithinBounds(space, share);
  std::vector<int> out(share.size());
  for (std::size_t i = 0; i < share.size(); ++i) out[i] = space.quantities()[i] - share[i];
  return out;
}

inline std::vector<int> ShareOf(const IssueSpace& space, const Allocation& a, Seat seat) {
  if (seat == Seat::kP1) {
    CheckWithinBounds(space, a.p1_share);
    return a.p1_share;
  }
  return Complement(space, a.p1_share);
}

// Converts a share held by `holder` into a P1-perspective allocation.
inline Allocation AllocationFromShare(const IssueSpace& space, Seat holder, std::vector<int> share) {
  if (holder == Seat::kP2) return {Complement(space, share)};
  CheckWithinBounds(space, share);
  return {std::move(share)};
}

inline std::array<int, 2> SeatPayoffs(const IssueSpace& space, const ProfilePair& profiles,
                                      const Allocation& a) {
  return {ComputePayoff(profiles[0], ShareOf(space, a, Seat::kP1)),
          ComputePayoff(profiles[1], ShareOf(space, a, Seat::kP2))};
}

// Largest payoff a seat could get: the whole issue space.
inline int MaxIndividualPayoff(const IssueSpace& space, const PreferenceProfile& profile) {
  return ComputePayoff(profile, space.quantities());
}

// Dollar payoff, or the -1 sentinel for games voided by a confirmation mismatch.
class Payoff {
 public:
  static constexpr int kInvalidSentinel = -1;

  static Payoff Dollars(int amount) {
    if (amount < 0) throw ContractViolation("dollar payoff must be non-negative");
    return Payoff(amount);
  }
  static Payoff Invalid() { return Payoff(kInvalidSentinel); }
  static Payoff FromWire(int v) { return v < 0 ? Invalid() : Dollars(v); }

  bool is_valid() const { return value_ >= 0; }
  int amount() const {
    if (!is_valid()) throw ContractViolation("amount() on an Invalid payoff");
    return value_;
  }
  int wire_value() const { return value_; }

  friend bool operator==(const Payoff&, const Payoff&) = default;

 private:
  explicit Payoff(int v) : value_(v) {}
  int value_;
};

inline double NormalizedPayoff(const Payoff& p, const IssueSpace& space,
                               const PreferenceProfile& profile) {
  if (!p.is_valid()) throw ContractViolation("cannot normalize an Invalid payoff; filter it first");
  const int max = MaxIndividualPayoff(space, profile);
  if (max <= 0) throw ContractViolation("profile values nothing in this issue space");
  return static_cast<double>(p.amount()) / max;
}

// Enumerates every integer allocation in mixed-radix order (first item varies slowest).
template <typename Fn>
void ForEachAllocation(const IssueSpace& space, Fn&& fn) {
  const auto q = space.quantities();
  std::vector<int> share(q.size(), 0);
  while (true) {
    fn(std::as_const(share));
    std::size_t i = q.size();
    while (i > 0) {
      --i;
      if (share[i] < q[i]) {
        ++share[i];
        break;
      }
      share[i] = 0;
      if (i == 0) return;
    }
  }
}

// ---------------------------------------------------------------------------
// Personalities

enum class Trait { kOpenness, kConscientiousness, kExtraversion, kAgreeableness, kNeuroticism };
enum class Level { kHigh, kLow };

inline constexpr std::array<Trait, 5> kTraits = {Trait::kOpenness, Trait::kConscientiousness,
                                                 Trait::kExtraversion, Trait::kAgreeableness,
                                                 Trait::kNeuroticism};

struct Personality {
  Trait trait;
  Level level;

  friend bool operator==(const Personality&, const Personality&) = default;
  friend auto operator<=>(const Personality&, const Personality&) = default;
};

inline std::string_view TraitName(Trait t) {
  switch (t) {
    case Trait::kOpenness: return "Openness";
    case Trait::kConscientiousness: return "Conscientiousness";
    case Trait::kExtraversion: return "Extraversion";
    case Trait::kAgreeableness: return "Agreeableness";
    case Trait::kNeuroticism: return "Neuroticism";
  }
  return "?";
}

// "HighOpenness", "LowAgreeableness", ...
inline std::string PersonalityName(const Personality& p) {
  return std::string(p.level == Level::kHigh ? "High" : "Low") + std::string(TraitName(p.trait));
}

inline std::optional<Personality> ParsePersonality(std::string_view name) {
  Level level;
  if (name.starts_with("High")) {
    level = Level::kHigh;
    name.remove_prefix(4);
  } else if (name.starts_with("Low")) {
    level = Level::kLow;
    name.remove_prefix(3);
  } else {
    return std::nullopt;
  }
  for (Trait t : kTraits)
    if (TraitName(t) == name) return Personality{t, level};
  return std::nullopt;
}

// All ten personalities: the five high levels, then the five low levels.
inline std::vector<Personality> AllPersonalities() {
  std::vector<Personality> out;
  for (Level l : {Level::kHigh, Level::kLow})
    for (Trait t : kTraits) out.push_back({t, l});
  return out;
}

}  // namespace bargain

#endif  // BARGAIN_CORE_HPP_
