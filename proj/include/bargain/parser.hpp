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

// Rule-based extraction of structure from raw agent turns. Numbers are read
// from digit tokens only; spelled-out numbers are never interpreted.

#ifndef BARGAIN_PARSER_HPP_
#define BARGAIN_PARSER_HPP_

#include <algorithm>
#include <array>
#include <cctype>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bargain/core.hpp"
#include "bargain/protocol.hpp"

namespace bargain {

enum class Response { kAccept, kReject };

inline std::string_view ResponseName(Response r) { return r == Response::kAccept ? "accept" : "reject"; }

class MalformedOffer : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfirmationMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ParseOptions {
  bool case_sensitive_accept = true;
};

namespace parser_detail {

inline std::string Lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline std::string Trim(std::string_view s) {
  const auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return std::string(s);
}

struct Token {
  enum class Kind { kWord, kNumber, kPunct };
  Kind kind;
  std::string text;  // lowercased for words
  long long value = 0;
  bool decimal = false;  // number had a fractional part
};

inline bool IsAlpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
inline bool IsDigit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }
inline bool IsAlnum(char c) { return IsAlpha(c) || IsDigit(c); }

// Words absorb trailing digits ("P1" is one word), so labels never read as numbers.
inline std::vector<Token> Tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (IsAlpha(c)) {
      std::size_t j = i;
      while (j < text.size() && IsAlnum(text[j])) ++j;
      out.push_back({Token::Kind::kWord, Lower(text.substr(i, j - i))});
      i = j;
    } else if (IsDigit(c)) {
      std::size_t j = i;
      long long v = 0;
      while (j < text.size() && IsDigit(text[j])) {
        if (v < 1'000'000'000LL) v = v * 10 + (text[j] - '0');
        ++j;
      }
      Token t{Token::Kind::kNumber, std::string(text.substr(i, j - i)), v};
      if (j + 1 < text.size() && text[j] == '.' && IsDigit(text[j + 1])) {
        t.decimal = true;
        ++j;
        while (j < text.size() && IsDigit(text[j])) ++j;
      }
      out.push_back(std::move(t));
      i = j;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else {
      out.push_back({Token::Kind::kPunct, std::string(1, c)});
      ++i;
    }
  }
  return out;
}

inline bool IsWord(const std::vector<Token>& toks, std::size_t i, std::string_view w) {
  return i < toks.size() && toks[i].kind == Token::Kind::kWord && toks[i].text == w;
}

inline bool IsSelfWord(std::string_view w) {
  static constexpr std::array<std::string_view, 9> kSelf = {"i", "me", "my", "mine", "myself",
                                                            "we", "us", "our", "ours"};
  return std::find(kSelf.begin(), kSelf.end(), w) != kSelf.end();
}

inline bool IsOtherWord(std::string_view w) {
  static constexpr std::array<std::string_view, 8> kOther = {
      "you", "your", "yours", "yourself", "opponent", "they", "them", "their"};
  return std::find(kOther.begin(), kOther.end(), w) != kOther.end();
}

// Item words match on the singular stem, so "crepe" and "crepes" both count.
inline std::optional<std::size_t> MatchItem(const IssueSpace& space, std::string_view word) {
  for (std::size_t i = 0; i < space.item_names().size(); ++i) {
    std::string stem = Lower(space.item_names()[i]);
    if (stem.size() > 1 && stem.back() == 's') stem.pop_back();
    if (word == stem || word == stem + "s" || word == stem + "es") return i;
  }
  return std::nullopt;
}

inline std::vector<const Token*> Numbers(const std::vector<Token>& toks) {
  std::vector<const Token*> out;
  for (const auto& t : toks)
    if (t.kind == Token::Kind::kNumber) out.push_back(&t);
  return out;
}

}  // namespace parser_detail

// Accept iff the literal acceptance phrase occurs. "I cannot accept" does not
// contain it and reads as a rejection.
inline Response DetectAcceptance(std::string_view text, const ParseOptions& opts = {}) {
  if (opts.case_sensitive_accept)
    return text.find(kAcceptPhrase) != std::string_view::npos ? Response::kAccept : Response::kReject;
  const std::string hay = parser_detail::Lower(text);
  const std::string needle = parser_detail::Lower(kAcceptPhrase);
  return hay.find(needle) != std::string::npos ? Response::kAccept : Response::kReject;
}

// Splits a turn on its "Part A:/Part B:/Part C:" markers (case-insensitive,
// tolerant of markdown emphasis around the marker). Without any marker the
// whole text becomes part A and the turn is marked degraded.
inline TurnParts SplitParts(std::string_view text) {
  using parser_detail::Trim;
  const std::string lower = parser_detail::Lower(text);
  struct Mark {
    std::size_t begin;  // where the marker starts
    std::size_t body;   // where the section text starts
    int part;
  };
  std::vector<Mark> marks;
  for (int part = 0; part < 3; ++part) {
    const std::string word = std::string("part ") + static_cast<char>('a' + part);
    std::size_t pos = 0;
    while ((pos = lower.find(word, pos)) != std::string::npos) {
      const bool boundary_before = pos == 0 || !parser_detail::IsAlnum(lower[pos - 1]);
      std::size_t end = pos + word.size();
      const bool boundary_after = end >= lower.size() || !parser_detail::IsAlnum(lower[end]);
      // The marker must be followed (after optional emphasis) by ':' to count.
      std::size_t k = end;
      while (k < lower.size() && (lower[k] == '*' || lower[k] == '_' || lower[k] == ')')) ++k;
      if (boundary_before && boundary_after && k < lower.size() && lower[k] == ':') {
        ++k;
        while (k < lower.size() && (lower[k] == '*' || lower[k] == '_')) ++k;
        std::size_t begin = pos;
        while (begin > 0 && (lower[begin - 1] == '*' || lower[begin - 1] == '_' ||
                             lower[begin - 1] == '#' || lower[begin - 1] == '(')) --begin;
        marks.push_back({begin, k, part});
        break;
      }
      pos = end;
    }
  }
  TurnParts out;
  if (marks.empty()) {
    out.part_a = Trim(text);
    out.degraded = true;
    return out;
  }
  std::sort(marks.begin(), marks.end(), [](const Mark& a, const Mark& b) { return a.begin < b.begin; });
  for (std::size_t i = 0; i < marks.size(); ++i) {
    const std::size_t stop = i + 1 < marks.size() ? marks[i + 1].begin : text.size();
    const std::string section = Trim(text.substr(marks[i].body, stop - marks[i].body));
    switch (marks[i].part) {
      case 0: out.part_a = section; break;
      case 1: out.part_b = section; break;
      default: out.part_c = section; break;
    }
  }
  return out;
}

struct ExtractedOffer {
  Allocation allocation;  // P1 perspective
  std::optional<int> round_declared;
};

// Reads a proposal out of free text. Amounts are attributed to whoever the
// nearest preceding owner word refers to: I/me/my for the proposer, you/your
// for the opponent, P1/P2 or "Player 1/2" for an absolute seat.
inline ExtractedOffer ExtractOffer(std::string_view text, const IssueSpace& space, Seat proposer) {
  using namespace parser_detail;
  const auto toks = Tokenize(text);
  const std::size_t n_items = space.num_items();

  ExtractedOffer out;
  enum class Owner { kUnknown, kProposer, kOpponent };
  Owner owner = Owner::kUnknown;
  const auto absolute = [&](Seat s) { return s == proposer ? Owner::kProposer : Owner::kOpponent; };

  // [owner][item] -> first stated count
  std::array<std::vector<std::optional<long long>>, 2> stated = {
      std::vector<std::optional<long long>>(n_items), std::vector<std::optional<long long>>(n_items)};
  std::vector<long long> unowned;
  bool non_integer = false;

  for (std::size_t i = 0; i < toks.size(); ++i) {
    const Token& t = toks[i];
    if (t.kind == Token::Kind::kWord) {
      if (t.text == "round" && i + 1 < toks.size() && toks[i + 1].kind == Token::Kind::kNumber) {
        if (!out.round_declared) out.round_declared = static_cast<int>(toks[i + 1].value);
        ++i;
      } else if (t.text == "player" && i + 1 < toks.size() &&
                 toks[i + 1].kind == Token::Kind::kNumber &&
                 (toks[i + 1].value == 1 || toks[i + 1].value == 2)) {
        owner = absolute(toks[i + 1].value == 1 ? Seat::kP1 : Seat::kP2);
        ++i;
      } else if (t.text == "p1") {
        owner = absolute(Seat::kP1);
      } else if (t.text == "p2") {
        owner = absolute(Seat::kP2);
      } else if (IsSelfWord(t.text)) {
        owner = Owner::kProposer;
      } else if (IsOtherWord(t.text)) {
        owner = Owner::kOpponent;
      }
      continue;
    }
    if (t.kind != Token::Kind::kNumber) continue;
    // "6 rounds", "60%" are not amounts.
    if (IsWord(toks, i + 1, "round") || IsWord(toks, i + 1, "rounds")) continue;
    if (i + 1 < toks.size() && toks[i + 1].kind == Token::Kind::kPunct && toks[i + 1].text == "%") continue;

    std::optional<std::size_t> item;
    if (space.is_single()) {
      item = 0;
    } else if (i + 1 < toks.size() && toks[i + 1].kind == Token::Kind::kWord) {
      item = MatchItem(space, toks[i + 1].text);
    }
    if (!item) continue;
    if (owner == Owner::kUnknown) {
      if (space.is_single()) unowned.push_back(t.value);
      if (t.decimal) non_integer = true;
      continue;
    }
    if (t.decimal) non_integer = true;
    auto& slot = stated[owner == Owner::kProposer ? 0 : 1][*item];
    if (!slot) slot = t.value;
  }

  if (non_integer) throw MalformedOffer("offer contains a non-integer amount");

  // A bare "60 / 40" with no owner words reads as proposer first.
  if (space.is_single() && !stated[0][0] && !stated[1][0]) {
    if (unowned.size() != 2) throw MalformedOffer("no parseable division of the money");
    stated[0][0] = unowned[0];
    stated[1][0] = unowned[1];
  }

  std::vector<int> proposer_share(n_items);
  for (std::size_t k = 0; k < n_items; ++k) {
    const long long q = space.quantities()[k];
    const auto& mine = stated[0][k];
    const auto& theirs = stated[1][k];
    if (!mine && !theirs)
      throw MalformedOffer("offer does not state a division of " + space.item_names()[k]);
    if ((mine && *mine > q) || (theirs && *theirs > q))
      throw MalformedOffer("offer gives more " + space.item_names()[k] + " than exist");
    if (mine && theirs && *mine + *theirs != q)
      throw MalformedOffer(space.is_single()
                               ? "amounts do not sum to " + std::to_string(q)
                               : "shares of " + space.item_names()[k] + " do not complement");
    proposer_share[k] = static_cast<int>(mine ? *mine : q - *theirs);
  }
  out.allocation = AllocationFromShare(space, proposer, std::move(proposer_share));
  return out;
}

struct ParsedTurn {
  Response response = Response::kReject;
  std::optional<int> round_declared;
  std::optional<Allocation> offer;
  std::string offer_error;  // why no offer could be read from a rejecting turn
  std::string persuasion_text;
  std::string strategy_text;
  TurnParts parts;
};

// Parses one agent turn. `responds` is false for the opening turn, which has
// no offer to answer. An accepting turn never carries an offer.
inline ParsedTurn ParseTurn(std::string_view text, const IssueSpace& space, Seat speaker,
                            bool responds, const ParseOptions& opts = {}) {
  ParsedTurn out;
  out.parts = SplitParts(text);
  out.persuasion_text = out.parts.part_b;
  out.strategy_text = out.parts.part_c;
  const std::string_view response_text = out.parts.degraded ? std::string_view(text)
                                                            : std::string_view(out.parts.part_a);
  if (responds) out.response = DetectAcceptance(response_text, opts);
  if (out.response == Response::kAccept) return out;

  const std::string_view offer_text = out.parts.degraded || out.parts.part_b.empty()
                                          ? std::string_view(text)
                                          : std::string_view(out.parts.part_b);
  try {
    auto offer = ExtractOffer(offer_text, space, speaker);
    out.offer = std::move(offer.allocation);
    out.round_declared = offer.round_declared;
  } catch (const MalformedOffer& e) {
    out.offer_error = e.what();
  }
  return out;
}

// Both seats report "kept / opponent kept" for a single-issue agreement. The
// first two integers in each report are read; the reports must agree under a
// perspective swap and sum to the total. Returns (P1 amount, P2 amount).
inline std::pair<int, int> ParseConfirmationSingle(std::string_view text_p1, std::string_view text_p2,
                                                   int total = 100) {
  using namespace parser_detail;
  const auto read = [](std::string_view text, std::string_view who) {
    const auto toks = Tokenize(text);
    const auto nums = Numbers(toks);
    if (nums.size() < 2)
      throw ConfirmationMismatch(std::string(who) + " confirmation has no kept/opponent pair");
    if (nums[0]->decimal || nums[1]->decimal)
      throw ConfirmationMismatch(std::string(who) + " confirmation is not integral");
    return std::pair<long long, long long>{nums[0]->value, nums[1]->value};
  };
  const auto [p1_kept, p1_other] = read(text_p1, "P1");
  const auto [p2_kept, p2_other] = read(text_p2, "P2");
  if (p1_kept != p2_other || p1_other != p2_kept)
    throw ConfirmationMismatch("reports disagree: P1 says " + std::to_string(p1_kept) + "/" +
                               std::to_string(p1_other) + ", P2 says " + std::to_string(p2_kept) +
                               "/" + std::to_string(p2_other));
  if (p1_kept + p1_other != total)
    throw ConfirmationMismatch("reported split does not sum to " + std::to_string(total));
  return {static_cast<int>(p1_kept), static_cast<int>(p1_other)};
}

enum class ConfirmationFlag { kTooManyNumbers, kTooFewNumbers, kSharesDoNotComplement, kOrderSuspect };

inline std::string_view FlagName(ConfirmationFlag f) {
  switch (f) {
    case ConfirmationFlag::kTooManyNumbers: return "too many numbers";
    case ConfirmationFlag::kTooFewNumbers: return "too few numbers";
    case ConfirmationFlag::kSharesDoNotComplement: return "shares do not complement";
    case ConfirmationFlag::kOrderSuspect: return "item order suspect";
  }
  return "?";
}

struct MultiConfirmation {
  Allocation allocation;  // provisional when flags is non-empty
  std::vector<ConfirmationFlag> flags;
};

// Reads the proposer's structured restatement "P1: a, b, c; P2: a, b, c".
// Exactly six integers are expected; counts followed by an item name are
// placed by name, others by position. Never corrects silently: anything odd
// becomes a flag and the P1 triple as stated is kept as the provisional parse.
inline MultiConfirmation FlagConfirmationMulti(std::string_view text, const IssueSpace& space) {
  using namespace parser_detail;
  const auto toks = Tokenize(text);
  const std::size_t n = space.num_items();
  const auto q = space.quantities();

  // Which label comes first decides which triple belongs to P1.
  std::optional<std::size_t> p1_at, p2_at;
  std::vector<std::size_t> number_at;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (toks[i].kind == Token::Kind::kWord) {
      if (toks[i].text == "p1" && !p1_at) p1_at = i;
      if (toks[i].text == "p2" && !p2_at) p2_at = i;
    } else if (toks[i].kind == Token::Kind::kNumber) {
      number_at.push_back(i);
    }
  }
  const bool swapped = p1_at && p2_at && *p2_at < *p1_at;

  MultiConfirmation out;
  out.allocation.p1_share.assign(n, 0);
  if (number_at.size() > 2 * n) out.flags.push_back(ConfirmationFlag::kTooManyNumbers);
  if (number_at.size() < 2 * n) {
    out.flags.push_back(ConfirmationFlag::kTooFewNumbers);
    for (std::size_t k = 0; k < std::min(n, number_at.size()); ++k)
      out.allocation.p1_share[k] = std::clamp(static_cast<int>(toks[number_at[k]].value), 0, q[k]);
    return out;
  }

  std::array<std::vector<int>, 2> triple = {std::vector<int>(n, -1), std::vector<int>(n, -1)};
  for (std::size_t g = 0; g < 2; ++g) {
    std::vector<bool> used(n, false);
    std::vector<std::size_t> unplaced;
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t ti = number_at[g * n + k];
      const auto item = ti + 1 < toks.size() && toks[ti + 1].kind == Token::Kind::kWord
                            ? MatchItem(space, toks[ti + 1].text)
                            : std::nullopt;
      if (item && !used[*item]) {
        used[*item] = true;
        triple[g][*item] = static_cast<int>(toks[ti].value);
      } else {
        unplaced.push_back(ti);
      }
    }
    std::size_t next = 0;
    for (std::size_t k = 0; k < n; ++k)
      if (!used[k]) triple[g][k] = static_cast<int>(toks[unplaced[next++]].value);
  }
  if (swapped) std::swap(triple[0], triple[1]);

  for (std::size_t k = 0; k < n; ++k) out.allocation.p1_share[k] = std::clamp(triple[0][k], 0, q[k]);

  const auto complements = [&](const std::vector<int>& a, const std::vector<int>& b) {
    for (std::size_t k = 0; k < n; ++k)
      if (a[k] + b[k] != q[k]) return false;
    return true;
  };
  if (!complements(triple[0], triple[1])) {
    auto perm = triple[1];
    std::sort(perm.begin(), perm.end());
    bool reorder_fixes = false;
    do {
      if (complements(triple[0], perm)) reorder_fixes = true;
    } while (!reorder_fixes && std::next_permutation(perm.begin(), perm.end()));
    out.flags.push_back(reorder_fixes ? ConfirmationFlag::kOrderSuspect
                                      : ConfirmationFlag::kSharesDoNotComplement);
  }
  return out;
}

}  // namespace bargain

#endif  // BARGAIN_PARSER_HPP_
