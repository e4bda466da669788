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

// Outcome metrics over a set of game records.
//
// Conventions:
//   * Invalid and unresolved Flagged records are excluded and counted.
//   * Per-personality statistics are per appearance; a self-play game counts
//     once for each seat.
//   * Normalized payoff is the raw payoff over the seat's best possible
//     payoff. Defaults count as 0.
//   * head_to_head[i][j] is the mean raw P1 payoff when label i sits as P1
//     against label j. Agreements only unless include_defaults is set.
//   * P1 advantage is mean normalized payoff as P1 minus as P2, defaults
//     included.
//   * A game reaches the final round when the last-round offer was made; the
//     decline rate is the share of those offers rejected.

#ifndef BARGAIN_METRICS_HPP_
#define BARGAIN_METRICS_HPP_

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bargain/core.hpp"
#include "bargain/csv.hpp"
#include "bargain/equilibrium.hpp"
#include "bargain/record.hpp"
#include "json.hpp"

namespace bargain {

class EmptyReportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MetricsOptions {
  bool head_to_head_includes_defaults = false;
};

struct PersonalityStats {
  std::string label;
  int appearances = 0;
  int agreements = 0;
  int defaults = 0;
  double mean_normalized = 0;                    // defaults as 0
  std::optional<double> mean_normalized_agreed;  // absent without agreements
  double default_rate = 0;
  int games_as_p1 = 0;
  int games_as_p2 = 0;
  std::optional<double> mean_normalized_as_p1;
  std::optional<double> mean_normalized_as_p2;
  std::optional<double> p1_advantage;
};

struct MatrixCell {
  int games = 0;
  std::optional<double> mean_p1_payoff;
};

struct AgreementQuality {
  std::string game_id;
  std::string p1_label;
  std::string p2_label;
  std::array<int, 2> payoffs{};
  double efficiency = 0;
  double frontier_distance = 0;
};

struct MetricsReport {
  int games = 0;  // analyzed
  int agreements = 0;
  int defaults = 0;
  int excluded_invalid = 0;
  int excluded_flagged = 0;
  double default_rate = 0;
  std::vector<std::string> labels;
  std::vector<PersonalityStats> personalities;  // same order as labels
  std::vector<std::vector<MatrixCell>> head_to_head;
  bool head_to_head_includes_defaults = false;
  int final_round_games = 0;
  int final_round_declines = 0;
  std::optional<double> final_round_decline_rate;
  std::vector<AgreementQuality> agreement_quality;
};

// The personality name when the seat has one, otherwise the agent kind.
inline std::string SeatLabel(const AgentIdentity& id) {
  if (id.personality) return PersonalityName(*id.personality);
  return std::string(ImplName(id.impl)) + (id.detail.empty() ? "" : ":" + id.detail);
}

namespace metrics_detail {

struct Mean {
  double sum = 0;
  int n = 0;
  void Add(double v) {
    sum += v;
    ++n;
  }
  std::optional<double> value() const { return n ? std::optional<double>(sum / n) : std::nullopt; }
};

// Canonical personalities first, in their usual order, then anything else
// sorted by name.
inline std::vector<std::string> OrderLabels(const std::vector<std::string>& seen) {
  std::vector<std::string> out;
  bool any_personality = false;
  for (const auto& s : seen) any_personality |= ParsePersonality(s).has_value();
  if (any_personality)
    for (const auto& p : AllPersonalities()) out.push_back(PersonalityName(p));
  std::vector<std::string> rest;
  for (const auto& s : seen)
    if (std::find(out.begin(), out.end(), s) == out.end()) rest.push_back(s);
  std::sort(rest.begin(), rest.end());
  rest.erase(std::unique(rest.begin(), rest.end()), rest.end());
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

// Whether the offer of the final round was made.
inline bool ReachedFinalRound(const GameRecord& r) {
  return !r.events.empty() && r.events.back().round == r.config.max_rounds;
}

}  // namespace metrics_detail

inline MetricsReport AggregateMetrics(const std::vector<GameRecord>& records, const MetricsOptions& options = {}) {
  using metrics_detail::Mean;
  MetricsReport rep;
  rep.head_to_head_includes_defaults = options.head_to_head_includes_defaults;

  std::vector<const GameRecord*> used;
  std::vector<std::string> seen;
  for (const auto& r : records) {
    if (IsInvalid(r.outcome)) {
      ++rep.excluded_invalid;
      continue;
    }
    if (IsFlagged(r.outcome)) {
      ++rep.excluded_flagged;
      continue;
    }
    used.push_back(&r);
    for (const auto& s : r.seats) seen.push_back(SeatLabel(s));
  }
  if (used.empty()) throw EmptyReportError("no analyzable game records (Invalid and Flagged records are excluded)");

  rep.labels = metrics_detail::OrderLabels(seen);
  const std::size_t n = rep.labels.size();
  auto index = [&](const std::string& l) {
    return static_cast<std::size_t>(std::find(rep.labels.begin(), rep.labels.end(), l) - rep.labels.begin());
  };

  struct Acc {
    int appearances = 0, agreements = 0, defaults = 0;
    Mean all, agreed;
    std::array<Mean, 2> by_seat;
  };
  std::vector<Acc> acc(n);
  std::vector<std::vector<Mean>> cells(n, std::vector<Mean>(n));
  std::vector<std::vector<int>> cell_games(n, std::vector<int>(n, 0));
  std::map<std::string, FrontierSet> frontiers;  // keyed by space and profiles

  for (const GameRecord* r : used) {
    const bool agreed = IsAgreement(r->outcome);
    const std::array<std::size_t, 2> idx = {index(SeatLabel(r->seats[0])), index(SeatLabel(r->seats[1]))};
    ++rep.games;
    agreed ? ++rep.agreements : ++rep.defaults;

    for (Seat s : kSeats) {
      const std::size_t k = SeatIndex(s);
      Acc& a = acc[idx[k]];
      const double norm = NormalizedPayoff(r->payoffs[k], r->config.space, r->config.profiles[k]);
      ++a.appearances;
      agreed ? ++a.agreements : ++a.defaults;
      a.all.Add(norm);
      if (agreed) a.agreed.Add(norm);
      a.by_seat[k].Add(norm);
    }

    ++cell_games[idx[0]][idx[1]];
    if (agreed || options.head_to_head_includes_defaults)
      cells[idx[0]][idx[1]].Add(r->payoffs[0].amount());

    if (metrics_detail::ReachedFinalRound(*r)) {
      ++rep.final_round_games;
      if (IsDefault(r->outcome)) ++rep.final_round_declines;
    }

    if (agreed) {
      const auto& ag = std::get<Agreement>(r->outcome);
      const std::string key = nlohmann::json{r->config.space, r->config.profiles[0].unit_values, r->config.profiles[1].unit_values}.dump();
      auto it = frontiers.find(key);
      if (it == frontiers.end()) it = frontiers.emplace(key, ParetoFrontier(r->config.space, r->config.profiles)).first;
      const std::array<int, 2> u = {r->payoffs[0].amount(), r->payoffs[1].amount()};
      rep.agreement_quality.push_back({r->game_id, rep.labels[idx[0]], rep.labels[idx[1]], u,
                                       Efficiency(r->config.space, r->config.profiles, ag.allocation),
                                       FrontierDistance(it->second, u)});
    }
  }

  rep.default_rate = static_cast<double>(rep.defaults) / rep.games;
  if (rep.final_round_games > 0)
    rep.final_round_decline_rate = static_cast<double>(rep.final_round_declines) / rep.final_round_games;

  for (std::size_t i = 0; i < n; ++i) {
    const Acc& a = acc[i];
    PersonalityStats st;
    st.label = rep.labels[i];
    st.appearances = a.appearances;
    st.agreements = a.agreements;
    st.defaults = a.defaults;
    st.mean_normalized = a.all.value().value_or(0.0);
    st.mean_normalized_agreed = a.agreed.value();
    st.default_rate = a.appearances ? static_cast<double>(a.defaults) / a.appearances : 0.0;
    st.games_as_p1 = a.by_seat[0].n;
    st.games_as_p2 = a.by_seat[1].n;
    st.mean_normalized_as_p1 = a.by_seat[0].value();
    st.mean_normalized_as_p2 = a.by_seat[1].value();
    if (st.mean_normalized_as_p1 && st.mean_normalized_as_p2)
      st.p1_advantage = *st.mean_normalized_as_p1 - *st.mean_normalized_as_p2;
    rep.personalities.push_back(std::move(st));
  }
  rep.head_to_head.assign(n, std::vector<MatrixCell>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) rep.head_to_head[i][j] = {cell_games[i][j], cells[i][j].value()};
  return rep;
}

// ---------------------------------------------------------------------------
// Tables.

inline CsvTable NormalizedPayoffTable(const MetricsReport& r) {
  CsvTable t{{"personality", "appearances", "agreements", "mean_normalized_incl_defaults",
              "mean_normalized_excl_defaults"},
             {}};
  for (const auto& p : r.personalities)
    t.rows.push_back({p.label, std::to_string(p.appearances), std::to_string(p.agreements),
                      CsvNumber(p.appearances ? std::optional<double>(p.mean_normalized) : std::nullopt),
                      CsvNumber(p.mean_normalized_agreed)});
  return t;
}

inline CsvTable DefaultRateTable(const MetricsReport& r) {
  CsvTable t{{"personality", "appearances", "defaults", "default_rate"}, {}};
  t.rows.push_back({"ALL", std::to_string(r.games), std::to_string(r.defaults), CsvNumber(r.default_rate)});
  for (const auto& p : r.personalities)
    t.rows.push_back({p.label, std::to_string(p.appearances), std::to_string(p.defaults),
                      CsvNumber(p.appearances ? std::optional<double>(p.default_rate) : std::nullopt)});
  return t;
}

// Rows are P1, columns are P2; cells are mean raw P1 payoff.
inline CsvTable HeadToHeadTable(const MetricsReport& r) {
  CsvTable t;
  t.header.push_back("p1\\p2");
  t.header.insert(t.header.end(), r.labels.begin(), r.labels.end());
  for (std::size_t i = 0; i < r.labels.size(); ++i) {
    std::vector<std::string> row = {r.labels[i]};
    for (const auto& c : r.head_to_head[i]) row.push_back(CsvNumber(c.mean_p1_payoff));
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline CsvTable P1AdvantageTable(const MetricsReport& r) {
  CsvTable t{{"personality", "games_as_p1", "games_as_p2", "mean_normalized_as_p1", "mean_normalized_as_p2",
              "p1_advantage"},
             {}};
  for (const auto& p : r.personalities)
    t.rows.push_back({p.label, std::to_string(p.games_as_p1), std::to_string(p.games_as_p2),
                      CsvNumber(p.mean_normalized_as_p1), CsvNumber(p.mean_normalized_as_p2),
                      CsvNumber(p.p1_advantage)});
  return t;
}

// Ten bins of width 0.1; the last bin is closed so efficiency 1.0 lands in it.
inline CsvTable EfficiencyHistogramTable(const MetricsReport& r) {
  std::array<int, 10> bins{};
  for (const auto& q : r.agreement_quality)
    ++bins[std::clamp(static_cast<int>(q.efficiency * 10.0 + 1e-9), 0, 9)];
  CsvTable t{{"bin_low", "bin_high", "agreements"}, {}};
  for (int b = 0; b < 10; ++b)
    t.rows.push_back({CsvNumber(b / 10.0), CsvNumber((b + 1) / 10.0), std::to_string(bins[b])});
  return t;
}

inline CsvTable AgreementQualityTable(const MetricsReport& r) {
  CsvTable t{{"game_id", "p1", "p2", "p1_payoff", "p2_payoff", "efficiency", "frontier_distance"}, {}};
  for (const auto& q : r.agreement_quality)
    t.rows.push_back({q.game_id, q.p1_label, q.p2_label, std::to_string(q.payoffs[0]), std::to_string(q.payoffs[1]),
                      CsvNumber(q.efficiency), CsvNumber(q.frontier_distance)});
  return t;
}

inline CsvTable FinalRoundTable(const MetricsReport& r) {
  return {{"games_reaching_final_round", "final_offers_declined", "decline_rate"},
          {{std::to_string(r.final_round_games), std::to_string(r.final_round_declines),
            CsvNumber(r.final_round_decline_rate)}}};
}

// One value per row, for plotting tools.
inline CsvTable LongFormatTable(const MetricsReport& r) {
  CsvTable t{{"metric", "personality", "opponent", "value"}, {}};
  auto add = [&](const std::string& m, const std::string& p, const std::string& o, std::optional<double> v) {
    if (v) t.rows.push_back({m, p, o, CsvNumber(*v)});
  };
  for (const auto& p : r.personalities) {
    if (!p.appearances) continue;
    add("mean_normalized_incl_defaults", p.label, "", p.mean_normalized);
    add("mean_normalized_excl_defaults", p.label, "", p.mean_normalized_agreed);
    add("default_rate", p.label, "", p.default_rate);
    add("p1_advantage", p.label, "", p.p1_advantage);
  }
  for (std::size_t i = 0; i < r.labels.size(); ++i)
    for (std::size_t j = 0; j < r.labels.size(); ++j)
      add("head_to_head_p1_payoff", r.labels[i], r.labels[j], r.head_to_head[i][j].mean_p1_payoff);
  add("default_rate", "ALL", "", r.default_rate);
  add("final_round_decline_rate", "ALL", "", r.final_round_decline_rate);
  return t;
}

inline nlohmann::json MetricsToJson(const MetricsReport& r) {
  auto opt = [](std::optional<double> v) { return v ? nlohmann::json(*v) : nlohmann::json(); };
  nlohmann::json ps = nlohmann::json::array();
  for (const auto& p : r.personalities)
    ps.push_back({{"personality", p.label},
                  {"appearances", p.appearances},
                  {"agreements", p.agreements},
                  {"defaults", p.defaults},
                  {"mean_normalized_incl_defaults", p.appearances ? nlohmann::json(p.mean_normalized) : nlohmann::json()},
                  {"mean_normalized_excl_defaults", opt(p.mean_normalized_agreed)},
                  {"default_rate", p.default_rate},
                  {"mean_normalized_as_p1", opt(p.mean_normalized_as_p1)},
                  {"mean_normalized_as_p2", opt(p.mean_normalized_as_p2)},
                  {"p1_advantage", opt(p.p1_advantage)}});
  nlohmann::json h2h = nlohmann::json::array();
  for (const auto& row : r.head_to_head) {
    nlohmann::json jr = nlohmann::json::array();
    for (const auto& c : row) jr.push_back({{"games", c.games}, {"mean_p1_payoff", opt(c.mean_p1_payoff)}});
    h2h.push_back(jr);
  }
  nlohmann::json q = nlohmann::json::array();
  for (const auto& a : r.agreement_quality)
    q.push_back({{"game_id", a.game_id}, {"efficiency", a.efficiency}, {"frontier_distance", a.frontier_distance}});
  return {{"games", r.games},
          {"agreements", r.agreements},
          {"defaults", r.defaults},
          {"excluded_invalid", r.excluded_invalid},
          {"excluded_flagged", r.excluded_flagged},
          {"default_rate", r.default_rate},
          {"labels", r.labels},
          {"personalities", ps},
          {"head_to_head", {{"includes_defaults", r.head_to_head_includes_defaults}, {"cells", h2h}}},
          {"final_round",
           {{"games", r.final_round_games},
            {"declines", r.final_round_declines},
            {"decline_rate", opt(r.final_round_decline_rate)}}},
          {"agreement_quality", q}};
}

// File name -> table, as written by the report command.
inline std::vector<std::pair<std::string, CsvTable>> ReportTables(const MetricsReport& r) {
  return {{"normalized_payoffs.csv", NormalizedPayoffTable(r)},
          {"default_rates.csv", DefaultRateTable(r)},
          {"head_to_head.csv", HeadToHeadTable(r)},
          {"p1_advantage.csv", P1AdvantageTable(r)},
          {"efficiency_histogram.csv", EfficiencyHistogramTable(r)},
          {"agreement_quality.csv", AgreementQualityTable(r)},
          {"final_round.csv", FinalRoundTable(r)},
          {"metrics_long.csv", LongFormatTable(r)}};
}

}  // namespace bargain

#endif  // BARGAIN_METRICS_HPP_
