#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "apm/design.hpp"
#include "apm/errors.hpp"
#include "apm/rng.hpp"
#include "apm/shiftlog.hpp"
#include "apm/solver.hpp"
#include "apm/stats.hpp"
#include "json.hpp"

namespace apm::simgen {

using shiftlog::EventCounts;
using shiftlog::ShiftRecord;
using shiftlog::Stat;
using shiftlog::Strength;
using shiftlog::ZoneStart;

/// Per-season true contributions in goals per 60 minutes. Offense values add
/// to the player's team scoring rate; defense values add to the opposing
/// team's rate (good defenders are negative).
struct SeasonAbility {
    double ev_off = 0.0, ev_def = 0.0;
    double pp_off = 0.0, pp_def = 0.0;
    double sh_off = 0.0, sh_def = 0.0;
};

struct TrueAbility {
    std::string player_id;
    std::string team;
    char position = 'F';
    SeasonAbility base;
    double persistence = 0.9;  // season-to-season carryover in [0,1]
};

struct GoalieAbility {
    std::string goalie_id;
    std::string team;
    double save_delta = 0.0;  // shift of the per-shot goal probability
    double persistence = 0.9;
};

struct SimConfig {
    int teams = 30;
    int skaters_per_team = 18;
    int forwards_per_team = 12;
    int seasons = 1;
    int games_per_season = 82;  // per team
    int first_season = 2007;

    double ev_shift_mean_s = 45.0;
    double st_shift_extra_s = 4.5;
    double st_fraction = 0.15;

    double zone_off_prob = 0.25;
    double zone_def_prob = 0.25;
    double zone_neutral_prob = 0.25;  // remainder starts on the fly (NONE)

    // League base rates for the attacking side, goals per 60.
    double goal_rate_ev = 3.0;
    double goal_rate_pp = 6.5;
    double goal_rate_sh = 1.1;
    double shots_per_goal = 10.0;
    double fenwick_per_shot = 4.0 / 3.0;
    double corsi_per_shot = 1.6;

    // Ability spreads, goals per 60.
    double ev_off_sd = 0.45, ev_def_sd = 0.15;
    double pp_off_sd = 0.7, pp_def_sd = 0.2;
    double sh_off_sd = 0.12, sh_def_sd = 0.3;
    double zone_off_truth = 0.25, zone_def_truth = -0.25;
    double goalie_sd = 0.01;
    double persistence = 0.9;

    int coupled_pairs_per_team = 1;
    double coupling = 0.0;  // probability a designated pair enters/leaves together

    std::uint64_t seed = 1;

    double events_per_goal(Stat stat) const {
        switch (stat) {
            case Stat::GOALS: return 1.0;
            case Stat::SHOTS: return shots_per_goal;
            case Stat::FENWICK: return shots_per_goal * fenwick_per_shot;
            case Stat::CORSI: return shots_per_goal * corsi_per_shot;
        }
        return 1.0;
    }
};

struct SkaterTruth {
    std::string team;
    char position = 'F';
    std::map<std::string, SeasonAbility> by_season;
};

struct GoalieTruth {
    std::string team;
    std::map<std::string, double> save_delta_by_season;
};

/// Realized per-season ground truth written next to the generated log.
struct TruthSet {
    std::map<std::string, SkaterTruth> skaters;
    std::map<std::string, GoalieTruth> goalies;
    double zone_off_truth = 0.0, zone_def_truth = 0.0;
    double shots_per_goal = 10.0, fenwick_per_shot = 4.0 / 3.0, corsi_per_shot = 1.6;

    double stat_scale(Stat stat) const {
        switch (stat) {
            case Stat::GOALS: return 1.0;
            case Stat::SHOTS: return shots_per_goal;
            case Stat::FENWICK: return shots_per_goal * fenwick_per_shot;
            case Stat::CORSI: return shots_per_goal * corsi_per_shot;
        }
        return 1.0;
    }

    nlohmann::json to_json() const {
        nlohmann::json skaters_json = nlohmann::json::object();
        for (const auto& [id, t] : skaters) {
            nlohmann::json seasons = nlohmann::json::object();
            for (const auto& [season, a] : t.by_season)
                seasons[season] = {{"ev_off", a.ev_off}, {"ev_def", a.ev_def},
                                   {"pp_off", a.pp_off}, {"pp_def", a.pp_def},
                                   {"sh_off", a.sh_off}, {"sh_def", a.sh_def}};
            skaters_json[id] = {{"team", t.team},
                                {"position", std::string(1, t.position)},
                                {"seasons", seasons}};
        }
        nlohmann::json goalies_json = nlohmann::json::object();
        for (const auto& [id, g] : goalies) {
            nlohmann::json seasons = nlohmann::json::object();
            for (const auto& [season, d] : g.save_delta_by_season) seasons[season] = d;
            goalies_json[id] = {{"team", g.team}, {"save_delta", seasons}};
        }
        return nlohmann::json{{"zone_off", zone_off_truth},
                              {"zone_def", zone_def_truth},
                              {"shots_per_goal", shots_per_goal},
                              {"fenwick_per_shot", fenwick_per_shot},
                              {"corsi_per_shot", corsi_per_shot},
                              {"skaters", skaters_json},
                              {"goalies", goalies_json}};
    }

    static TruthSet from_json(const nlohmann::json& j) {
        TruthSet t;
        t.zone_off_truth = j.at("zone_off").get<double>();
        t.zone_def_truth = j.at("zone_def").get<double>();
        t.shots_per_goal = j.at("shots_per_goal").get<double>();
        t.fenwick_per_shot = j.at("fenwick_per_shot").get<double>();
        t.corsi_per_shot = j.at("corsi_per_shot").get<double>();
        for (const auto& [id, sj] : j.at("skaters").items()) {
            SkaterTruth st;
            st.team = sj.at("team").get<std::string>();
            st.position = sj.at("position").get<std::string>().at(0);
            for (const auto& [season, aj] : sj.at("seasons").items()) {
                SeasonAbility a;
                a.ev_off = aj.at("ev_off").get<double>();
                a.ev_def = aj.at("ev_def").get<double>();
                a.pp_off = aj.at("pp_off").get<double>();
                a.pp_def = aj.at("pp_def").get<double>();
                a.sh_off = aj.at("sh_off").get<double>();
                a.sh_def = aj.at("sh_def").get<double>();
                st.by_season[season] = a;
            }
            t.skaters[id] = std::move(st);
        }
        for (const auto& [id, gj] : j.at("goalies").items()) {
            GoalieTruth gt;
            gt.team = gj.at("team").get<std::string>();
            for (const auto& [season, d] : gj.at("save_delta").items())
                gt.save_delta_by_season[season] = d.get<double>();
            t.goalies[id] = std::move(gt);
        }
        return t;
    }
};

struct SimPopulation {
    std::vector<TrueAbility> skaters;
    std::vector<GoalieAbility> goalies;
};

struct SimResult {
    std::vector<ShiftRecord> records;
    TruthSet truth;
    std::size_t negative_mean_shift_sides = 0;
    std::size_t shift_sides = 0;
    std::vector<std::string> warnings;
};

namespace detail {

inline std::string team_id(int t) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "t%02d", t);
    return buf;
}

inline std::string skater_id(int t, int s) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "t%02ds%02d", t, s);
    return buf;
}

inline std::string goalie_id(int t) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "t%02dg0", t);
    return buf;
}

/// Circle-method round robin; round r pairs team 0 with a rotating partner.
/// Returns (home, away) pairs for that round. Odd team counts get a bye.
inline std::vector<std::pair<int, int>> round_robin_round(int teams, int round) {
    const int n = teams % 2 == 0 ? teams : teams + 1;  // n-1 is the cycle length
    const int cycle = n - 1;
    const int r = round % cycle;
    std::vector<std::pair<int, int>> games;
    for (int k = 0; k < n / 2; ++k) {
        int a, b;
        if (k == 0) {
            a = n - 1;
            b = r;
        } else {
            a = (r + k) % cycle;
            b = (r - k + cycle) % cycle;
        }
        if (a >= teams || b >= teams) continue;  // bye slot for odd team counts
        // Alternate home ice between cycles and within rounds.
        const bool swap = ((round / cycle) + k) % 2 == 1;
        games.emplace_back(swap ? b : a, swap ? a : b);
    }
    return games;
}

/// Draws `k` skaters from 0..team_size-1. Designated pairs (2i, 2i+1) enter
/// or leave together with probability `coupling`, keeping each member's
/// marginal ice share at k/team_size.
inline std::vector<int> draw_roster(std::mt19937_64& eng, int team_size, int k, int coupled_pairs,
                                    double coupling) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<int> forced_in, excluded;
    int slots = k;
    for (int pair = 0; pair < coupled_pairs && slots >= 2; ++pair) {
        const int a = 2 * pair, b = 2 * pair + 1;
        if (b >= team_size) break;
        if (unif(eng) < coupling) {
            if (unif(eng) < static_cast<double>(k) / team_size) {
                forced_in.push_back(a);
                forced_in.push_back(b);
                slots -= 2;
            } else {
                excluded.push_back(a);
                excluded.push_back(b);
            }
        }
    }
    std::vector<int> pool;
    for (int s = 0; s < team_size; ++s) {
        if (std::find(forced_in.begin(), forced_in.end(), s) != forced_in.end()) continue;
        if (std::find(excluded.begin(), excluded.end(), s) != excluded.end()) continue;
        pool.push_back(s);
    }
    // partial Fisher-Yates for the remaining slots
    for (int j = 0; j < slots; ++j) {
        std::uniform_int_distribution<int> pick(j, static_cast<int>(pool.size()) - 1);
        std::swap(pool[static_cast<std::size_t>(j)], pool[static_cast<std::size_t>(pick(eng))]);
    }
    std::vector<int> roster = forced_in;
    roster.insert(roster.end(), pool.begin(), pool.begin() + slots);
    std::sort(roster.begin(), roster.end());
    return roster;
}

}  // namespace detail

/// Draws a league's ground-truth abilities from the configured spreads.
inline SimPopulation draw_abilities(const SimConfig& config) {
    SimPopulation pop;
    int player_index = 0;
    for (int t = 0; t < config.teams; ++t) {
        for (int s = 0; s < config.skaters_per_team; ++s, ++player_index) {
            auto eng = make_engine(config.seed, 0xba5e, static_cast<std::uint64_t>(player_index));
            std::normal_distribution<double> gauss(0.0, 1.0);
            TrueAbility a;
            a.player_id = detail::skater_id(t, s);
            a.team = detail::team_id(t);
            a.position = s < config.forwards_per_team ? 'F' : 'D';
            a.persistence = config.persistence;
            a.base.ev_off = gauss(eng) * config.ev_off_sd;
            a.base.ev_def = gauss(eng) * config.ev_def_sd;
            a.base.pp_off = gauss(eng) * config.pp_off_sd;
            a.base.pp_def = gauss(eng) * config.pp_def_sd;
            a.base.sh_off = gauss(eng) * config.sh_off_sd;
            a.base.sh_def = gauss(eng) * config.sh_def_sd;
            pop.skaters.push_back(std::move(a));
        }
        auto eng = make_engine(config.seed, 0x60a1, static_cast<std::uint64_t>(t));
        std::normal_distribution<double> gauss(0.0, 1.0);
        GoalieAbility g;
        g.goalie_id = detail::goalie_id(t);
        g.team = detail::team_id(t);
        g.save_delta = gauss(eng) * config.goalie_sd;
        g.persistence = config.persistence;
        pop.goalies.push_back(std::move(g));
    }
    return pop;
}

/// Generates a shift log from known truths. Each team-side of a shift draws a
/// Poisson Corsi count whose mean is duration/3600 x max(0, base + on-ice
/// offense + opposing defense + zone effect); individual events thin to
/// Fenwick/shots/goals so the four counts nest by construction. Goalie truths
/// shift only the per-shot goal probability.
inline SimResult simulate(const SimConfig& config, const SimPopulation& population) {
    if (config.teams < 2) throw Error(ErrorKind::Config, "need at least two teams");
    if (config.skaters_per_team < 5)
        throw Error(ErrorKind::Config, "need at least five skaters per team");
    if (config.coupling < 0.0 || config.coupling > 1.0)
        throw Error(ErrorKind::Config, "coupling must lie in [0,1]");
    if (config.goal_rate_ev <= 0.0 || config.shots_per_goal <= 0.0)
        throw Error(ErrorKind::Config, "event rates must be positive");
    if (config.fenwick_per_shot < 1.0 || config.corsi_per_shot < config.fenwick_per_shot)
        throw Error(ErrorKind::Config, "event ratios must nest: shots <= fenwick <= corsi");

    SimResult result;
    result.truth.zone_off_truth = config.zone_off_truth;
    result.truth.zone_def_truth = config.zone_def_truth;
    result.truth.shots_per_goal = config.shots_per_goal;
    result.truth.fenwick_per_shot = config.fenwick_per_shot;
    result.truth.corsi_per_shot = config.corsi_per_shot;

    // Evolve abilities per season: AR(1) with the configured persistence,
    // stationary in the configured spread.
    std::vector<std::vector<SeasonAbility>> skater_seasons(population.skaters.size());
    std::vector<std::vector<double>> goalie_seasons(population.goalies.size());
    std::vector<std::string> season_labels;
    for (int s = 0; s < config.seasons; ++s)
        season_labels.push_back(std::to_string(config.first_season + s));

    auto evolve = [](double prev, double rho, double sd, std::normal_distribution<double>& gauss,
                     std::mt19937_64& eng) {
        return rho * prev + std::sqrt(std::max(0.0, 1.0 - rho * rho)) * sd * gauss(eng);
    };

    for (std::size_t i = 0; i < population.skaters.size(); ++i) {
        const TrueAbility& a = population.skaters[i];
        auto eng = make_engine(config.seed, 0xa51d, static_cast<std::uint64_t>(i));
        std::normal_distribution<double> gauss(0.0, 1.0);
        SeasonAbility cur = a.base;
        for (int s = 0; s < config.seasons; ++s) {
            if (s > 0) {
                const double rho = a.persistence;
                cur.ev_off = evolve(cur.ev_off, rho, config.ev_off_sd, gauss, eng);
                cur.ev_def = evolve(cur.ev_def, rho, config.ev_def_sd, gauss, eng);
                cur.pp_off = evolve(cur.pp_off, rho, config.pp_off_sd, gauss, eng);
                cur.pp_def = evolve(cur.pp_def, rho, config.pp_def_sd, gauss, eng);
                cur.sh_off = evolve(cur.sh_off, rho, config.sh_off_sd, gauss, eng);
                cur.sh_def = evolve(cur.sh_def, rho, config.sh_def_sd, gauss, eng);
            }
            skater_seasons[i].push_back(cur);
            result.truth.skaters[a.player_id].team = a.team;
            result.truth.skaters[a.player_id].position = a.position;
            result.truth.skaters[a.player_id].by_season[season_labels[static_cast<std::size_t>(s)]] =
                cur;
        }
    }
    for (std::size_t i = 0; i < population.goalies.size(); ++i) {
        const GoalieAbility& g = population.goalies[i];
        auto eng = make_engine(config.seed, 0xa51e, static_cast<std::uint64_t>(i));
        std::normal_distribution<double> gauss(0.0, 1.0);
        double cur = g.save_delta;
        for (int s = 0; s < config.seasons; ++s) {
            if (s > 0) cur = evolve(cur, g.persistence, config.goalie_sd, gauss, eng);
            goalie_seasons[i].push_back(cur);
            result.truth.goalies[g.goalie_id].team = g.team;
            result.truth.goalies[g.goalie_id]
                .save_delta_by_season[season_labels[static_cast<std::size_t>(s)]] = cur;
        }
    }

    // Index abilities by (team, slot) for roster lookups.
    std::vector<std::vector<std::size_t>> team_skater(static_cast<std::size_t>(config.teams));
    for (std::size_t i = 0; i < population.skaters.size(); ++i) {
        // ids are generated per team in order, so recover the team index
        int t = std::stoi(population.skaters[i].team.substr(1));
        team_skater[static_cast<std::size_t>(t)].push_back(i);
    }
    std::vector<std::size_t> team_goalie(static_cast<std::size_t>(config.teams));
    for (std::size_t i = 0; i < population.goalies.size(); ++i)
        team_goalie[static_cast<std::size_t>(std::stoi(population.goalies[i].team.substr(1)))] = i;

    const double p_fenwick = config.fenwick_per_shot / config.corsi_per_shot;
    const double p_shot = 1.0 / config.fenwick_per_shot;
    const double p_goal_base = 1.0 / config.shots_per_goal;
    const double corsi_per_goal = config.shots_per_goal * config.corsi_per_shot;

    for (int season = 0; season < config.seasons; ++season) {
        const std::string& season_label = season_labels[static_cast<std::size_t>(season)];
        int game_counter = 0;
        for (int round = 0; round < config.games_per_season; ++round) {
            for (const auto& [home, away] : detail::round_robin_round(config.teams, round)) {
                auto eng = make_engine(config.seed,
                                       0x6a3e + static_cast<std::uint64_t>(season) * 1000003ull,
                                       static_cast<std::uint64_t>(game_counter));
                std::uniform_real_distribution<double> unif(0.0, 1.0);
                char game_buf[24];
                std::snprintf(game_buf, sizeof(game_buf), "%s-%05d", season_label.c_str(),
                              game_counter);
                ++game_counter;

                double clock = 0.0;
                while (clock < 3600.0) {
                    ShiftRecord rec;
                    rec.season = season_label;
                    rec.game_id = game_buf;

                    const bool st = unif(eng) < config.st_fraction;
                    const bool home_advantaged = st && unif(eng) < 0.5;
                    rec.strength = !st ? Strength::EV
                                       : (home_advantaged ? Strength::PP_HOME : Strength::PP_AWAY);
                    const double mean_s =
                        config.ev_shift_mean_s + (st ? config.st_shift_extra_s : 0.0);
                    std::exponential_distribution<double> expdist(1.0 / (mean_s - 1.0));
                    rec.duration_s =
                        static_cast<double>(std::max<long long>(1, std::llround(1.0 + expdist(eng))));
                    clock += rec.duration_s;

                    const double uz = unif(eng);
                    if (uz < config.zone_off_prob)
                        rec.zone_start = ZoneStart::OFF_HOME;
                    else if (uz < config.zone_off_prob + config.zone_def_prob)
                        rec.zone_start = ZoneStart::DEF_HOME;
                    else if (uz < config.zone_off_prob + config.zone_def_prob +
                                      config.zone_neutral_prob)
                        rec.zone_start = ZoneStart::NEUTRAL;
                    else
                        rec.zone_start = ZoneStart::NONE;

                    int home_n = 5, away_n = 5;
                    if (rec.strength == Strength::PP_HOME) away_n = 4;
                    if (rec.strength == Strength::PP_AWAY) home_n = 4;
                    auto home_slots = detail::draw_roster(eng, config.skaters_per_team, home_n,
                                                          config.coupled_pairs_per_team,
                                                          config.coupling);
                    auto away_slots = detail::draw_roster(eng, config.skaters_per_team, away_n,
                                                          config.coupled_pairs_per_team,
                                                          config.coupling);
                    for (int s : home_slots) rec.home_skaters.push_back(detail::skater_id(home, s));
                    for (int s : away_slots) rec.away_skaters.push_back(detail::skater_id(away, s));
                    rec.home_goalie = detail::goalie_id(home);
                    rec.away_goalie = detail::goalie_id(away);

                    auto side_events = [&](bool home_attacking) {
                        const auto& atk_slots = home_attacking ? home_slots : away_slots;
                        const auto& def_slots = home_attacking ? away_slots : home_slots;
                        const int atk_team = home_attacking ? home : away;
                        const int def_team = home_attacking ? away : home;

                        double base;
                        bool atk_pp = false, atk_sh = false;
                        if (rec.strength == Strength::EV) {
                            base = config.goal_rate_ev;
                        } else if ((rec.strength == Strength::PP_HOME) == home_attacking) {
                            base = config.goal_rate_pp;
                            atk_pp = true;
                        } else {
                            base = config.goal_rate_sh;
                            atk_sh = true;
                        }

                        double sum = base;
                        for (int s : atk_slots) {
                            const auto& a =
                                skater_seasons[team_skater[static_cast<std::size_t>(atk_team)]
                                                          [static_cast<std::size_t>(s)]]
                                              [static_cast<std::size_t>(season)];
                            sum += atk_pp ? a.pp_off : (atk_sh ? a.sh_off : a.ev_off);
                        }
                        for (int s : def_slots) {
                            const auto& a =
                                skater_seasons[team_skater[static_cast<std::size_t>(def_team)]
                                                          [static_cast<std::size_t>(s)]]
                                              [static_cast<std::size_t>(season)];
                            // defenders of a power play are the shorthanded side
                            sum += atk_pp ? a.sh_def : (atk_sh ? a.pp_def : a.ev_def);
                        }
                        if (rec.zone_start == ZoneStart::OFF_HOME)
                            sum += home_attacking ? config.zone_off_truth : config.zone_def_truth;
                        if (rec.zone_start == ZoneStart::DEF_HOME)
                            sum += home_attacking ? config.zone_def_truth : config.zone_off_truth;

                        ++result.shift_sides;
                        if (sum < 0.0) {
                            ++result.negative_mean_shift_sides;
                            sum = 0.0;
                        }
                        const double goalie_delta =
                            goalie_seasons[team_goalie[static_cast<std::size_t>(def_team)]]
                                          [static_cast<std::size_t>(season)];
                        const double p_goal = std::clamp(p_goal_base + goalie_delta, 0.0, 1.0);

                        const double mean_corsi = corsi_per_goal * sum * rec.duration_s / 3600.0;
                        std::poisson_distribution<long> pois(mean_corsi);
                        const long corsi = mean_corsi > 0.0 ? pois(eng) : 0;
                        EventCounts e;
                        for (long i = 0; i < corsi; ++i) {
                            if (unif(eng) >= p_fenwick) {
                                ++e.blocked_shots;
                            } else if (unif(eng) >= p_shot) {
                                ++e.missed_shots;
                            } else {
                                ++e.shots_on_goal;
                                if (unif(eng) < p_goal) ++e.goals;
                            }
                        }
                        return e;
                    };

                    rec.events_home = side_events(true);
                    rec.events_away = side_events(false);
                    result.records.push_back(std::move(rec));
                }
            }
        }
    }

    if (result.shift_sides > 0 &&
        static_cast<double>(result.negative_mean_shift_sides) >
            0.01 * static_cast<double>(result.shift_sides)) {
        result.warnings.push_back(
            "negative pre-clamp event rate on " + std::to_string(result.negative_mean_shift_sides) +
            " of " + std::to_string(result.shift_sides) + " shift sides");
    }
    return result;
}

inline SimResult simulate(const SimConfig& config) { return simulate(config, draw_abilities(config)); }

struct RecoveryMetrics {
    double correlation = 0.0;
    double rmse = 0.0;
    std::size_t n = 0;
};

/// Compares fitted coefficients with the generator's truth for one component
/// (column kind) and statistic. Truth per player is the season-average
/// ability in goals/60 scaled to the statistic's event rate.
inline RecoveryMetrics recovery_error(const TruthSet& truth, const solver::RidgeFit& fit,
                                      const design::ColumnCatalog& catalog,
                                      design::ColumnKind kind, Stat stat,
                                      const std::map<std::string, double>* toi_minutes = nullptr,
                                      double min_toi_minutes = 0.0) {
    const double scale = truth.stat_scale(stat);
    std::vector<double> t, f;
    for (const auto& [id, st] : truth.skaters) {
        auto col = catalog.find(kind, id);
        if (!col) continue;
        if (toi_minutes) {
            auto it = toi_minutes->find(id);
            if (it == toi_minutes->end() || it->second < min_toi_minutes) continue;
        }
        double ab = 0.0;
        for (const auto& [season, a] : st.by_season) {
            switch (kind) {
                case design::ColumnKind::SKATER_OFF: ab += a.ev_off; break;
                case design::ColumnKind::SKATER_DEF: ab += a.ev_def; break;
                case design::ColumnKind::SKATER_PP_OFF: ab += a.pp_off; break;
                case design::ColumnKind::SKATER_PP_DEF: ab += a.pp_def; break;
                case design::ColumnKind::SKATER_SH_OFF: ab += a.sh_off; break;
                case design::ColumnKind::SKATER_SH_DEF: ab += a.sh_def; break;
                default:
                    throw Error(ErrorKind::Config, "recovery component must be a skater column");
            }
        }
        ab /= static_cast<double>(st.by_season.size());
        t.push_back(ab * scale);
        f.push_back(fit.coefficients[*col]);
    }
    if (t.empty())
        throw Error(ErrorKind::Validation, "no overlapping players between truth and fit");
    RecoveryMetrics m;
    m.n = t.size();
    m.correlation = stats::pearson(t, f);
    m.rmse = stats::rmse(t, f);
    return m;
}

inline void write_truth_file(const std::string& path, const TruthSet& truth) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Io, "cannot write truth file '" + path + "'");
    out << truth.to_json().dump(2) << '\n';
}

inline TruthSet read_truth_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot read truth file '" + path + "'");
    nlohmann::json j;
    in >> j;
    return TruthSet::from_json(j);
}

}  // namespace apm::simgen
