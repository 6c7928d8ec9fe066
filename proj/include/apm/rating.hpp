#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "apm/csv.hpp"
#include "apm/design.hpp"
#include "apm/errors.hpp"
#include "apm/shiftlog.hpp"
#include "apm/solver.hpp"
#include "json.hpp"

namespace apm::rating {

using design::ColumnKind;
using design::PartitionKind;
using shiftlog::Stat;

enum class Strength3 { EV = 0, PP = 1, SH = 2 };

inline const char* strength_name(Strength3 s) {
    switch (s) {
        case Strength3::EV: return "EV";
        case Strength3::PP: return "PP";
        case Strength3::SH: return "SH";
    }
    return "?";
}

constexpr std::array<Stat, 4> kStats = {Stat::GOALS, Stat::SHOTS, Stat::FENWICK, Stat::CORSI};
constexpr std::array<Strength3, 3> kStrengths = {Strength3::EV, Strength3::PP, Strength3::SH};

/// League-average goals per shot / Fenwick / Corsi by strength situation.
struct ShootingPercentages {
    struct Row {
        double goals_per_shot = 0.0;
        double goals_per_fenwick = 0.0;
        double goals_per_corsi = 0.0;
    };
    Row ev, pp, sh;

    const Row& at(Strength3 s) const { return s == Strength3::EV ? ev : (s == Strength3::PP ? pp : sh); }
    Row& at(Strength3 s) { return s == Strength3::EV ? ev : (s == Strength3::PP ? pp : sh); }
};

/// Ratios of league totals, pooled over every season in the records. EV cells
/// come from the even-strength partition; PP cells from the advantaged side
/// of special-teams shifts and SH cells from the shorthanded side. Empty-net
/// records are excluded, mirroring the fitted data.
inline ShootingPercentages compute_shooting_percentages(
    const std::vector<shiftlog::ShiftRecord>& records) {
    long goals[3] = {0, 0, 0}, shots[3] = {0, 0, 0}, fen[3] = {0, 0, 0}, corsi[3] = {0, 0, 0};
    auto add = [&](int bucket, const shiftlog::EventCounts& e) {
        goals[bucket] += e.goals;
        shots[bucket] += e.count(Stat::SHOTS);
        fen[bucket] += e.count(Stat::FENWICK);
        corsi[bucket] += e.count(Stat::CORSI);
    };
    auto parts = shiftlog::partition(records);
    for (const auto& r : parts.ev) {
        add(0, r.events_home);
        add(0, r.events_away);
    }
    for (const auto& r : parts.st) {
        const bool home_pp = r.strength == shiftlog::Strength::PP_HOME;
        add(1, home_pp ? r.events_home : r.events_away);
        add(2, home_pp ? r.events_away : r.events_home);
    }

    ShootingPercentages pct;
    for (int b = 0; b < 3; ++b) {
        if (shots[b] == 0 || fen[b] == 0 || corsi[b] == 0)
            throw Error(ErrorKind::Validation,
                        std::string("no shot events in the ") +
                            strength_name(static_cast<Strength3>(b)) +
                            " bucket; shooting percentages undefined");
        auto& row = pct.at(static_cast<Strength3>(b));
        row.goals_per_shot = static_cast<double>(goals[b]) / static_cast<double>(shots[b]);
        row.goals_per_fenwick = static_cast<double>(goals[b]) / static_cast<double>(fen[b]);
        row.goals_per_corsi = static_cast<double>(goals[b]) / static_cast<double>(corsi[b]);
    }
    return pct;
}

/// Multiplies a shots/Fenwick/Corsi rate into expected goals per 60; goals
/// pass through unchanged.
inline double rescale_to_expected_goals(double rate_per60, Stat stat, Strength3 strength,
                                        const ShootingPercentages& pct) {
    switch (stat) {
        case Stat::GOALS: return rate_per60;
        case Stat::SHOTS: return rate_per60 * pct.at(strength).goals_per_shot;
        case Stat::FENWICK: return rate_per60 * pct.at(strength).goals_per_fenwick;
        case Stat::CORSI: return rate_per60 * pct.at(strength).goals_per_corsi;
    }
    return rate_per60;
}

inline double per_season(double rate_per60, double toi_minutes) {
    return rate_per60 * toi_minutes / 60.0;
}

struct Component {
    double per60 = 0.0;
    double per60_err = 0.0;
    double season = 0.0;
    double season_err = 0.0;
    bool degenerate = false;  // player never exposed in this component's block
};

struct StatBlock {
    // indexed by Strength3
    std::array<Component, 3> off, def, total;
    double all_off = 0.0, all_def = 0.0, all_total = 0.0;  // per-season, EV+PP+SH
    double all_off_err = 0.0, all_def_err = 0.0, all_total_err = 0.0;
};

struct PlayerRating {
    std::string player_id;
    char position = 'F';
    std::string team;
    std::array<double, 3> toi_minutes = {0.0, 0.0, 0.0};  // EV, PP, SH
    int seasons_played = 1;
    std::array<StatBlock, 4> stat;  // G, S, F, C
};

/// One fitted model plus the catalog that maps its coefficients to players.
struct FittedModel {
    solver::RidgeFit fit;
    design::ColumnCatalog catalog;
};

using ModelKey = std::pair<Stat, PartitionKind>;
using ModelSet = std::map<ModelKey, FittedModel>;

namespace detail {

inline ColumnKind role_kind(Strength3 s, bool offense) {
    switch (s) {
        case Strength3::EV: return offense ? ColumnKind::SKATER_OFF : ColumnKind::SKATER_DEF;
        case Strength3::PP: return offense ? ColumnKind::SKATER_PP_OFF : ColumnKind::SKATER_PP_DEF;
        case Strength3::SH: return offense ? ColumnKind::SKATER_SH_OFF : ColumnKind::SKATER_SH_DEF;
    }
    return ColumnKind::SKATER_OFF;
}

inline double hypot2(double a, double b) {
    if (std::isinf(a) || std::isinf(b)) return std::numeric_limits<double>::infinity();
    return std::sqrt(a * a + b * b);
}

}  // namespace detail

/// Builds the full rating table from the 8 fitted models. Defensive
/// coefficients are sign-flipped so positive always means goals added for
/// offense and goals prevented for defense, making Total = Off + Def. Shots,
/// Fenwick and Corsi components arrive rescaled to expected goals. Multi-
/// season inputs divide per-season figures by the player's season count.
inline std::vector<PlayerRating> build_rating_table(
    const ModelSet& models, const shiftlog::ShiftSummary& summary,
    const ShootingPercentages& pct,
    const std::map<std::string, char>* positions = nullptr,
    const std::map<std::string, std::string>* teams = nullptr) {
    for (Stat s : kStats)
        for (PartitionKind part : {PartitionKind::EV, PartitionKind::ST})
            if (!models.count({s, part}))
                throw Error(ErrorKind::Config,
                            std::string("missing fitted model for ") + shiftlog::stat_name(s) +
                                (part == PartitionKind::EV ? "/ev" : "/st"));

    std::set<std::string> player_ids;
    for (const auto& [key, model] : models)
        for (const auto& id : model.catalog.skater_ids()) player_ids.insert(id);

    std::vector<PlayerRating> out;
    out.reserve(player_ids.size());
    for (const auto& id : player_ids) {
        auto toi_it = summary.player_toi.find(id);
        if (toi_it == summary.player_toi.end())
            throw Error(ErrorKind::Validation,
                        "player '" + id + "' appears in a fit but has no ice time record");
        PlayerRating r;
        r.player_id = id;
        r.toi_minutes = {toi_it->second.ev_s / 60.0, toi_it->second.pp_s / 60.0,
                         toi_it->second.sh_s / 60.0};
        auto season_it = summary.player_season_toi.find(id);
        r.seasons_played =
            season_it == summary.player_season_toi.end()
                ? 1
                : std::max<int>(1, static_cast<int>(season_it->second.size()));
        if (positions) {
            auto it = positions->find(id);
            if (it != positions->end()) r.position = it->second;
        }
        if (teams) {
            auto it = teams->find(id);
            if (it != teams->end()) r.team = it->second;
        }

        for (std::size_t si = 0; si < kStats.size(); ++si) {
            const Stat stat = kStats[si];
            StatBlock& block = r.stat[si];
            for (Strength3 strength : kStrengths) {
                const auto strength_idx = static_cast<std::size_t>(strength);
                const PartitionKind part =
                    strength == Strength3::EV ? PartitionKind::EV : PartitionKind::ST;
                const FittedModel& model = models.at({stat, part});
                const double toi = r.toi_minutes[strength_idx];

                auto component = [&](bool offense) {
                    Component c;
                    auto col = model.catalog.find(detail::role_kind(strength, offense), id);
                    if (!col || std::isinf(model.fit.std_errors[*col])) {
                        c.degenerate = true;
                        c.per60 = 0.0;
                        c.per60_err = col ? model.fit.std_errors[*col]
                                          : std::numeric_limits<double>::infinity();
                    } else {
                        const double raw = model.fit.coefficients[*col];
                        c.per60 = offense ? raw : -raw;  // prevented goals count positive
                        c.per60_err = model.fit.std_errors[*col];
                    }
                    c.per60 = rescale_to_expected_goals(c.per60, stat, strength, pct);
                    if (!std::isinf(c.per60_err))
                        c.per60_err = rescale_to_expected_goals(c.per60_err, stat, strength, pct);
                    c.season = per_season(c.per60, toi) / r.seasons_played;
                    c.season_err =
                        toi == 0.0 ? 0.0 : per_season(c.per60_err, toi) / r.seasons_played;
                    return c;
                };

                Component off = component(true);
                Component def = component(false);
                Component tot;
                tot.degenerate = off.degenerate && def.degenerate;
                tot.per60 = off.per60 + def.per60;
                tot.per60_err = detail::hypot2(off.per60_err, def.per60_err);
                tot.season = off.season + def.season;
                tot.season_err = detail::hypot2(off.season_err, def.season_err);
                block.off[strength_idx] = off;
                block.def[strength_idx] = def;
                block.total[strength_idx] = tot;
            }
            block.all_off = block.off[0].season + block.off[1].season + block.off[2].season;
            block.all_def = block.def[0].season + block.def[1].season + block.def[2].season;
            block.all_total = block.total[0].season + block.total[1].season + block.total[2].season;
            block.all_off_err = detail::hypot2(detail::hypot2(block.off[0].season_err,
                                                              block.off[1].season_err),
                                               block.off[2].season_err);
            block.all_def_err = detail::hypot2(detail::hypot2(block.def[0].season_err,
                                                              block.def[1].season_err),
                                               block.def[2].season_err);
            block.all_total_err = detail::hypot2(block.all_off_err, block.all_def_err);
        }
        out.push_back(std::move(r));
    }
    return out;
}

enum class ViewMode { RAW, POSITION_CENTERED };

/// POSITION_CENTERED subtracts the TOI-weighted positional mean from every
/// per-60 component and rebuilds the per-season figures; RAW is the identity.
inline std::vector<PlayerRating> positional_view(std::vector<PlayerRating> ratings,
                                                 ViewMode mode) {
    if (mode == ViewMode::RAW) return ratings;

    for (std::size_t si = 0; si < kStats.size(); ++si) {
        for (Strength3 strength : kStrengths) {
            const auto sx = static_cast<std::size_t>(strength);
            for (bool offense : {true, false}) {
                std::map<char, std::pair<double, double>> acc;  // position -> (sum w*x, sum w)
                for (const auto& r : ratings) {
                    const Component& c =
                        offense ? r.stat[si].off[sx] : r.stat[si].def[sx];
                    const double w = r.toi_minutes[sx];
                    if (w <= 0.0) continue;
                    acc[r.position].first += w * c.per60;
                    acc[r.position].second += w;
                }
                for (auto& r : ratings) {
                    auto it = acc.find(r.position);
                    const double mean =
                        (it != acc.end() && it->second.second > 0.0)
                            ? it->second.first / it->second.second
                            : 0.0;
                    Component& c = offense ? r.stat[si].off[sx] : r.stat[si].def[sx];
                    c.per60 -= mean;
                    c.season = per_season(c.per60, r.toi_minutes[sx]) / r.seasons_played;
                }
            }
            for (auto& r : ratings) {
                Component& tot = r.stat[si].total[sx];
                const Component& off = r.stat[si].off[sx];
                const Component& def = r.stat[si].def[sx];
                tot.per60 = off.per60 + def.per60;
                tot.season = off.season + def.season;
            }
        }
        for (auto& r : ratings) {
            StatBlock& b = r.stat[si];
            b.all_off = b.off[0].season + b.off[1].season + b.off[2].season;
            b.all_def = b.def[0].season + b.def[1].season + b.def[2].season;
            b.all_total = b.total[0].season + b.total[1].season + b.total[2].season;
        }
    }
    return ratings;
}

// --- component naming, CSV and JSON -----------------------------------------

/// Keys follow the table notation: G_off (all-situations per season),
/// G_off_EV (per season at one strength), G_off_EV_60 / G_off_EV_60_err
/// (per-60 and its error). Totals drop the role: G, G_EV, G_EV_60.
inline std::vector<std::string> component_keys() {
    std::vector<std::string> keys;
    for (Stat stat : kStats) {
        const std::string t = shiftlog::stat_letter(stat);
        keys.push_back(t + "_off");
        keys.push_back(t + "_def");
        keys.push_back(t);
        for (Strength3 s : kStrengths) {
            const std::string sn = strength_name(s);
            keys.push_back(t + "_off_" + sn);
            keys.push_back(t + "_def_" + sn);
            keys.push_back(t + "_" + sn);
            keys.push_back(t + "_off_" + sn + "_60");
            keys.push_back(t + "_def_" + sn + "_60");
            keys.push_back(t + "_" + sn + "_60");
        }
    }
    return keys;
}

inline std::optional<double> component_value(const PlayerRating& r, const std::string& key) {
    for (std::size_t si = 0; si < kStats.size(); ++si) {
        const std::string t = shiftlog::stat_letter(kStats[si]);
        const StatBlock& b = r.stat[si];
        if (key == t + "_off") return b.all_off;
        if (key == t + "_def") return b.all_def;
        if (key == t) return b.all_total;
        for (Strength3 s : kStrengths) {
            const auto sx = static_cast<std::size_t>(s);
            const std::string sn = strength_name(s);
            if (key == t + "_off_" + sn) return b.off[sx].season;
            if (key == t + "_def_" + sn) return b.def[sx].season;
            if (key == t + "_" + sn) return b.total[sx].season;
            if (key == t + "_off_" + sn + "_60") return b.off[sx].per60;
            if (key == t + "_def_" + sn + "_60") return b.def[sx].per60;
            if (key == t + "_" + sn + "_60") return b.total[sx].per60;
        }
    }
    return std::nullopt;
}

inline void write_ratings_csv(std::ostream& out, const std::vector<PlayerRating>& ratings) {
    out << "player_id,pos,team";
    for (Stat stat : kStats) {
        const std::string t = shiftlog::stat_letter(stat);
        out << ',' << t << "_off," << t << "_def," << t;
    }
    for (Stat stat : kStats) {
        const std::string t = shiftlog::stat_letter(stat);
        for (Strength3 s : kStrengths) {
            const std::string sn = strength_name(s);
            out << ',' << t << "_off_" << sn << ',' << t << "_def_" << sn << ',' << t << '_' << sn;
        }
    }
    for (Stat stat : kStats) {
        const std::string t = shiftlog::stat_letter(stat);
        for (Strength3 s : kStrengths) {
            const std::string sn = strength_name(s);
            out << ',' << t << "_off_" << sn << "_60," << t << "_off_" << sn << "_60_err,"
                << t << "_def_" << sn << "_60," << t << "_def_" << sn << "_60_err,"
                << t << '_' << sn << "_60," << t << '_' << sn << "_60_err";
        }
    }
    out << ",toi_EV_min,toi_PP_min,toi_SH_min,seasons\n";

    for (const auto& r : ratings) {
        out << r.player_id << ',' << r.position << ',' << r.team;
        for (std::size_t si = 0; si < kStats.size(); ++si) {
            const StatBlock& b = r.stat[si];
            out << ',' << csv::fmt(b.all_off) << ',' << csv::fmt(b.all_def) << ','
                << csv::fmt(b.all_total);
        }
        for (std::size_t si = 0; si < kStats.size(); ++si) {
            const StatBlock& b = r.stat[si];
            for (std::size_t sx = 0; sx < 3; ++sx)
                out << ',' << csv::fmt(b.off[sx].season) << ',' << csv::fmt(b.def[sx].season)
                    << ',' << csv::fmt(b.total[sx].season);
        }
        for (std::size_t si = 0; si < kStats.size(); ++si) {
            const StatBlock& b = r.stat[si];
            for (std::size_t sx = 0; sx < 3; ++sx)
                out << ',' << csv::fmt(b.off[sx].per60) << ',' << csv::fmt(b.off[sx].per60_err)
                    << ',' << csv::fmt(b.def[sx].per60) << ',' << csv::fmt(b.def[sx].per60_err)
                    << ',' << csv::fmt(b.total[sx].per60) << ',' << csv::fmt(b.total[sx].per60_err);
        }
        out << ',' << csv::fmt(r.toi_minutes[0]) << ',' << csv::fmt(r.toi_minutes[1]) << ','
            << csv::fmt(r.toi_minutes[2]) << ',' << r.seasons_played << '\n';
    }
}

inline nlohmann::json ratings_to_json(const std::vector<PlayerRating>& ratings) {
    auto num = [](double v) -> nlohmann::json {
        if (std::isfinite(v)) return v;
        return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
    };
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : ratings) {
        nlohmann::json stats_json = nlohmann::json::object();
        for (std::size_t si = 0; si < kStats.size(); ++si) {
            const StatBlock& b = r.stat[si];
            nlohmann::json strengths = nlohmann::json::object();
            for (Strength3 s : kStrengths) {
                const auto sx = static_cast<std::size_t>(s);
                auto comp = [&](const Component& c) {
                    return nlohmann::json{{"per60", num(c.per60)},
                                          {"per60_err", num(c.per60_err)},
                                          {"season", num(c.season)},
                                          {"season_err", num(c.season_err)},
                                          {"degenerate", c.degenerate}};
                };
                strengths[strength_name(s)] = {{"off", comp(b.off[sx])},
                                               {"def", comp(b.def[sx])},
                                               {"total", comp(b.total[sx])}};
            }
            stats_json[shiftlog::stat_letter(kStats[si])] = {
                {"strengths", strengths},
                {"all", {{"off", num(b.all_off)}, {"def", num(b.all_def)},
                         {"total", num(b.all_total)}, {"off_err", num(b.all_off_err)},
                         {"def_err", num(b.all_def_err)}, {"total_err", num(b.all_total_err)}}}};
        }
        arr.push_back({{"player_id", r.player_id},
                       {"position", std::string(1, r.position)},
                       {"team", r.team},
                       {"toi_minutes", {r.toi_minutes[0], r.toi_minutes[1], r.toi_minutes[2]}},
                       {"seasons", r.seasons_played},
                       {"stats", stats_json}});
    }
    return arr;
}

inline std::vector<PlayerRating> ratings_from_json(const nlohmann::json& arr) {
    auto num = [](const nlohmann::json& j) -> double {
        if (j.is_number()) return j.get<double>();
        const std::string s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        return std::numeric_limits<double>::quiet_NaN();
    };
    std::vector<PlayerRating> out;
    for (const auto& rj : arr) {
        PlayerRating r;
        r.player_id = rj.at("player_id").get<std::string>();
        r.position = rj.at("position").get<std::string>().at(0);
        r.team = rj.at("team").get<std::string>();
        for (int i = 0; i < 3; ++i) r.toi_minutes[static_cast<std::size_t>(i)] =
            rj.at("toi_minutes").at(static_cast<std::size_t>(i)).get<double>();
        r.seasons_played = rj.at("seasons").get<int>();
        for (std::size_t si = 0; si < kStats.size(); ++si) {
            const auto& sj = rj.at("stats").at(shiftlog::stat_letter(kStats[si]));
            StatBlock& b = r.stat[si];
            for (Strength3 s : kStrengths) {
                const auto sx = static_cast<std::size_t>(s);
                const auto& stj = sj.at("strengths").at(strength_name(s));
                auto comp = [&](const char* role) {
                    Component c;
                    const auto& cj = stj.at(role);
                    c.per60 = num(cj.at("per60"));
                    c.per60_err = num(cj.at("per60_err"));
                    c.season = num(cj.at("season"));
                    c.season_err = num(cj.at("season_err"));
                    c.degenerate = cj.at("degenerate").get<bool>();
                    return c;
                };
                b.off[sx] = comp("off");
                b.def[sx] = comp("def");
                b.total[sx] = comp("total");
            }
            const auto& aj = sj.at("all");
            b.all_off = num(aj.at("off"));
            b.all_def = num(aj.at("def"));
            b.all_total = num(aj.at("total"));
            b.all_off_err = num(aj.at("off_err"));
            b.all_def_err = num(aj.at("def_err"));
            b.all_total_err = num(aj.at("total_err"));
        }
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace apm::rating
