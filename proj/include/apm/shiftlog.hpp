#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "apm/csv.hpp"
#include "apm/errors.hpp"

namespace apm::shiftlog {

enum class Strength { EV, PP_HOME, PP_AWAY };
enum class ZoneStart { OFF_HOME, DEF_HOME, NEUTRAL, NONE };

/// Response statistic fitted by a model.
enum class Stat { GOALS, SHOTS, FENWICK, CORSI };

/// Zone of the faceoff from the offense team's perspective.
enum class Zone { OFF, DEF, NEUTRAL };

/// Strength situation from the offense team's perspective.
enum class StrengthRole { EV, PP_OFFENSE, SH_OFFENSE };

inline const char* stat_name(Stat s) {
    switch (s) {
        case Stat::GOALS: return "goals";
        case Stat::SHOTS: return "shots";
        case Stat::FENWICK: return "fenwick";
        case Stat::CORSI: return "corsi";
    }
    return "?";
}

inline const char* stat_letter(Stat s) {
    switch (s) {
        case Stat::GOALS: return "G";
        case Stat::SHOTS: return "S";
        case Stat::FENWICK: return "F";
        case Stat::CORSI: return "C";
    }
    return "?";
}

struct EventCounts {
    long goals = 0;
    long shots_on_goal = 0;   // includes goals
    long missed_shots = 0;
    long blocked_shots = 0;

    long count(Stat stat) const {
        switch (stat) {
            case Stat::GOALS: return goals;
            case Stat::SHOTS: return shots_on_goal;
            case Stat::FENWICK: return shots_on_goal + missed_shots;
            case Stat::CORSI: return shots_on_goal + missed_shots + blocked_shots;
        }
        return 0;
    }
};

/// One on-ice interval with fixed personnel. duration_s > 0; an absent goalie
/// id encodes an empty net.
struct ShiftRecord {
    std::string season;
    std::string game_id;
    double duration_s = 0.0;
    Strength strength = Strength::EV;
    ZoneStart zone_start = ZoneStart::NONE;
    std::vector<std::string> home_skaters;
    std::vector<std::string> away_skaters;
    std::optional<std::string> home_goalie;
    std::optional<std::string> away_goalie;
    EventCounts events_home;
    EventCounts events_away;
    std::size_t source_line = 0;
};

/// One regression row. Every shift yields two: one per attacking team.
struct Observation {
    double weight = 0.0;     // seconds
    double response = 0.0;   // events per 60 minutes
    std::vector<std::string> offense_players;
    std::vector<std::string> defense_players;
    std::optional<std::string> defending_goalie;
    Zone zone = Zone::NEUTRAL;
    StrengthRole strength_role = StrengthRole::EV;
};

inline constexpr const char* kCsvHeader =
    "season,game_id,duration_s,strength,zone_start,home_skaters,away_skaters,"
    "home_goalie,away_goalie,h_goals,h_sog,h_miss,h_block,a_goals,a_sog,a_miss,a_block";

namespace detail {

inline Strength parse_strength(const std::string& s, std::size_t line) {
    if (s == "EV") return Strength::EV;
    if (s == "PP_HOME") return Strength::PP_HOME;
    if (s == "PP_AWAY") return Strength::PP_AWAY;
    throw_parse(line, "strength", "unknown value '" + s + "'");
}

inline ZoneStart parse_zone_start(const std::string& s, std::size_t line) {
    if (s == "OFF_HOME") return ZoneStart::OFF_HOME;
    if (s == "DEF_HOME") return ZoneStart::DEF_HOME;
    if (s == "NEU") return ZoneStart::NEUTRAL;
    if (s == "NONE") return ZoneStart::NONE;
    throw_parse(line, "zone_start", "unknown value '" + s + "'");
}

inline std::vector<std::string> parse_skaters(const std::string& cell, const char* field,
                                              std::size_t line) {
    if (cell.empty()) throw_parse(line, field, "empty skater list");
    std::vector<std::string> ids = csv::split(cell, ';');
    for (const auto& id : ids)
        if (id.empty()) throw_parse(line, field, "empty player id");
    if (ids.size() > 6)
        throw_parse(line, field, "more than 6 skaters");
    return ids;
}

inline long parse_count(const std::string& cell, const char* field, std::size_t line) {
    long v = 0;
    if (!csv::parse_long(cell, v)) throw_parse(line, field, "not an integer: '" + cell + "'");
    if (v < 0) throw_parse(line, field, "negative count");
    return v;
}

inline void validate(const ShiftRecord& r) {
    const std::size_t line = r.source_line;
    if (!(r.duration_s > 0.0)) throw_validation(line, "duration_s must be positive");

    std::set<std::string> seen;
    for (const auto& id : r.home_skaters)
        if (!seen.insert(id).second)
            throw_validation(line, "duplicate skater '" + id + "'");
    for (const auto& id : r.away_skaters) {
        if (!seen.insert(id).second)
            throw_validation(line, "duplicate skater '" + id + "' (appears on both teams or twice)");
    }

    const auto nh = r.home_skaters.size();
    const auto na = r.away_skaters.size();
    switch (r.strength) {
        case Strength::EV:
            if (nh != na) throw_validation(line, "strength EV requires equal skater counts");
            break;
        case Strength::PP_HOME:
            if (nh <= na) throw_validation(line, "strength PP_HOME requires more home skaters");
            break;
        case Strength::PP_AWAY:
            if (na <= nh) throw_validation(line, "strength PP_AWAY requires more away skaters");
            break;
    }

    if (r.events_home.goals > r.events_home.shots_on_goal)
        throw_validation(line, "h_goals exceeds h_sog (a goal is a shot on goal)");
    if (r.events_away.goals > r.events_away.shots_on_goal)
        throw_validation(line, "a_goals exceeds a_sog (a goal is a shot on goal)");
}

}  // namespace detail

/// Parses a shift-log CSV stream. The exact header line is required; rows are
/// validated as they are read and errors carry the 1-based source line.
inline std::vector<ShiftRecord> parse_shift_log(std::istream& in) {
    std::string line;
    if (!csv::getline(in, line))
        throw Error(ErrorKind::Parse, "line 1: missing header");
    if (line != kCsvHeader)
        throw Error(ErrorKind::Parse, "line 1: header does not match shift-log schema");

    std::vector<ShiftRecord> records;
    std::size_t lineno = 1;
    while (csv::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> f = csv::split(line, ',');
        if (f.size() != 17)
            throw Error(ErrorKind::Parse, "line " + std::to_string(lineno) +
                                              ": expected 17 fields, got " +
                                              std::to_string(f.size()));
        ShiftRecord r;
        r.source_line = lineno;
        r.season = f[0];
        r.game_id = f[1];
        if (!csv::parse_double(f[2], r.duration_s))
            throw_parse(lineno, "duration_s", "not a number: '" + f[2] + "'");
        r.strength = detail::parse_strength(f[3], lineno);
        r.zone_start = detail::parse_zone_start(f[4], lineno);
        r.home_skaters = detail::parse_skaters(f[5], "home_skaters", lineno);
        r.away_skaters = detail::parse_skaters(f[6], "away_skaters", lineno);
        if (!f[7].empty()) r.home_goalie = f[7];
        if (!f[8].empty()) r.away_goalie = f[8];
        r.events_home.goals = detail::parse_count(f[9], "h_goals", lineno);
        r.events_home.shots_on_goal = detail::parse_count(f[10], "h_sog", lineno);
        r.events_home.missed_shots = detail::parse_count(f[11], "h_miss", lineno);
        r.events_home.blocked_shots = detail::parse_count(f[12], "h_block", lineno);
        r.events_away.goals = detail::parse_count(f[13], "a_goals", lineno);
        r.events_away.shots_on_goal = detail::parse_count(f[14], "a_sog", lineno);
        r.events_away.missed_shots = detail::parse_count(f[15], "a_miss", lineno);
        r.events_away.blocked_shots = detail::parse_count(f[16], "a_block", lineno);
        detail::validate(r);
        records.push_back(std::move(r));
    }
    return records;
}

inline std::vector<ShiftRecord> parse_shift_log_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open shift log '" + path + "'");
    return parse_shift_log(in);
}

inline std::string format_record(const ShiftRecord& r) {
    std::vector<std::string> f;
    f.reserve(17);
    f.push_back(r.season);
    f.push_back(r.game_id);
    f.push_back(csv::fmt(r.duration_s));
    f.push_back(r.strength == Strength::EV        ? "EV"
                : r.strength == Strength::PP_HOME ? "PP_HOME"
                                                  : "PP_AWAY");
    switch (r.zone_start) {
        case ZoneStart::OFF_HOME: f.push_back("OFF_HOME"); break;
        case ZoneStart::DEF_HOME: f.push_back("DEF_HOME"); break;
        case ZoneStart::NEUTRAL: f.push_back("NEU"); break;
        case ZoneStart::NONE: f.push_back("NONE"); break;
    }
    f.push_back(csv::join(r.home_skaters, ';'));
    f.push_back(csv::join(r.away_skaters, ';'));
    f.push_back(r.home_goalie.value_or(""));
    f.push_back(r.away_goalie.value_or(""));
    for (const EventCounts* e : {&r.events_home, &r.events_away}) {
        f.push_back(std::to_string(e->goals));
        f.push_back(std::to_string(e->shots_on_goal));
        f.push_back(std::to_string(e->missed_shots));
        f.push_back(std::to_string(e->blocked_shots));
    }
    return csv::join(f, ',');
}

inline void write_shift_log(std::ostream& out, const std::vector<ShiftRecord>& records) {
    out << kCsvHeader << '\n';
    for (const auto& r : records) out << format_record(r) << '\n';
}

struct Partitioned {
    std::vector<ShiftRecord> ev;
    std::vector<ShiftRecord> st;
    std::size_t excluded_empty_net = 0;
};

/// Splits validated records into even-strength and special-teams streams.
/// Any record with a missing goalie (empty net) is excluded from both.
inline Partitioned partition(const std::vector<ShiftRecord>& records) {
    Partitioned out;
    for (const auto& r : records) {
        if (!r.home_goalie || !r.away_goalie) {
            ++out.excluded_empty_net;
            continue;
        }
        if (r.strength == Strength::EV)
            out.ev.push_back(r);
        else
            out.st.push_back(r);
    }
    return out;
}

/// Expands each record into its two weighted observations, home offense first.
inline std::vector<Observation> to_observations(const std::vector<ShiftRecord>& records,
                                                Stat stat) {
    std::vector<Observation> obs;
    obs.reserve(records.size() * 2);
    for (const auto& r : records) {
        Observation home, away;
        home.weight = away.weight = r.duration_s;

        home.offense_players = r.home_skaters;
        home.defense_players = r.away_skaters;
        home.defending_goalie = r.away_goalie;
        home.response = 3600.0 * static_cast<double>(r.events_home.count(stat)) / r.duration_s;

        away.offense_players = r.away_skaters;
        away.defense_players = r.home_skaters;
        away.defending_goalie = r.home_goalie;
        away.response = 3600.0 * static_cast<double>(r.events_away.count(stat)) / r.duration_s;

        // The faceoff zone flips perspective for the away-offense row.
        switch (r.zone_start) {
            case ZoneStart::OFF_HOME:
                home.zone = Zone::OFF;
                away.zone = Zone::DEF;
                break;
            case ZoneStart::DEF_HOME:
                home.zone = Zone::DEF;
                away.zone = Zone::OFF;
                break;
            case ZoneStart::NEUTRAL:
            case ZoneStart::NONE:
                home.zone = away.zone = Zone::NEUTRAL;
                break;
        }
        switch (r.strength) {
            case Strength::EV:
                home.strength_role = away.strength_role = StrengthRole::EV;
                break;
            case Strength::PP_HOME:
                home.strength_role = StrengthRole::PP_OFFENSE;
                away.strength_role = StrengthRole::SH_OFFENSE;
                break;
            case Strength::PP_AWAY:
                home.strength_role = StrengthRole::SH_OFFENSE;
                away.strength_role = StrengthRole::PP_OFFENSE;
                break;
        }
        obs.push_back(std::move(home));
        obs.push_back(std::move(away));
    }
    return obs;
}

/// Per-player seconds on ice split by the player's team situation.
struct PlayerToi {
    double ev_s = 0.0;
    double pp_s = 0.0;   // team has the man advantage
    double sh_s = 0.0;   // team is shorthanded

    PlayerToi& operator+=(const PlayerToi& o) {
        ev_s += o.ev_s;
        pp_s += o.pp_s;
        sh_s += o.sh_s;
        return *this;
    }
};

struct ShiftSummary {
    std::size_t ev_count = 0;
    std::size_t st_count = 0;
    std::size_t excluded_count = 0;
    double ev_mean_duration_s = 0.0;
    double st_mean_duration_s = 0.0;
    double ev_total_s = 0.0;
    double st_total_s = 0.0;

    // player -> season -> seconds, plus totals over all seasons.
    std::map<std::string, std::map<std::string, PlayerToi>> player_season_toi;
    std::map<std::string, PlayerToi> player_toi;

    static constexpr double kBinWidthS = 5.0;
    static constexpr std::size_t kBins = 41;  // last bin collects 200s and longer
    std::vector<long> ev_duration_bins = std::vector<long>(kBins, 0);
    std::vector<long> st_duration_bins = std::vector<long>(kBins, 0);
};

inline ShiftSummary summarize_shifts(const std::vector<ShiftRecord>& records) {
    ShiftSummary s;
    Partitioned parts = partition(records);
    s.excluded_count = parts.excluded_empty_net;
    s.ev_count = parts.ev.size();
    s.st_count = parts.st.size();

    auto bin_of = [](double d) {
        auto b = static_cast<std::size_t>(d / ShiftSummary::kBinWidthS);
        return std::min(b, ShiftSummary::kBins - 1);
    };

    auto credit = [&s](const ShiftRecord& r) {
        PlayerToi home, away;
        switch (r.strength) {
            case Strength::EV: home.ev_s = away.ev_s = r.duration_s; break;
            case Strength::PP_HOME:
                home.pp_s = r.duration_s;
                away.sh_s = r.duration_s;
                break;
            case Strength::PP_AWAY:
                home.sh_s = r.duration_s;
                away.pp_s = r.duration_s;
                break;
        }
        for (const auto& id : r.home_skaters) {
            s.player_season_toi[id][r.season] += home;
            s.player_toi[id] += home;
        }
        for (const auto& id : r.away_skaters) {
            s.player_season_toi[id][r.season] += away;
            s.player_toi[id] += away;
        }
    };

    for (const auto& r : parts.ev) {
        s.ev_total_s += r.duration_s;
        ++s.ev_duration_bins[bin_of(r.duration_s)];
        credit(r);
    }
    for (const auto& r : parts.st) {
        s.st_total_s += r.duration_s;
        ++s.st_duration_bins[bin_of(r.duration_s)];
        credit(r);
    }
    if (s.ev_count) s.ev_mean_duration_s = s.ev_total_s / static_cast<double>(s.ev_count);
    if (s.st_count) s.st_mean_duration_s = s.st_total_s / static_cast<double>(s.st_count);
    return s;
}

/// Keeps only records whose season is in `seasons` (empty means keep all).
inline std::vector<ShiftRecord> filter_seasons(const std::vector<ShiftRecord>& records,
                                               const std::set<std::string>& seasons) {
    if (seasons.empty()) return records;
    std::vector<ShiftRecord> out;
    for (const auto& r : records)
        if (seasons.count(r.season)) out.push_back(r);
    return out;
}

inline std::set<std::string> distinct_seasons(const std::vector<ShiftRecord>& records) {
    std::set<std::string> s;
    for (const auto& r : records) s.insert(r.season);
    return s;
}

}  // namespace apm::shiftlog
