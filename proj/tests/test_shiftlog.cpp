#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "apm/rng.hpp"
#include "apm/shiftlog.hpp"

using namespace apm;
using namespace apm::shiftlog;

namespace {

ShiftRecord make_record(double dur, Strength strength = Strength::EV,
                        ZoneStart zone = ZoneStart::NONE) {
    ShiftRecord r;
    r.season = "2007";
    r.game_id = "g1";
    r.duration_s = dur;
    r.strength = strength;
    r.zone_start = zone;
    int nh = 5, na = 5;
    if (strength == Strength::PP_HOME) na = 4;
    if (strength == Strength::PP_AWAY) nh = 4;
    for (int i = 0; i < nh; ++i) r.home_skaters.push_back("h" + std::to_string(i));
    for (int i = 0; i < na; ++i) r.away_skaters.push_back("a" + std::to_string(i));
    r.home_goalie = "hg";
    r.away_goalie = "ag";
    return r;
}

}  // namespace

TEST_CASE("parse: header-only file yields an empty list") {
    std::istringstream in(std::string(kCsvHeader) + "\n");
    CHECK(parse_shift_log(in).empty());
}

TEST_CASE("parse: one valid EV row maps fields directly") {
    std::istringstream in(std::string(kCsvHeader) +
                          "\n2007,g42,45,EV,OFF_HOME,p1;p2;p3;p4;p5,p6;p7;p8;p9;p10,hg,ag,"
                          "1,3,0,1,0,2,1,0\n");
    auto recs = parse_shift_log(in);
    REQUIRE(recs.size() == 1);
    const auto& r = recs[0];
    CHECK(r.season == "2007");
    CHECK(r.game_id == "g42");
    CHECK(r.duration_s == 45.0);
    CHECK(r.strength == Strength::EV);
    CHECK(r.zone_start == ZoneStart::OFF_HOME);
    CHECK(r.home_skaters == std::vector<std::string>{"p1", "p2", "p3", "p4", "p5"});
    CHECK(r.away_skaters.size() == 5);
    REQUIRE(r.home_goalie.has_value());
    CHECK(*r.home_goalie == "hg");
    CHECK(r.events_home.goals == 1);
    CHECK(r.events_home.shots_on_goal == 3);
    CHECK(r.events_away.missed_shots == 1);
    CHECK(r.source_line == 2);
}

TEST_CASE("parse: same player on both teams is rejected with player and line") {
    std::istringstream in(std::string(kCsvHeader) +
                          "\n2007,g1,30,EV,NONE,p1;p2;p3;p4;p5,p5;p6;p7;p8;p9,hg,ag,"
                          "0,0,0,0,0,0,0,0\n");
    try {
        parse_shift_log(in);
        FAIL("expected validation error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Validation);
        CHECK(std::string(e.what()).find("p5") != std::string::npos);
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("parse: non-positive duration is a validation error") {
    std::istringstream in(std::string(kCsvHeader) +
                          "\n2007,g1,0,EV,NONE,p1;p2;p3;p4;p5,p6;p7;p8;p9;p10,hg,ag,"
                          "0,0,0,0,0,0,0,0\n");
    CHECK_THROWS_AS(parse_shift_log(in), Error);
}

TEST_CASE("parse: malformed field names the line and field") {
    std::istringstream in(std::string(kCsvHeader) +
                          "\n2007,g1,abc,EV,NONE,p1;p2;p3;p4;p5,p6;p7;p8;p9;p10,hg,ag,"
                          "0,0,0,0,0,0,0,0\n");
    try {
        parse_shift_log(in);
        FAIL("expected parse error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Parse);
        CHECK(std::string(e.what()).find("duration_s") != std::string::npos);
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("parse: wrong field count and bad header are parse errors") {
    std::istringstream a(std::string(kCsvHeader) + "\n2007,g1,45\n");
    CHECK_THROWS_AS(parse_shift_log(a), Error);
    std::istringstream b("season,game_id\n");
    CHECK_THROWS_AS(parse_shift_log(b), Error);
}

TEST_CASE("parse: goals exceeding shots on goal is rejected") {
    std::istringstream in(std::string(kCsvHeader) +
                          "\n2007,g1,30,EV,NONE,p1;p2;p3;p4;p5,p6;p7;p8;p9;p10,hg,ag,"
                          "2,1,0,0,0,0,0,0\n");
    CHECK_THROWS_AS(parse_shift_log(in), Error);
}

TEST_CASE("parse: strength must match skater counts") {
    std::istringstream in(std::string(kCsvHeader) +
                          "\n2007,g1,30,PP_HOME,NONE,p1;p2;p3;p4;p5,p6;p7;p8;p9;p10,hg,ag,"
                          "0,0,0,0,0,0,0,0\n");
    CHECK_THROWS_AS(parse_shift_log(in), Error);
}

TEST_CASE("partition: EV shift with both goalies goes to the EV stream") {
    auto p = partition({make_record(30.0)});
    CHECK(p.ev.size() == 1);
    CHECK(p.st.empty());
    CHECK(p.excluded_empty_net == 0);
}

TEST_CASE("partition: missing goalie excludes the shift from both streams") {
    auto r = make_record(30.0, Strength::PP_HOME);
    r.away_goalie.reset();
    auto p = partition({r});
    CHECK(p.ev.empty());
    CHECK(p.st.empty());
    CHECK(p.excluded_empty_net == 1);
}

TEST_CASE("partition: mixed list splits by strength") {
    std::vector<ShiftRecord> recs;
    for (int i = 0; i < 3; ++i) recs.push_back(make_record(30.0));
    for (int i = 0; i < 2; ++i) recs.push_back(make_record(30.0, Strength::PP_AWAY));
    auto p = partition(recs);
    CHECK(p.ev.size() == 3);
    CHECK(p.st.size() == 2);
}

TEST_CASE("to_observations: home goal in a 60s shift gives response 60") {
    auto r = make_record(60.0, Strength::EV, ZoneStart::OFF_HOME);
    r.events_home.goals = 1;
    r.events_home.shots_on_goal = 1;
    auto obs = to_observations({r}, Stat::GOALS);
    REQUIRE(obs.size() == 2);
    CHECK(obs[0].response == 60.0);
    CHECK(obs[0].offense_players == r.home_skaters);
    CHECK(obs[0].defense_players == r.away_skaters);
    CHECK(obs[0].zone == Zone::OFF);
    CHECK(*obs[0].defending_goalie == "ag");
    CHECK(obs[1].response == 0.0);
    CHECK(obs[1].offense_players == r.away_skaters);
    CHECK(obs[1].zone == Zone::DEF);
    CHECK(*obs[1].defending_goalie == "hg");
}

TEST_CASE("to_observations: zero events give zero responses with the shift weight") {
    auto obs = to_observations({make_record(37.0)}, Stat::CORSI);
    REQUIRE(obs.size() == 2);
    CHECK(obs[0].response == 0.0);
    CHECK(obs[1].response == 0.0);
    CHECK(obs[0].weight == 37.0);
    CHECK(obs[1].weight == 37.0);
}

TEST_CASE("to_observations: away Corsi events in a 120s shift") {
    auto r = make_record(120.0);
    r.events_away.shots_on_goal = 2;
    r.events_away.missed_shots = 1;
    r.events_away.blocked_shots = 1;
    auto obs = to_observations({r}, Stat::CORSI);
    CHECK(obs[1].response == 4.0 / 120.0 * 3600.0);  // = 120 per 60
    CHECK(obs[1].response == 120.0);
}

TEST_CASE("to_observations: special teams roles flip with the advantaged side") {
    auto pp_away = make_record(30.0, Strength::PP_AWAY);
    auto obs = to_observations({pp_away}, Stat::SHOTS);
    CHECK(obs[0].strength_role == StrengthRole::SH_OFFENSE);
    CHECK(obs[1].strength_role == StrengthRole::PP_OFFENSE);
}

TEST_CASE("observations: responses recover integer event counts to 1 ulp") {
    std::mt19937_64 eng(make_engine(20240901, 1));
    std::uniform_int_distribution<int> dur(1, 200);
    std::uniform_int_distribution<long> cnt(0, 12);
    for (int trial = 0; trial < 2000; ++trial) {
        double t = static_cast<double>(dur(eng));
        long k = cnt(eng);
        double response = 3600.0 * static_cast<double>(k) / t;
        double back = response * t / 3600.0;
        double kd = static_cast<double>(k);
        double ulp = std::nextafter(kd, std::numeric_limits<double>::infinity()) - kd;
        if (k == 0)
            CHECK(back == 0.0);
        else
            CHECK(std::abs(back - kd) <= ulp);
    }
}

TEST_CASE("observations: the two rows of a shift conserve event totals and weight") {
    std::mt19937_64 eng(make_engine(20240901, 2));
    std::uniform_int_distribution<int> dur(5, 90);
    std::uniform_int_distribution<long> cnt(0, 5);
    std::vector<ShiftRecord> recs;
    for (int i = 0; i < 200; ++i) {
        auto r = make_record(static_cast<double>(dur(eng)));
        r.events_home.shots_on_goal = cnt(eng);
        r.events_home.goals = std::min(r.events_home.shots_on_goal, cnt(eng));
        r.events_home.missed_shots = cnt(eng);
        r.events_home.blocked_shots = cnt(eng);
        r.events_away.shots_on_goal = cnt(eng);
        r.events_away.goals = std::min(r.events_away.shots_on_goal, cnt(eng));
        r.events_away.missed_shots = cnt(eng);
        r.events_away.blocked_shots = cnt(eng);
        recs.push_back(r);
    }
    for (Stat stat : {Stat::GOALS, Stat::SHOTS, Stat::FENWICK, Stat::CORSI}) {
        auto obs = to_observations(recs, stat);
        REQUIRE(obs.size() == 2 * recs.size());
        double weight_sum = 0.0, duration_sum = 0.0;
        for (std::size_t i = 0; i < recs.size(); ++i) {
            long total = recs[i].events_home.count(stat) + recs[i].events_away.count(stat);
            double got = (obs[2 * i].response + obs[2 * i + 1].response) *
                         recs[i].duration_s / 3600.0;
            CHECK(std::llround(got) == total);
            weight_sum += obs[2 * i].weight + obs[2 * i + 1].weight;
            duration_sum += recs[i].duration_s;
        }
        CHECK(weight_sum == 2.0 * duration_sum);  // integer-second durations: exact
    }
}

TEST_CASE("summarize: means, per-player ice time, and histogram") {
    auto a = make_record(30.0);
    auto b = make_record(50.0);
    auto st = make_record(40.0, Strength::PP_HOME);
    auto s = summarize_shifts({a, b, st});
    CHECK(s.ev_mean_duration_s == 40.0);
    CHECK(s.st_mean_duration_s == 40.0);
    CHECK(s.ev_count == 2);
    CHECK(s.st_count == 1);
    // h0 skated all three shifts: 80 EV seconds plus 40 PP seconds.
    CHECK(s.player_toi.at("h0").ev_s == 80.0);
    CHECK(s.player_toi.at("h0").pp_s == 40.0);
    CHECK(s.player_toi.at("a0").sh_s == 40.0);
    CHECK(s.player_season_toi.at("h0").at("2007").ev_s == 80.0);
    // 30s and 50s land in bins 6 and 10.
    CHECK(s.ev_duration_bins[6] == 1);
    CHECK(s.ev_duration_bins[10] == 1);
}

TEST_CASE("round trip: format_record then parse reproduces the record") {
    auto r = make_record(47.0, Strength::PP_HOME, ZoneStart::DEF_HOME);
    r.events_away.shots_on_goal = 2;
    r.events_away.goals = 1;
    std::ostringstream out;
    write_shift_log(out, {r});
    std::istringstream in(out.str());
    auto back = parse_shift_log(in);
    REQUIRE(back.size() == 1);
    CHECK(back[0].duration_s == r.duration_s);
    CHECK(back[0].strength == r.strength);
    CHECK(back[0].zone_start == r.zone_start);
    CHECK(back[0].home_skaters == r.home_skaters);
    CHECK(back[0].events_away.goals == 1);
}
