#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "apm/design.hpp"
#include "apm/shiftlog.hpp"

using namespace apm;
using namespace apm::design;
using shiftlog::Observation;
using shiftlog::ShiftRecord;
using shiftlog::Stat;
using shiftlog::StrengthRole;
using shiftlog::Zone;

namespace {

ShiftRecord two_line_shift(double dur, shiftlog::Strength strength = shiftlog::Strength::EV,
                           shiftlog::ZoneStart zone = shiftlog::ZoneStart::NONE) {
    ShiftRecord r;
    r.season = "2007";
    r.game_id = "g";
    r.duration_s = dur;
    r.strength = strength;
    r.zone_start = zone;
    int nh = 5, na = 5;
    if (strength == shiftlog::Strength::PP_HOME) na = 4;
    if (strength == shiftlog::Strength::PP_AWAY) nh = 4;
    for (int i = 1; i <= nh; ++i) r.home_skaters.push_back("p0" + std::to_string(i));
    for (int i = 0; i < na; ++i) r.away_skaters.push_back("p0" + std::to_string(6 + i));
    r.home_goalie = "gh";
    r.away_goalie = "ga";
    return r;
}

std::vector<Observation> tiny_ev_obs(Stat stat, int skaters = 2) {
    // One 1vs1-style observation pair between `skaters` distinct players.
    ShiftRecord r;
    r.season = "2007";
    r.game_id = "g";
    r.duration_s = 60.0;
    r.strength = shiftlog::Strength::EV;
    r.zone_start = shiftlog::ZoneStart::NONE;
    r.home_skaters = {"a"};
    r.away_skaters = {"b"};
    if (skaters > 2) r.home_skaters.push_back("c");
    if (skaters > 2) r.away_skaters.push_back("d");
    r.home_goalie = "gh";
    r.away_goalie = "ga";
    return to_observations({r}, stat);
}

}  // namespace

TEST_CASE("catalog: EV partition with 2 skaters and shots has 7 columns") {
    auto cat = build_catalog(tiny_ev_obs(Stat::SHOTS), Stat::SHOTS, PartitionKind::EV);
    CHECK(cat.size() == 7);  // intercept + 2 zones + 2 skaters x {off, def}
    CHECK(cat.entries[0].kind == ColumnKind::INTERCEPT);
    CHECK_FALSE(cat.entries[0].penalized);
    CHECK(cat.entries[1].kind == ColumnKind::ZONE_OFF);
    CHECK(cat.entries[2].kind == ColumnKind::ZONE_DEF);
    CHECK(cat.entries[3].kind == ColumnKind::SKATER_OFF);
    CHECK(*cat.entries[3].player_id == "a");
    CHECK(cat.entries[4].kind == ColumnKind::SKATER_DEF);
    for (std::size_t i = 1; i < cat.size(); ++i) CHECK(cat.entries[i].penalized);
}

TEST_CASE("catalog: goalie defense columns exist only for the goals models") {
    auto obs = tiny_ev_obs(Stat::GOALS);
    auto goals = build_catalog(obs, Stat::GOALS, PartitionKind::EV);
    CHECK(goals.size() == 9);  // 7 + 2 goalies
    CHECK(goals.find(ColumnKind::GOALIE_DEF, "ga").has_value());
    auto shots = build_catalog(obs, Stat::SHOTS, PartitionKind::EV);
    CHECK(shots.size() == 7);
    CHECK_FALSE(shots.find(ColumnKind::GOALIE_DEF, "ga").has_value());
}

TEST_CASE("catalog: special teams carry four role columns per skater") {
    ShiftRecord r = two_line_shift(30.0, shiftlog::Strength::PP_HOME);
    r.home_skaters = {"a", "x"};
    r.away_skaters = {"b"};
    auto cat = build_catalog(to_observations({r}, Stat::SHOTS), Stat::SHOTS, PartitionKind::ST);
    CHECK(cat.size() == 3 + 4 * 3);  // three distinct skaters
    for (const char* id : {"a", "b", "x"}) {
        CHECK(cat.find(ColumnKind::SKATER_PP_OFF, id).has_value());
        CHECK(cat.find(ColumnKind::SKATER_PP_DEF, id).has_value());
        CHECK(cat.find(ColumnKind::SKATER_SH_OFF, id).has_value());
        CHECK(cat.find(ColumnKind::SKATER_SH_DEF, id).has_value());
    }

    Observation o;
    o.weight = 30.0;
    o.response = 0.0;
    o.offense_players = {"a"};
    o.defense_players = {"x"};
    o.strength_role = StrengthRole::PP_OFFENSE;
    auto two = build_catalog({o}, Stat::SHOTS, PartitionKind::ST);
    CHECK(two.size() == 3 + 4 * 2);
}

TEST_CASE("catalog: empty observation list is an error") {
    CHECK_THROWS_AS(build_catalog({}, Stat::GOALS, PartitionKind::EV), Error);
}

TEST_CASE("assemble: the worked two-row example produces the indicator pattern") {
    ShiftRecord r = two_line_shift(45.0);
    r.home_goalie.reset();
    r.away_goalie.reset();
    r.events_home.goals = 1;
    r.events_home.shots_on_goal = 1;
    auto obs = to_observations({r}, Stat::GOALS);
    auto cat = build_catalog(obs, Stat::GOALS, PartitionKind::EV);
    CHECK(cat.size() == 2 * 10 + 3);  // no goalies in this catalog
    auto prob = assemble(obs, cat);
    REQUIRE(prob.n_rows == 2);
    CHECK(prob.response[0] == 3600.0 / 45.0);
    CHECK(prob.response[1] == 0.0);
    CHECK(prob.weights[0] == 45.0);

    // Row 0: home offense. Offense columns for p01..p05, defense for p06..p10.
    std::set<std::int32_t> row0(prob.row_begin(0), prob.row_end(0));
    CHECK(row0.count(ColumnCatalog::kIntercept) == 1);
    for (const auto& id : r.home_skaters) {
        CHECK(row0.count(cat.require(ColumnKind::SKATER_OFF, id)) == 1);
        CHECK(row0.count(cat.require(ColumnKind::SKATER_DEF, id)) == 0);
    }
    for (const auto& id : r.away_skaters) {
        CHECK(row0.count(cat.require(ColumnKind::SKATER_DEF, id)) == 1);
        CHECK(row0.count(cat.require(ColumnKind::SKATER_OFF, id)) == 0);
    }
    // Row 1 mirrors it.
    std::set<std::int32_t> row1(prob.row_begin(1), prob.row_end(1));
    for (const auto& id : r.away_skaters)
        CHECK(row1.count(cat.require(ColumnKind::SKATER_OFF, id)) == 1);
    CHECK(prob.row_nnz(0) == 11);  // intercept + 10 skaters, no zone, no goalie
}

TEST_CASE("assemble: zone indicators and goalie column per row") {
    ShiftRecord r = two_line_shift(60.0, shiftlog::Strength::EV, shiftlog::ZoneStart::OFF_HOME);
    auto obs = to_observations({r}, Stat::GOALS);
    auto cat = build_catalog(obs, Stat::GOALS, PartitionKind::EV);
    auto prob = assemble(obs, cat);
    std::set<std::int32_t> row0(prob.row_begin(0), prob.row_end(0));
    std::set<std::int32_t> row1(prob.row_begin(1), prob.row_end(1));
    CHECK(row0.count(ColumnCatalog::kZoneOff) == 1);
    CHECK(row0.count(ColumnCatalog::kZoneDef) == 0);
    CHECK(row1.count(ColumnCatalog::kZoneDef) == 1);
    CHECK(row0.count(cat.require(ColumnKind::GOALIE_DEF, "ga")) == 1);
    CHECK(row1.count(cat.require(ColumnKind::GOALIE_DEF, "gh")) == 1);
    // 5v5 with goalies and a zone start: 13 nonzeros for goals.
    CHECK(prob.row_nnz(0) == 13);

    auto neutral = two_line_shift(60.0);
    auto prob2 = assemble(to_observations({neutral}, Stat::SHOTS),
                          build_catalog(to_observations({neutral}, Stat::SHOTS), Stat::SHOTS,
                                        PartitionKind::EV));
    std::set<std::int32_t> nrow(prob2.row_begin(0), prob2.row_end(0));
    CHECK(nrow.count(ColumnCatalog::kZoneOff) == 0);
    CHECK(nrow.count(ColumnCatalog::kZoneDef) == 0);
    CHECK(prob2.row_nnz(0) == 11);  // 12 minus the goalie column
}

TEST_CASE("assemble: three shifts give six rows") {
    std::vector<ShiftRecord> recs = {two_line_shift(30), two_line_shift(40), two_line_shift(50)};
    auto obs = to_observations(recs, Stat::SHOTS);
    auto prob = assemble(obs, build_catalog(obs, Stat::SHOTS, PartitionKind::EV));
    CHECK(prob.n_rows == 6);
}

TEST_CASE("assemble: unknown player is an error naming the player") {
    auto obs = tiny_ev_obs(Stat::SHOTS);
    auto cat = build_catalog(obs, Stat::SHOTS, PartitionKind::EV);
    Observation alien = obs[0];
    alien.offense_players = {"zz"};
    try {
        assemble({alien}, cat);
        FAIL("expected error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("zz") != std::string::npos);
    }
}

TEST_CASE("assemble: special-teams roles map to the advantaged side's columns") {
    ShiftRecord r = two_line_shift(30.0, shiftlog::Strength::PP_HOME);
    auto obs = to_observations({r}, Stat::SHOTS);
    auto cat = build_catalog(obs, Stat::SHOTS, PartitionKind::ST);
    auto prob = assemble(obs, cat);
    std::set<std::int32_t> row0(prob.row_begin(0), prob.row_end(0));
    std::set<std::int32_t> row1(prob.row_begin(1), prob.row_end(1));
    for (const auto& id : r.home_skaters) {
        CHECK(row0.count(cat.require(ColumnKind::SKATER_PP_OFF, id)) == 1);
        CHECK(row1.count(cat.require(ColumnKind::SKATER_PP_DEF, id)) == 1);
    }
    for (const auto& id : r.away_skaters) {
        CHECK(row0.count(cat.require(ColumnKind::SKATER_SH_DEF, id)) == 1);
        CHECK(row1.count(cat.require(ColumnKind::SKATER_SH_OFF, id)) == 1);
    }
}

TEST_CASE("standardize: an always-on column keeps scale 1") {
    auto obs = tiny_ev_obs(Stat::SHOTS);
    auto cat = build_catalog(obs, Stat::SHOTS, PartitionKind::EV);
    auto prob = standardize(assemble(obs, cat));
    CHECK(prob.scales[ColumnCatalog::kIntercept] == 1.0);
}

TEST_CASE("standardize: single appearance holding half the weight gives sqrt(0.5)") {
    Observation on, off;
    on.weight = 50.0;
    on.response = 1.0;
    on.offense_players = {"a"};
    on.defense_players = {"b"};
    off.weight = 50.0;
    off.response = 0.0;
    off.offense_players = {"b"};
    off.defense_players = {"a"};
    auto cat = build_catalog({on, off}, Stat::SHOTS, PartitionKind::EV);
    auto prob = standardize(assemble({on, off}, cat));
    auto col = cat.require(ColumnKind::SKATER_OFF, "a");
    CHECK(prob.scales[col] == Catch::Approx(std::sqrt(0.5)).epsilon(1e-14));
}

TEST_CASE("standardize: never-appearing column is degenerate, and scales are idempotent") {
    auto obs = tiny_ev_obs(Stat::SHOTS);
    auto cat = build_catalog(obs, Stat::SHOTS, PartitionKind::EV);
    cat.entries.push_back({ColumnKind::SKATER_OFF, "ghost", true});
    cat.rebuild_index();
    auto prob = standardize(assemble(obs, cat));
    auto ghost = cat.require(ColumnKind::SKATER_OFF, "ghost");
    CHECK(prob.scales[ghost] == 0.0);
    CHECK(prob.degenerate(ghost));

    auto twice = standardize(prob);
    CHECK(twice.scales == prob.scales);
}

TEST_CASE("rows reconstruct their observation's rosters and zone exactly") {
    std::vector<ShiftRecord> recs = {
        two_line_shift(31, shiftlog::Strength::EV, shiftlog::ZoneStart::OFF_HOME),
        two_line_shift(44, shiftlog::Strength::EV, shiftlog::ZoneStart::DEF_HOME),
        two_line_shift(52, shiftlog::Strength::EV, shiftlog::ZoneStart::NEUTRAL)};
    auto obs = to_observations(recs, Stat::GOALS);
    auto cat = build_catalog(obs, Stat::GOALS, PartitionKind::EV);
    auto prob = assemble(obs, cat);
    for (std::size_t i = 0; i < prob.n_rows; ++i) {
        std::set<std::string> off, def;
        bool zone_off = false, zone_def = false;
        for (const auto* c = prob.row_begin(i); c != prob.row_end(i); ++c) {
            const auto& e = cat.entries[static_cast<std::size_t>(*c)];
            if (e.kind == ColumnKind::SKATER_OFF) off.insert(*e.player_id);
            if (e.kind == ColumnKind::SKATER_DEF) def.insert(*e.player_id);
            if (e.kind == ColumnKind::ZONE_OFF) zone_off = true;
            if (e.kind == ColumnKind::ZONE_DEF) zone_def = true;
        }
        const auto& o = obs[i];
        CHECK(off == std::set<std::string>(o.offense_players.begin(), o.offense_players.end()));
        CHECK(def == std::set<std::string>(o.defense_players.begin(), o.defense_players.end()));
        CHECK(zone_off == (o.zone == Zone::OFF));
        CHECK(zone_def == (o.zone == Zone::DEF));
    }
}

TEST_CASE("weighted offense column sums equal offensive hours") {
    std::vector<ShiftRecord> recs = {two_line_shift(30), two_line_shift(90)};
    auto obs = to_observations(recs, Stat::SHOTS);
    auto cat = build_catalog(obs, Stat::SHOTS, PartitionKind::EV);
    auto prob = assemble(obs, cat);
    auto col = cat.require(ColumnKind::SKATER_OFF, "p01");
    double colsum = 0.0;
    for (std::size_t i = 0; i < prob.n_rows; ++i)
        for (const auto* c = prob.row_begin(i); c != prob.row_end(i); ++c)
            if (*c == col) colsum += prob.weights[static_cast<Eigen::Index>(i)];
    // p01 attacks in one row of each shift: 120 offensive seconds.
    CHECK(colsum / 3600.0 == Catch::Approx(120.0 / 3600.0));
}
