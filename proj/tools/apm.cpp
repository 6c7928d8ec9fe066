// apm: adjusted plus-minus ratings from hockey shift logs.
//
// Subcommands: fit, report, trace, correlate, simulate, summarize.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "apm/csv.hpp"
#include "apm/design.hpp"
#include "apm/errors.hpp"
#include "apm/lambda_select.hpp"
#include "apm/rating.hpp"
#include "apm/report.hpp"
#include "apm/shiftlog.hpp"
#include "apm/simgen.hpp"
#include "apm/solver.hpp"
#include "json.hpp"

namespace {

using apm::Error;
using apm::ErrorKind;
using apm::design::PartitionKind;
using apm::shiftlog::Stat;

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Config: return 2;
        case ErrorKind::Parse: return 3;
        case ErrorKind::Validation: return 3;
        case ErrorKind::Numeric: return 4;
        case ErrorKind::Io: return 5;
    }
    return 1;
}

std::vector<Stat> parse_stats(const std::string& s) {
    if (s == "all") return {Stat::GOALS, Stat::SHOTS, Stat::FENWICK, Stat::CORSI};
    if (s == "goals") return {Stat::GOALS};
    if (s == "shots") return {Stat::SHOTS};
    if (s == "fenwick") return {Stat::FENWICK};
    if (s == "corsi") return {Stat::CORSI};
    throw Error(ErrorKind::Config, "unknown stat '" + s + "' (goals|shots|fenwick|corsi|all)");
}

std::vector<PartitionKind> parse_partitions(const std::string& s) {
    if (s == "all") return {PartitionKind::EV, PartitionKind::ST};
    if (s == "ev") return {PartitionKind::EV};
    if (s == "st") return {PartitionKind::ST};
    throw Error(ErrorKind::Config, "unknown partition '" + s + "' (ev|st|all)");
}

std::optional<double> parse_lambda(const std::string& s) {
    if (s == "auto") return std::nullopt;
    double v = 0.0;
    if (!apm::csv::parse_double(s, v) || v < 0.0)
        throw Error(ErrorKind::Config, "--lambda expects 'auto' or a number >= 0");
    return v;
}

std::set<std::string> parse_seasons(const std::string& s) {
    std::set<std::string> out;
    if (s.empty()) return out;
    for (const auto& part : apm::csv::split(s, ','))
        if (!part.empty()) out.insert(part);
    return out;
}

struct ComponentSpec {
    PartitionKind partition;
    apm::design::ColumnKind kind;
    apm::rating::Strength3 strength;
};

ComponentSpec parse_component(const std::string& s) {
    using apm::design::ColumnKind;
    using apm::rating::Strength3;
    if (s == "ev_off") return {PartitionKind::EV, ColumnKind::SKATER_OFF, Strength3::EV};
    if (s == "ev_def") return {PartitionKind::EV, ColumnKind::SKATER_DEF, Strength3::EV};
    if (s == "pp_off") return {PartitionKind::ST, ColumnKind::SKATER_PP_OFF, Strength3::PP};
    if (s == "pp_def") return {PartitionKind::ST, ColumnKind::SKATER_PP_DEF, Strength3::PP};
    if (s == "sh_off") return {PartitionKind::ST, ColumnKind::SKATER_SH_OFF, Strength3::SH};
    if (s == "sh_def") return {PartitionKind::ST, ColumnKind::SKATER_SH_DEF, Strength3::SH};
    throw Error(ErrorKind::Config,
                "unknown component '" + s + "' (ev_off|ev_def|pp_off|pp_def|sh_off|sh_def)");
}

struct SelectionFlags {
    double grid_min = 1e-4, grid_max = 1e2;
    int grid_points = 25, probes = 20;
    double vif_ceiling = 10.0, stab_threshold = 0.02;

    void attach(CLI::App* cmd) {
        cmd->add_option("--grid-min", grid_min, "smallest lambda on the search grid");
        cmd->add_option("--grid-max", grid_max, "largest lambda on the search grid");
        cmd->add_option("--grid-points", grid_points, "number of grid points");
        cmd->add_option("--probes", probes, "Hutchinson probes per grid point");
        cmd->add_option("--vif-ceiling", vif_ceiling, "VIF threshold for the lambda floor");
        cmd->add_option("--stab-threshold", stab_threshold,
                        "relative movement threshold for stabilization");
    }

    apm::lambda_select::SelectionConfig to_config() const {
        apm::lambda_select::SelectionConfig c;
        c.grid_min = grid_min;
        c.grid_max = grid_max;
        c.grid_points = grid_points;
        c.probes = probes;
        c.vif_ceiling = vif_ceiling;
        c.stabilization_threshold = stab_threshold;
        return c;
    }
};

std::vector<apm::shiftlog::ShiftRecord> load_inputs(const std::vector<std::string>& inputs,
                                                    const std::string& seasons) {
    std::vector<apm::shiftlog::ShiftRecord> records;
    for (const auto& path : inputs) {
        auto part = apm::shiftlog::parse_shift_log_file(path);
        records.insert(records.end(), part.begin(), part.end());
    }
    return apm::shiftlog::filter_seasons(records, parse_seasons(seasons));
}

std::ofstream must_open(const std::string& dir, const std::string& name) {
    std::filesystem::create_directories(dir);
    std::ofstream out(dir + "/" + name);
    if (!out) throw Error(ErrorKind::Io, "cannot write '" + dir + "/" + name + "'");
    return out;
}

// ---- fit --------------------------------------------------------------------

int cmd_fit(const std::vector<std::string>& inputs, const std::string& stat,
            const std::string& partition, const std::string& lambda, const std::string& seasons,
            std::uint64_t seed, const std::string& out, const std::string& positions,
            bool dump_catalog, const SelectionFlags& sel) {
    apm::report::RunConfig config;
    config.inputs = inputs;
    config.seasons = parse_seasons(seasons);
    config.stats = parse_stats(stat);
    config.partitions = parse_partitions(partition);
    config.fixed_lambda = parse_lambda(lambda);
    config.seed = seed;
    config.out_dir = out;
    config.positions_path = positions;
    config.dump_catalog = dump_catalog;
    config.selection = sel.to_config();

    auto result = apm::report::run_fit(config);
    for (const auto& [key, model] : result.models) {
        const auto& lreport = result.lambda_reports.at(key);
        std::cout << "fit " << apm::shiftlog::stat_name(key.first) << '/'
                  << apm::report::partition_name(key.second)
                  << ": lambda=" << apm::csv::fmt(model.fit.lambda) << " ("
                  << lreport.policy << "), edf=" << apm::csv::fmt(model.fit.effective_df)
                  << ", rows=" << model.fit.n_rows << '\n';
        for (const auto& w : lreport.warnings) std::cout << "  warning: " << w << '\n';
    }
    if (!result.ratings.empty())
        std::cout << "ratings: " << result.ratings.size() << " players\n";
    else
        std::cout << "ratings: skipped (needs all four stats and both partitions)\n";
    std::cout << "wrote " << result.written_files.size() << " files to " << out << '\n';
    return 0;
}

// ---- report -----------------------------------------------------------------

int cmd_report(const std::string& ratings_path, const std::string& sort_key, std::size_t top_n,
               const std::string& position, bool centered, const std::string& out) {
    std::ifstream in(ratings_path);
    if (!in) throw Error(ErrorKind::Io, "cannot open ratings file '" + ratings_path + "'");
    nlohmann::json j;
    in >> j;
    auto ratings = apm::rating::ratings_from_json(j);
    if (centered)
        ratings = apm::rating::positional_view(std::move(ratings),
                                               apm::rating::ViewMode::POSITION_CENTERED);
    std::optional<char> pos_filter;
    if (position == "F" || position == "D")
        pos_filter = position[0];
    else if (position != "all")
        throw Error(ErrorKind::Config, "--position expects F, D or all");

    auto table = apm::report::leaderboard(ratings, sort_key, top_n, pos_filter);
    table.render(std::cout);
    if (!out.empty()) {
        auto file = must_open(out, "leaderboard.csv");
        table.write_csv(file);
        std::cout << "wrote " << out << "/leaderboard.csv\n";
    }
    return 0;
}

// ---- trace ------------------------------------------------------------------

int cmd_trace(const std::vector<std::string>& inputs, const std::string& stat_name,
              const std::string& component_name, const std::string& players_csv,
              const std::string& seasons, std::uint64_t seed, const std::string& out,
              const SelectionFlags& sel) {
    auto stats = parse_stats(stat_name);
    if (stats.size() != 1)
        throw Error(ErrorKind::Config, "trace works on a single stat");
    const Stat stat = stats.front();
    const ComponentSpec component = parse_component(component_name);

    auto records = load_inputs(inputs, seasons);
    auto parts = apm::shiftlog::partition(records);
    const auto& recs = component.partition == PartitionKind::EV ? parts.ev : parts.st;
    if (recs.empty()) throw Error(ErrorKind::Validation, "partition has no shifts");
    auto obs = apm::shiftlog::to_observations(recs, stat);
    auto catalog = apm::design::build_catalog(obs, stat, component.partition);
    auto problem = apm::design::standardize(apm::design::assemble(obs, catalog));

    auto selection = sel.to_config();
    selection.seed = seed;
    auto lreport = apm::lambda_select::select_lambda(problem, selection);

    std::vector<std::string> players;
    for (const auto& id : apm::csv::split(players_csv, ','))
        if (!id.empty()) players.push_back(id);

    auto curves = apm::report::trace_curve_report(catalog, lreport, players, component.kind);
    const std::string tag =
        std::string(apm::shiftlog::stat_name(stat)) + "_" + component_name;
    auto csv_out = must_open(out, "trace_" + tag + ".csv");
    curves.write_csv(csv_out);
    auto meta = must_open(out, "trace_" + tag + "_meta.json");
    nlohmann::json mj = curves.meta_json();
    mj["chosen_lambda"] = lreport.chosen;
    meta << mj.dump(2) << '\n';
    std::cout << "chosen lambda: " << apm::csv::fmt(lreport.chosen) << '\n'
              << "trace curves: " << curves.named.size() << " named, "
              << curves.most_positive.size() << " most-positive, "
              << curves.most_negative.size() << " most-negative players\n";
    return 0;
}

// ---- correlate ----------------------------------------------------------------

int cmd_correlate(const std::vector<std::string>& inputs, const std::string& stat,
                  const std::string& component_name, const std::string& lambda,
                  const std::string& seasons, std::uint64_t seed, const std::string& out,
                  double min_toi_ev, double min_toi_st, const SelectionFlags& sel) {
    const ComponentSpec component = parse_component(component_name);
    const double min_toi =
        component.strength == apm::rating::Strength3::EV ? min_toi_ev : min_toi_st;
    auto records = load_inputs(inputs, seasons);
    auto season_set = apm::shiftlog::distinct_seasons(records);
    if (season_set.size() < 2)
        throw Error(ErrorKind::Config, "need at least two seasons to correlate");
    auto fixed = parse_lambda(lambda);
    auto summary = apm::shiftlog::summarize_shifts(records);

    struct Estimator {
        std::string name;
        Stat stat;
        bool ols;
    };
    std::vector<Estimator> estimators;
    for (Stat s : parse_stats(stat))
        estimators.push_back({std::string("ridge_") + apm::shiftlog::stat_name(s), s, false});
    estimators.push_back({"ols_goals", Stat::GOALS, true});

    nlohmann::json out_json = nlohmann::json::object();
    auto csv_file = must_open(out, "correlations.csv");
    csv_file << "estimator,season_a,season_b,n,r\n";

    for (const auto& est : estimators) {
        std::vector<apm::report::SeasonEstimates> per_season;
        for (const auto& season : season_set) {
            auto season_records = apm::shiftlog::filter_seasons(records, {season});
            auto parts = apm::shiftlog::partition(season_records);
            const auto& recs = component.partition == PartitionKind::EV ? parts.ev : parts.st;
            if (recs.empty()) continue;
            auto obs = apm::shiftlog::to_observations(recs, est.stat);
            auto catalog = apm::design::build_catalog(obs, est.stat, component.partition);
            auto problem = apm::design::standardize(apm::design::assemble(obs, catalog));

            double lam;
            if (est.ols) {
                lam = 0.0;
            } else if (fixed) {
                lam = *fixed;
            } else {
                auto selection = sel.to_config();
                selection.seed = apm::derive_seed(seed, static_cast<std::uint64_t>(est.stat),
                                                  std::hash<std::string>{}(season));
                lam = apm::lambda_select::select_lambda(problem, selection).chosen;
            }
            apm::solver::RidgeFit fit;
            try {
                fit = apm::solver::solve_ridge(problem, lam);
            } catch (const Error&) {
                if (!est.ols) throw;
                fit = apm::solver::solve_ridge(problem, 1e-8);  // singular OLS fallback
            }

            apm::report::SeasonEstimates se;
            se.season = season;
            for (std::size_t k = 0; k < catalog.size(); ++k) {
                const auto& e = catalog.entries[k];
                if (e.kind != component.kind || !e.player_id) continue;
                if (std::isinf(fit.std_errors[static_cast<Eigen::Index>(k)])) continue;
                se.value[*e.player_id] = fit.coefficients[static_cast<Eigen::Index>(k)];
                auto toi_it = summary.player_season_toi.find(*e.player_id);
                if (toi_it != summary.player_season_toi.end()) {
                    auto st = toi_it->second.find(season);
                    if (st != toi_it->second.end()) {
                        const auto& t = st->second;
                        const double minutes =
                            (component.strength == apm::rating::Strength3::EV   ? t.ev_s
                             : component.strength == apm::rating::Strength3::PP ? t.pp_s
                                                                                : t.sh_s) /
                            60.0;
                        se.toi_minutes[*e.player_id] = minutes;
                    }
                }
            }
            per_season.push_back(std::move(se));
        }

        auto corr = apm::report::year_to_year_correlation(per_season, min_toi);
        nlohmann::json pairs = nlohmann::json::array();
        for (const auto& p : corr.pairs) {
            pairs.push_back({{"season_a", p.season_a},
                             {"season_b", p.season_b},
                             {"n", p.n},
                             {"r", std::isnan(p.r) ? nlohmann::json("undefined")
                                                   : nlohmann::json(p.r)}});
            csv_file << est.name << ',' << p.season_a << ',' << p.season_b << ',' << p.n << ','
                     << (std::isnan(p.r) ? "NA" : apm::csv::fmt(p.r)) << '\n';
        }
        csv_file << est.name << ",pooled,pooled," << corr.pooled_n << ','
                 << (std::isnan(corr.pooled_r) ? "NA" : apm::csv::fmt(corr.pooled_r)) << '\n';
        out_json[est.name] = {{"pairs", pairs},
                              {"pooled_n", corr.pooled_n},
                              {"pooled_r", std::isnan(corr.pooled_r)
                                               ? nlohmann::json("undefined")
                                               : nlohmann::json(corr.pooled_r)}};
        std::cout << est.name << ": pooled r="
                  << (std::isnan(corr.pooled_r) ? "NA" : apm::csv::fmt(corr.pooled_r)) << " (n="
                  << corr.pooled_n << ")\n";
    }
    auto jf = must_open(out, "correlations.json");
    jf << out_json.dump(2) << '\n';
    return 0;
}

// ---- simulate -----------------------------------------------------------------

int cmd_simulate(const apm::simgen::SimConfig& config, const std::string& out) {
    auto result = apm::simgen::simulate(config);
    auto shifts = must_open(out, "shifts.csv");
    apm::shiftlog::write_shift_log(shifts, result.records);
    apm::simgen::write_truth_file(out + "/truth.json", result.truth);
    std::cout << "simulated " << result.records.size() << " shifts across "
              << config.seasons << " season(s)\n";
    for (const auto& w : result.warnings) std::cout << "warning: " << w << '\n';
    std::cout << "wrote " << out << "/shifts.csv and " << out << "/truth.json\n";
    return 0;
}

// ---- summarize ----------------------------------------------------------------

int cmd_summarize(const std::vector<std::string>& inputs, const std::string& seasons,
                  const std::string& out) {
    auto records = load_inputs(inputs, seasons);
    auto s = apm::shiftlog::summarize_shifts(records);
    std::cout << "shifts: " << s.ev_count << " EV, " << s.st_count << " ST, "
              << s.excluded_count << " excluded (empty net)\n";
    std::cout << "mean shift length: EV " << apm::csv::fmt_fixed(s.ev_mean_duration_s, 2)
              << " s, ST " << apm::csv::fmt_fixed(s.st_mean_duration_s, 2) << " s\n";
    if (out.empty()) return 0;

    auto sj = must_open(out, "summary.json");
    sj << nlohmann::json{{"ev_count", s.ev_count},
                         {"st_count", s.st_count},
                         {"excluded_empty_net", s.excluded_count},
                         {"ev_mean_duration_s", s.ev_mean_duration_s},
                         {"st_mean_duration_s", s.st_mean_duration_s},
                         {"ev_total_s", s.ev_total_s},
                         {"st_total_s", s.st_total_s}}
              .dump(2)
       << '\n';

    auto hist = must_open(out, "shift_histogram.csv");
    hist << "bin_low_s,bin_high_s,ev_count,st_count\n";
    for (std::size_t b = 0; b < apm::shiftlog::ShiftSummary::kBins; ++b) {
        const double lo = static_cast<double>(b) * apm::shiftlog::ShiftSummary::kBinWidthS;
        hist << apm::csv::fmt(lo) << ','
             << (b + 1 == apm::shiftlog::ShiftSummary::kBins
                     ? "inf"
                     : apm::csv::fmt(lo + apm::shiftlog::ShiftSummary::kBinWidthS))
             << ',' << s.ev_duration_bins[b] << ',' << s.st_duration_bins[b] << '\n';
    }

    auto toi = must_open(out, "player_toi.csv");
    toi << "player_id,season,ev_s,pp_s,sh_s\n";
    for (const auto& [id, by_season] : s.player_season_toi)
        for (const auto& [season, t] : by_season)
            toi << id << ',' << season << ',' << apm::csv::fmt(t.ev_s) << ','
                << apm::csv::fmt(t.pp_s) << ',' << apm::csv::fmt(t.sh_s) << '\n';
    std::cout << "wrote summary files to " << out << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"adjusted plus-minus ratings from hockey shift logs"};
    app.require_subcommand(1);

    // fit
    auto* fit = app.add_subcommand("fit", "fit ridge models and write ratings");
    std::vector<std::string> inputs;
    std::string stat = "all", partition = "all", lambda = "auto", seasons, out, positions;
    std::uint64_t seed = 12345;
    bool dump_catalog = false;
    SelectionFlags fit_sel;
    fit->add_option("--input", inputs, "shift-log CSV file(s)")->required();
    fit->add_option("--stat", stat, "goals|shots|fenwick|corsi|all");
    fit->add_option("--partition", partition, "ev|st|all");
    fit->add_option("--lambda", lambda, "auto or a fixed ridge parameter");
    fit->add_option("--seasons", seasons, "comma-separated season filter");
    fit->add_option("--seed", seed, "master RNG seed");
    fit->add_option("--out", out, "output directory")->required();
    fit->add_option("--positions", positions, "positions sidecar (CSV or truth JSON)");
    fit->add_flag("--dump-catalog", dump_catalog, "write column catalogs");
    fit_sel.attach(fit);

    // report
    auto* rep = app.add_subcommand("report", "leaderboard from a ratings file");
    std::string ratings_path, sort_key = "G_off", position = "all", rep_out;
    std::size_t top_n = 10;
    bool centered = false;
    rep->add_option("--ratings", ratings_path, "ratings.json from a fit run")->required();
    rep->add_option("--sort", sort_key, "component key, e.g. G_off or S_def_EV_60");
    rep->add_option("--top", top_n, "number of rows");
    rep->add_option("--position", position, "F|D|all");
    rep->add_flag("--centered", centered, "subtract TOI-weighted positional means");
    rep->add_option("--out", rep_out, "directory for leaderboard.csv");

    // trace
    auto* trc = app.add_subcommand("trace", "coefficient paths over the lambda grid");
    std::vector<std::string> trc_inputs;
    std::string trc_stat = "goals", trc_component = "pp_off", trc_players, trc_seasons, trc_out;
    std::uint64_t trc_seed = 12345;
    SelectionFlags trc_sel;
    trc->add_option("--input", trc_inputs, "shift-log CSV file(s)")->required();
    trc->add_option("--stat", trc_stat, "goals|shots|fenwick|corsi");
    trc->add_option("--component", trc_component, "ev_off|ev_def|pp_off|pp_def|sh_off|sh_def");
    trc->add_option("--players", trc_players, "comma-separated player ids to trace");
    trc->add_option("--seasons", trc_seasons, "comma-separated season filter");
    trc->add_option("--seed", trc_seed, "master RNG seed");
    trc->add_option("--out", trc_out, "output directory")->required();
    trc_sel.attach(trc);

    // correlate
    auto* cor = app.add_subcommand("correlate", "year-to-year correlations");
    std::vector<std::string> cor_inputs;
    std::string cor_stat = "all", cor_component = "ev_off", cor_lambda = "auto", cor_seasons,
                cor_out;
    std::uint64_t cor_seed = 12345;
    double min_toi_ev = 500.0, min_toi_st = 150.0;
    SelectionFlags cor_sel;
    cor->add_option("--input", cor_inputs, "shift-log CSV file(s)")->required();
    cor->add_option("--stat", cor_stat, "goals|shots|fenwick|corsi|all");
    cor->add_option("--component", cor_component, "ev_off|ev_def|pp_off|pp_def|sh_off|sh_def");
    cor->add_option("--lambda", cor_lambda, "auto or a fixed ridge parameter");
    cor->add_option("--seasons", cor_seasons, "comma-separated season filter");
    cor->add_option("--seed", cor_seed, "master RNG seed");
    cor->add_option("--out", cor_out, "output directory")->required();
    cor->add_option("--min-toi-ev", min_toi_ev, "minutes floor for EV components");
    cor->add_option("--min-toi-st", min_toi_st, "minutes floor for PP/SH components");
    cor_sel.attach(cor);

    // simulate
    auto* sim = app.add_subcommand("simulate", "generate a synthetic shift log");
    apm::simgen::SimConfig sim_config;
    std::string sim_out;
    sim->add_option("--teams", sim_config.teams, "team count");
    sim->add_option("--skaters", sim_config.skaters_per_team, "skaters per team");
    sim->add_option("--forwards", sim_config.forwards_per_team, "forwards per team");
    sim->add_option("--seasons", sim_config.seasons, "season count");
    sim->add_option("--games", sim_config.games_per_season, "games per team per season");
    sim->add_option("--first-season", sim_config.first_season, "label of the first season");
    sim->add_option("--ev-shift-mean", sim_config.ev_shift_mean_s, "mean EV shift seconds");
    sim->add_option("--st-extra", sim_config.st_shift_extra_s, "extra mean seconds on ST shifts");
    sim->add_option("--st-fraction", sim_config.st_fraction, "fraction of ST shifts");
    sim->add_option("--goal-rate-ev", sim_config.goal_rate_ev, "EV goals per 60 per side");
    sim->add_option("--goal-rate-pp", sim_config.goal_rate_pp, "PP goals per 60 (advantaged)");
    sim->add_option("--goal-rate-sh", sim_config.goal_rate_sh, "SH goals per 60 (shorthanded)");
    sim->add_option("--shots-per-goal", sim_config.shots_per_goal, "shot intensity multiple");
    sim->add_option("--ev-off-sd", sim_config.ev_off_sd, "EV offense ability spread");
    sim->add_option("--ev-def-sd", sim_config.ev_def_sd, "EV defense ability spread");
    sim->add_option("--pp-off-sd", sim_config.pp_off_sd, "PP offense ability spread");
    sim->add_option("--pp-def-sd", sim_config.pp_def_sd, "PP defense ability spread");
    sim->add_option("--sh-off-sd", sim_config.sh_off_sd, "SH offense ability spread");
    sim->add_option("--sh-def-sd", sim_config.sh_def_sd, "SH defense ability spread");
    sim->add_option("--zone-off", sim_config.zone_off_truth, "offensive zone-start effect");
    sim->add_option("--zone-def", sim_config.zone_def_truth, "defensive zone-start effect");
    sim->add_option("--goalie-sd", sim_config.goalie_sd, "goalie save-probability spread");
    sim->add_option("--persistence", sim_config.persistence, "season-to-season ability carryover");
    sim->add_option("--coupled-pairs", sim_config.coupled_pairs_per_team,
                    "designated linemate pairs per team");
    sim->add_option("--coupling", sim_config.coupling, "probability a pair shifts together");
    sim->add_option("--seed", sim_config.seed, "master RNG seed");
    sim->add_option("--out", sim_out, "output directory")->required();

    // summarize
    auto* sum = app.add_subcommand("summarize", "shift-length and ice-time summaries");
    std::vector<std::string> sum_inputs;
    std::string sum_seasons, sum_out;
    sum->add_option("--input", sum_inputs, "shift-log CSV file(s)")->required();
    sum->add_option("--seasons", sum_seasons, "comma-separated season filter");
    sum->add_option("--out", sum_out, "output directory (optional)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(fit))
            return cmd_fit(inputs, stat, partition, lambda, seasons, seed, out, positions,
                           dump_catalog, fit_sel);
        if (app.got_subcommand(rep))
            return cmd_report(ratings_path, sort_key, top_n, position, centered, rep_out);
        if (app.got_subcommand(trc))
            return cmd_trace(trc_inputs, trc_stat, trc_component, trc_players, trc_seasons,
                             trc_seed, trc_out, trc_sel);
        if (app.got_subcommand(cor))
            return cmd_correlate(cor_inputs, cor_stat, cor_component, cor_lambda, cor_seasons,
                                 cor_seed, cor_out, min_toi_ev, min_toi_st, cor_sel);
        if (app.got_subcommand(sim)) return cmd_simulate(sim_config, sim_out);
        if (app.got_subcommand(sum)) return cmd_summarize(sum_inputs, sum_seasons, sum_out);
    } catch (const Error& e) {
        std::cerr << "error (" << e.kind_name() << "): " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
