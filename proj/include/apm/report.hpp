#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "apm/csv.hpp"
#include "apm/design.hpp"
#include "apm/errors.hpp"
#include "apm/lambda_select.hpp"
#include "apm/rating.hpp"
#include "apm/shiftlog.hpp"
#include "apm/simgen.hpp"
#include "apm/solver.hpp"
#include "apm/stats.hpp"
#include "json.hpp"

namespace apm::report {

using design::PartitionKind;
using rating::FittedModel;
using rating::ModelKey;
using rating::ModelSet;
using shiftlog::Stat;

struct RunConfig {
    std::vector<std::string> inputs;
    std::set<std::string> seasons;  // empty keeps every season
    std::vector<Stat> stats = {Stat::GOALS, Stat::SHOTS, Stat::FENWICK, Stat::CORSI};
    std::vector<PartitionKind> partitions = {PartitionKind::EV, PartitionKind::ST};
    std::optional<double> fixed_lambda;  // unset means AUTO selection
    std::uint64_t seed = 12345;
    std::string out_dir;
    double min_toi_ev_minutes = 500.0;
    double min_toi_st_minutes = 150.0;
    lambda_select::SelectionConfig selection;
    std::string positions_path;  // optional player_id,pos[,team] CSV or truth JSON
    bool dump_catalog = false;
};

struct PlayerMeta {
    std::map<std::string, char> positions;
    std::map<std::string, std::string> teams;
};

/// Reads a positions sidecar: either a simgen truth JSON or a CSV with the
/// header `player_id,pos[,team]`.
inline PlayerMeta read_positions(const std::string& path) {
    PlayerMeta meta;
    if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
        auto truth = simgen::read_truth_file(path);
        for (const auto& [id, s] : truth.skaters) {
            meta.positions[id] = s.position;
            meta.teams[id] = s.team;
        }
        return meta;
    }
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open positions file '" + path + "'");
    std::string line;
    if (!csv::getline(in, line)) throw Error(ErrorKind::Parse, "positions file is empty");
    if (line.rfind("player_id,pos", 0) != 0)
        throw Error(ErrorKind::Parse, "positions file must start with header 'player_id,pos'");
    std::size_t lineno = 1;
    while (csv::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto f = csv::split(line, ',');
        if (f.size() < 2 || f[1].empty())
            throw_parse(lineno, "pos", "expected player_id,pos[,team]");
        meta.positions[f[0]] = f[1][0];
        if (f.size() >= 3) meta.teams[f[0]] = f[2];
    }
    return meta;
}

inline const char* partition_name(PartitionKind p) {
    return p == PartitionKind::EV ? "ev" : "st";
}

struct RunResult {
    ModelSet models;
    std::map<ModelKey, lambda_select::LambdaReport> lambda_reports;
    std::vector<rating::PlayerRating> ratings;  // filled when all 8 models ran
    shiftlog::ShiftSummary summary;
    std::vector<std::string> written_files;
};

namespace detail {

inline std::vector<shiftlog::ShiftRecord> load_records(const RunConfig& config) {
    if (config.inputs.empty()) throw Error(ErrorKind::Config, "at least one input is required");
    if (config.stats.empty()) throw Error(ErrorKind::Config, "at least one stat is required");
    if (config.partitions.empty()) throw Error(ErrorKind::Config, "at least one partition is required");
    std::vector<shiftlog::ShiftRecord> records;
    for (const auto& path : config.inputs) {
        auto part = shiftlog::parse_shift_log_file(path);
        records.insert(records.end(), part.begin(), part.end());
    }
    return shiftlog::filter_seasons(records, config.seasons);
}

inline std::ofstream open_out(const std::string& dir, const std::string& name,
                              std::vector<std::string>& written) {
    std::filesystem::create_directories(dir);
    const std::string path = dir + "/" + name;
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Io, "cannot write '" + path + "'");
    written.push_back(path);
    return out;
}

inline void write_fit_csv(std::ostream& out, const FittedModel& model) {
    out << "column_index,kind,player_id,coefficient_per60,std_error\n";
    for (std::size_t k = 0; k < model.catalog.size(); ++k) {
        const auto& e = model.catalog.entries[k];
        out << k << ',' << design::column_kind_name(e.kind) << ',' << e.player_id.value_or("")
            << ',' << csv::fmt(model.fit.coefficients[static_cast<Eigen::Index>(k)]) << ','
            << csv::fmt(model.fit.std_errors[static_cast<Eigen::Index>(k)]) << '\n';
    }
}

inline nlohmann::json diagnostics_json(const solver::RidgeFit& fit) {
    return nlohmann::json{{"lambda", fit.lambda},
                          {"effective_df", fit.effective_df},
                          {"weighted_mse", fit.weighted_mse},
                          {"sigma2_hat", fit.sigma2_hat},
                          {"n_rows", fit.n_rows}};
}

}  // namespace detail

/// Builds and solves one model per (stat, partition): assemble, pick lambda
/// (four-signal policy unless fixed), solve, and write the fit artifacts.
/// When all eight models run, the combined rating table is written too.
inline RunResult run_fit(const RunConfig& config) {
    RunResult result;
    auto records = detail::load_records(config);
    if (records.empty()) throw Error(ErrorKind::Validation, "no shift records after filtering");
    auto parts = shiftlog::partition(records);
    result.summary = shiftlog::summarize_shifts(records);

    PlayerMeta meta;
    if (!config.positions_path.empty()) meta = read_positions(config.positions_path);

    for (Stat stat : config.stats) {
        for (PartitionKind partition : config.partitions) {
            const std::string tag =
                std::string(shiftlog::stat_name(stat)) + "_" + partition_name(partition);
            try {
                const auto& recs = partition == PartitionKind::EV ? parts.ev : parts.st;
                if (recs.empty())
                    throw Error(ErrorKind::Validation, "partition has no shifts");
                auto obs = shiftlog::to_observations(recs, stat);
                auto catalog = design::build_catalog(obs, stat, partition);
                auto problem = design::standardize(design::assemble(obs, catalog));

                lambda_select::LambdaReport lreport;
                if (config.fixed_lambda) {
                    lreport.policy = "FIXED";
                    lreport.chosen = *config.fixed_lambda;
                } else {
                    auto selection = config.selection;
                    selection.seed = derive_seed(config.seed, static_cast<std::uint64_t>(stat),
                                                 static_cast<std::uint64_t>(partition));
                    lreport = lambda_select::select_lambda(problem, selection);
                }
                auto fit = solver::solve_ridge(problem, lreport.chosen);

                if (!config.out_dir.empty()) {
                    auto fit_csv = detail::open_out(config.out_dir, "fit_" + tag + ".csv",
                                                    result.written_files);
                    detail::write_fit_csv(fit_csv, {fit, catalog});
                    auto diag = detail::open_out(config.out_dir, "fit_" + tag + "_diag.json",
                                                 result.written_files);
                    diag << detail::diagnostics_json(fit).dump(2) << '\n';
                    auto lj = detail::open_out(config.out_dir, "lambda_" + tag + ".json",
                                               result.written_files);
                    lj << lreport.to_json().dump(2) << '\n';
                    if (!lreport.grid.empty()) {
                        auto lg = detail::open_out(config.out_dir, "lambda_" + tag + "_grid.csv",
                                                   result.written_files);
                        lreport.write_grid_csv(lg);
                    }
                    if (config.dump_catalog) {
                        auto cat_csv = detail::open_out(config.out_dir, "catalog_" + tag + ".csv",
                                                        result.written_files);
                        design::write_catalog_csv(cat_csv, catalog, &problem.scales);
                    }
                }
                result.models[{stat, partition}] = {std::move(fit), std::move(catalog)};
                result.lambda_reports[{stat, partition}] = std::move(lreport);
            } catch (const Error& e) {
                throw Error(e.kind(), tag + ": " + e.what());
            }
        }
    }

    if (result.models.size() == 8) {
        auto pct = rating::compute_shooting_percentages(records);
        result.ratings = rating::build_rating_table(result.models, result.summary, pct,
                                                    &meta.positions, &meta.teams);
        if (!config.out_dir.empty()) {
            auto rc = detail::open_out(config.out_dir, "ratings.csv", result.written_files);
            rating::write_ratings_csv(rc, result.ratings);
            auto rj = detail::open_out(config.out_dir, "ratings.json", result.written_files);
            rj << rating::ratings_to_json(result.ratings).dump(2) << '\n';
        }
    }
    return result;
}

// --- leaderboards ------------------------------------------------------------

struct Table {
    std::vector<std::string> headers;
    std::vector<std::vector<std::string>> rows;

    void render(std::ostream& out) const {
        std::vector<std::size_t> width(headers.size());
        for (std::size_t c = 0; c < headers.size(); ++c) width[c] = headers[c].size();
        for (const auto& row : rows)
            for (std::size_t c = 0; c < row.size(); ++c)
                width[c] = std::max(width[c], row[c].size());
        auto line = [&](const std::vector<std::string>& cells) {
            for (std::size_t c = 0; c < cells.size(); ++c) {
                if (c) out << "  ";
                out << cells[c];
                for (std::size_t pad = cells[c].size(); pad < width[c]; ++pad) out << ' ';
            }
            out << '\n';
        };
        line(headers);
        for (const auto& row : rows) line(row);
    }

    void write_csv(std::ostream& out) const {
        out << csv::join(headers, ',') << '\n';
        for (const auto& row : rows) out << csv::join(row, ',') << '\n';
    }
};

/// Ranks players by one component. Column sets follow the published table
/// layouts: offense keys show the four offense totals plus EV per-60 columns,
/// defense keys the defensive counterparts, and total keys a mixed view.
inline Table leaderboard(const std::vector<rating::PlayerRating>& ratings,
                         const std::string& sort_key, std::size_t top_n,
                         std::optional<char> position_filter = std::nullopt) {
    {
        rating::PlayerRating probe;
        if (!rating::component_value(probe, sort_key)) {
            std::string keys;
            for (const auto& k : rating::component_keys()) {
                if (!keys.empty()) keys += ' ';
                keys += k;
            }
            throw Error(ErrorKind::Config, "unknown sort key '" + sort_key + "'; valid keys: " + keys);
        }
    }

    std::vector<const rating::PlayerRating*> pool;
    for (const auto& r : ratings)
        if (!position_filter || r.position == *position_filter) pool.push_back(&r);
    std::sort(pool.begin(), pool.end(),
              [&](const rating::PlayerRating* a, const rating::PlayerRating* b) {
                  const double va = *rating::component_value(*a, sort_key);
                  const double vb = *rating::component_value(*b, sort_key);
                  if (va != vb) return va > vb;
                  return a->player_id < b->player_id;
              });
    if (pool.size() > top_n) pool.resize(top_n);

    std::vector<std::string> value_cols;
    const bool off_key = sort_key.find("_off") != std::string::npos;
    const bool def_key = sort_key.find("_def") != std::string::npos;
    if (off_key)
        value_cols = {"G_off", "S_off", "F_off", "C_off",
                      "G_off_EV_60", "G_off_EV_60_err", "S_off_EV_60", "S_off_EV_60_err"};
    else if (def_key)
        value_cols = {"G_def", "S_def", "F_def", "C_def",
                      "G_def_EV_60", "G_def_EV_60_err", "S_def_EV_60", "S_def_EV_60_err"};
    else
        value_cols = {"G", "S", "F", "C",
                      "G_off_EV_60", "S_off_EV_60",
                      "G_off_PP_60", "G_off_PP_60_err", "S_off_PP_60", "S_off_PP_60_err"};

    Table table;
    table.headers = {"rank", "player", "pos", "team"};
    table.headers.insert(table.headers.end(), value_cols.begin(), value_cols.end());

    auto err_value = [](const rating::PlayerRating& r, const std::string& key) {
        // <component>_err keys resolve against the per-60 error fields
        const std::string base = key.substr(0, key.size() - 4);
        for (std::size_t si = 0; si < rating::kStats.size(); ++si) {
            const std::string t = shiftlog::stat_letter(rating::kStats[si]);
            for (rating::Strength3 s : rating::kStrengths) {
                const auto sx = static_cast<std::size_t>(s);
                const std::string sn = rating::strength_name(s);
                if (base == t + "_off_" + sn + "_60") return r.stat[si].off[sx].per60_err;
                if (base == t + "_def_" + sn + "_60") return r.stat[si].def[sx].per60_err;
                if (base == t + "_" + sn + "_60") return r.stat[si].total[sx].per60_err;
            }
        }
        return std::numeric_limits<double>::quiet_NaN();
    };

    std::size_t rank = 1;
    for (const auto* r : pool) {
        std::vector<std::string> row = {std::to_string(rank++), r->player_id,
                                        std::string(1, r->position), r->team};
        for (const auto& key : value_cols) {
            double v;
            if (key.size() > 4 && key.substr(key.size() - 4) == "_err")
                v = err_value(*r, key);
            else
                v = *rating::component_value(*r, key);
            // published precision: per-60 to two decimals, per-season integers
            const bool per60 = key.find("_60") != std::string::npos;
            row.push_back(csv::fmt_fixed(v, per60 ? 2 : 0));
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

// --- trace curves ------------------------------------------------------------

struct TraceCurves {
    std::vector<double> lambdas;
    std::vector<std::pair<std::string, std::vector<double>>> named;
    std::vector<std::string> most_positive;  // up to 25 ids, largest gain first
    std::vector<std::string> most_negative;  // up to 25 ids, largest drop first
    std::vector<std::pair<std::string, std::vector<double>>> auto_series;

    void write_csv(std::ostream& out) const {
        out << "lambda";
        for (const auto& [id, series] : named) out << ',' << id;
        for (const auto& [id, series] : auto_series) out << ',' << id;
        out << '\n';
        for (std::size_t i = 0; i < lambdas.size(); ++i) {
            out << csv::fmt(lambdas[i]);
            for (const auto& [id, series] : named) out << ',' << csv::fmt(series[i]);
            for (const auto& [id, series] : auto_series) out << ',' << csv::fmt(series[i]);
            out << '\n';
        }
    }

    nlohmann::json meta_json() const {
        nlohmann::json named_ids = nlohmann::json::array();
        for (const auto& [id, series] : named) named_ids.push_back(id);
        return nlohmann::json{{"named", named_ids},
                              {"most_positive", most_positive},
                              {"most_negative", most_negative}};
    }
};

/// Coefficient paths over the lambda grid for the named players plus the 25
/// most positively and negatively affected players (signed change between the
/// smallest grid lambda and the chosen one).
inline TraceCurves trace_curve_report(const design::ColumnCatalog& catalog,
                                      const lambda_select::LambdaReport& report,
                                      const std::vector<std::string>& players,
                                      design::ColumnKind kind) {
    if (report.grid.empty()) throw Error(ErrorKind::Config, "lambda report carries no grid");
    TraceCurves curves;
    for (const auto& g : report.grid) curves.lambdas.push_back(g.lambda);

    auto series_for = [&](std::int32_t col) {
        std::vector<double> s;
        s.reserve(report.grid.size());
        for (const auto& g : report.grid) s.push_back(g.coefficients[col]);
        return s;
    };

    for (const auto& id : players) {
        auto col = catalog.find(kind, id);
        if (!col)
            throw Error(ErrorKind::Validation, "unknown player '" + id + "' for trace curves");
        curves.named.emplace_back(id, series_for(*col));
    }

    // Changes are measured against the grid point at (or just below) chosen.
    std::size_t chosen_idx = report.grid.size() - 1;
    for (std::size_t i = 0; i < report.grid.size(); ++i)
        if (report.grid[i].lambda <= report.chosen) chosen_idx = i;
    std::vector<std::pair<double, std::string>> change;
    for (std::size_t k = 0; k < catalog.size(); ++k) {
        const auto& e = catalog.entries[k];
        if (e.kind != kind || !e.player_id) continue;
        const double delta = report.grid[chosen_idx].coefficients[static_cast<Eigen::Index>(k)] -
                             report.grid.front().coefficients[static_cast<Eigen::Index>(k)];
        change.emplace_back(delta, *e.player_id);
    }
    std::sort(change.begin(), change.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    const std::size_t take = std::min<std::size_t>(25, change.size());
    for (std::size_t i = 0; i < take; ++i)
        if (change[i].first > 0.0) curves.most_positive.push_back(change[i].second);
    for (std::size_t i = 0; i < take; ++i) {
        const auto& [delta, id] = change[change.size() - 1 - i];
        if (delta < 0.0 &&
            std::find(curves.most_positive.begin(), curves.most_positive.end(), id) ==
                curves.most_positive.end())
            curves.most_negative.push_back(id);
    }
    for (const auto& id : curves.most_positive)
        curves.auto_series.emplace_back(id, series_for(catalog.require(kind, id)));
    for (const auto& id : curves.most_negative)
        curves.auto_series.emplace_back(id, series_for(catalog.require(kind, id)));
    return curves;
}

// --- year-to-year correlations -----------------------------------------------

struct SeasonEstimates {
    std::string season;
    std::map<std::string, double> value;        // player -> per-60 estimate
    std::map<std::string, double> toi_minutes;  // player -> minutes at this strength
};

struct CorrelationPair {
    std::string season_a, season_b;
    std::size_t n = 0;
    double r = 0.0;  // NaN when fewer than 3 qualifying players
};

struct CorrelationReport {
    std::vector<CorrelationPair> pairs;
    std::size_t pooled_n = 0;
    double pooled_r = 0.0;
};

/// Pearson correlation of consecutive-season estimates over players meeting
/// the TOI minimum in both seasons, per pair and pooled over all pairs.
inline CorrelationReport year_to_year_correlation(std::vector<SeasonEstimates> seasons,
                                                  double min_toi_minutes) {
    if (seasons.size() < 2)
        throw Error(ErrorKind::Config, "need at least two fitted seasons to correlate");
    std::sort(seasons.begin(), seasons.end(),
              [](const SeasonEstimates& a, const SeasonEstimates& b) { return a.season < b.season; });

    CorrelationReport report;
    std::vector<double> pooled_x, pooled_y;
    for (std::size_t i = 0; i + 1 < seasons.size(); ++i) {
        const auto& a = seasons[i];
        const auto& b = seasons[i + 1];
        std::vector<double> xs, ys;
        for (const auto& [id, va] : a.value) {
            auto vb = b.value.find(id);
            if (vb == b.value.end()) continue;
            auto ta = a.toi_minutes.find(id);
            auto tb = b.toi_minutes.find(id);
            if (ta == a.toi_minutes.end() || ta->second < min_toi_minutes) continue;
            if (tb == b.toi_minutes.end() || tb->second < min_toi_minutes) continue;
            xs.push_back(va);
            ys.push_back(vb->second);
        }
        CorrelationPair pair;
        pair.season_a = a.season;
        pair.season_b = b.season;
        pair.n = xs.size();
        pair.r = xs.size() < 3 ? std::numeric_limits<double>::quiet_NaN()
                               : stats::pearson(xs, ys);
        report.pairs.push_back(pair);
        if (xs.size() >= 3) {
            pooled_x.insert(pooled_x.end(), xs.begin(), xs.end());
            pooled_y.insert(pooled_y.end(), ys.begin(), ys.end());
        }
    }
    report.pooled_n = pooled_x.size();
    report.pooled_r = pooled_x.size() < 3 ? std::numeric_limits<double>::quiet_NaN()
                                          : stats::pearson(pooled_x, pooled_y);
    return report;
}

}  // namespace apm::report
