#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "apm/csv.hpp"
#include "apm/errors.hpp"
#include "apm/shiftlog.hpp"

namespace apm::design {

using shiftlog::Observation;
using shiftlog::Stat;
using shiftlog::StrengthRole;
using shiftlog::Zone;

enum class ColumnKind : std::uint8_t {
    INTERCEPT,
    ZONE_OFF,
    ZONE_DEF,
    SKATER_OFF,
    SKATER_DEF,
    GOALIE_DEF,
    SKATER_PP_OFF,
    SKATER_PP_DEF,
    SKATER_SH_OFF,
    SKATER_SH_DEF,
};

enum class PartitionKind { EV, ST };

inline const char* column_kind_name(ColumnKind k) {
    switch (k) {
        case ColumnKind::INTERCEPT: return "intercept";
        case ColumnKind::ZONE_OFF: return "zone_off";
        case ColumnKind::ZONE_DEF: return "zone_def";
        case ColumnKind::SKATER_OFF: return "skater_off";
        case ColumnKind::SKATER_DEF: return "skater_def";
        case ColumnKind::GOALIE_DEF: return "goalie_def";
        case ColumnKind::SKATER_PP_OFF: return "skater_pp_off";
        case ColumnKind::SKATER_PP_DEF: return "skater_pp_def";
        case ColumnKind::SKATER_SH_OFF: return "skater_sh_off";
        case ColumnKind::SKATER_SH_DEF: return "skater_sh_def";
    }
    return "?";
}

struct ColumnSpec {
    ColumnKind kind;
    std::optional<std::string> player_id;
    bool penalized = true;
};

/// Ordered column layout of a design matrix. Column 0 is the intercept and the
/// zone columns sit at 1 and 2; player columns follow, sorted by player id.
class ColumnCatalog {
public:
    std::vector<ColumnSpec> entries;
    PartitionKind partition = PartitionKind::EV;
    Stat stat = Stat::GOALS;

    std::size_t size() const { return entries.size(); }

    static constexpr std::int32_t kIntercept = 0;
    static constexpr std::int32_t kZoneOff = 1;
    static constexpr std::int32_t kZoneDef = 2;

    std::optional<std::int32_t> find(ColumnKind kind, const std::string& player) const {
        auto it = index_.find({static_cast<int>(kind), player});
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    std::int32_t require(ColumnKind kind, const std::string& player) const {
        auto col = find(kind, player);
        if (!col)
            throw Error(ErrorKind::Validation,
                        std::string("unknown player '") + player + "' for column kind " +
                            column_kind_name(kind));
        return *col;
    }

    std::vector<std::string> skater_ids() const {
        std::vector<std::string> out;
        std::set<std::string> seen;
        for (const auto& e : entries)
            if (e.player_id && e.kind != ColumnKind::GOALIE_DEF && seen.insert(*e.player_id).second)
                out.push_back(*e.player_id);
        return out;
    }

    void rebuild_index() {
        index_.clear();
        for (std::size_t i = 0; i < entries.size(); ++i) {
            const auto& e = entries[i];
            index_[{static_cast<int>(e.kind), e.player_id.value_or("")}] =
                static_cast<std::int32_t>(i);
        }
    }

private:
    std::map<std::pair<int, std::string>, std::int32_t> index_;
};

/// Enumerates columns for one partition: intercept, the two zone indicators,
/// then per-skater role columns in sorted id order. Goalie defense columns
/// exist only for the goals models and come last.
inline ColumnCatalog build_catalog(const std::vector<Observation>& observations, Stat stat,
                                   PartitionKind partition) {
    if (observations.empty())
        throw Error(ErrorKind::Validation, "cannot build a column catalog from zero observations");

    std::set<std::string> skaters;
    std::set<std::string> goalies;
    for (const auto& o : observations) {
        skaters.insert(o.offense_players.begin(), o.offense_players.end());
        skaters.insert(o.defense_players.begin(), o.defense_players.end());
        if (o.defending_goalie) goalies.insert(*o.defending_goalie);
    }

    ColumnCatalog cat;
    cat.partition = partition;
    cat.stat = stat;
    cat.entries.push_back({ColumnKind::INTERCEPT, std::nullopt, false});
    cat.entries.push_back({ColumnKind::ZONE_OFF, std::nullopt, true});
    cat.entries.push_back({ColumnKind::ZONE_DEF, std::nullopt, true});
    for (const auto& id : skaters) {
        if (partition == PartitionKind::EV) {
            cat.entries.push_back({ColumnKind::SKATER_OFF, id, true});
            cat.entries.push_back({ColumnKind::SKATER_DEF, id, true});
        } else {
            cat.entries.push_back({ColumnKind::SKATER_PP_OFF, id, true});
            cat.entries.push_back({ColumnKind::SKATER_PP_DEF, id, true});
            cat.entries.push_back({ColumnKind::SKATER_SH_OFF, id, true});
            cat.entries.push_back({ColumnKind::SKATER_SH_DEF, id, true});
        }
    }
    if (stat == Stat::GOALS)
        for (const auto& id : goalies)
            cat.entries.push_back({ColumnKind::GOALIE_DEF, id, true});
    cat.rebuild_index();
    return cat;
}

/// Sparse 0/1 design with duration weights and per-60 responses. Rows are
/// stored as sorted column-index lists; values are implicitly 1 before
/// standardization and 1/scale[k] after.
struct DesignProblem {
    ColumnCatalog catalog;
    std::size_t n_rows = 0;
    std::vector<std::int32_t> row_offsets;  // n_rows + 1
    std::vector<std::int32_t> col_indices;
    Eigen::VectorXd weights;   // seconds
    Eigen::VectorXd response;  // per-60 rates
    // Standardization state: scale[k] = 0 flags a degenerate (never-seen)
    // column; the intercept keeps scale 1.
    Eigen::VectorXd scales;
    bool standardized = false;

    std::size_t cols() const { return catalog.size(); }
    std::size_t row_nnz(std::size_t i) const {
        return static_cast<std::size_t>(row_offsets[i + 1] - row_offsets[i]);
    }
    const std::int32_t* row_begin(std::size_t i) const { return col_indices.data() + row_offsets[i]; }
    const std::int32_t* row_end(std::size_t i) const { return col_indices.data() + row_offsets[i + 1]; }

    double weight_mean() const { return weights.sum() / static_cast<double>(n_rows); }

    bool degenerate(std::int32_t k) const { return standardized && scales[k] == 0.0; }
};

inline DesignProblem assemble(const std::vector<Observation>& observations,
                              const ColumnCatalog& catalog) {
    DesignProblem p;
    p.catalog = catalog;
    p.n_rows = observations.size();
    p.row_offsets.reserve(p.n_rows + 1);
    p.row_offsets.push_back(0);
    p.col_indices.reserve(p.n_rows * 13);
    p.weights.resize(static_cast<Eigen::Index>(p.n_rows));
    p.response.resize(static_cast<Eigen::Index>(p.n_rows));

    const bool ev = catalog.partition == PartitionKind::EV;
    std::vector<std::int32_t> row;
    for (std::size_t i = 0; i < observations.size(); ++i) {
        const Observation& o = observations[i];
        ColumnKind off_kind, def_kind;
        switch (o.strength_role) {
            case StrengthRole::EV:
                if (!ev)
                    throw Error(ErrorKind::Validation,
                                "even-strength observation given to a special-teams catalog");
                off_kind = ColumnKind::SKATER_OFF;
                def_kind = ColumnKind::SKATER_DEF;
                break;
            case StrengthRole::PP_OFFENSE:
                if (ev)
                    throw Error(ErrorKind::Validation,
                                "special-teams observation given to an even-strength catalog");
                off_kind = ColumnKind::SKATER_PP_OFF;
                def_kind = ColumnKind::SKATER_SH_DEF;
                break;
            case StrengthRole::SH_OFFENSE:
            default:
                if (ev)
                    throw Error(ErrorKind::Validation,
                                "special-teams observation given to an even-strength catalog");
                off_kind = ColumnKind::SKATER_SH_OFF;
                def_kind = ColumnKind::SKATER_PP_DEF;
                break;
        }

        row.clear();
        row.push_back(ColumnCatalog::kIntercept);
        if (o.zone == Zone::OFF) row.push_back(ColumnCatalog::kZoneOff);
        if (o.zone == Zone::DEF) row.push_back(ColumnCatalog::kZoneDef);
        for (const auto& id : o.offense_players) row.push_back(catalog.require(off_kind, id));
        for (const auto& id : o.defense_players) row.push_back(catalog.require(def_kind, id));
        if (catalog.stat == Stat::GOALS && o.defending_goalie)
            row.push_back(catalog.require(ColumnKind::GOALIE_DEF, *o.defending_goalie));
        std::sort(row.begin(), row.end());

        p.col_indices.insert(p.col_indices.end(), row.begin(), row.end());
        p.row_offsets.push_back(static_cast<std::int32_t>(p.col_indices.size()));
        p.weights[static_cast<Eigen::Index>(i)] = o.weight;
        p.response[static_cast<Eigen::Index>(i)] = o.response;
    }
    p.scales = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(p.cols()));
    p.standardized = false;
    return p;
}

/// Sets scale[k] to the weighted root-mean-square of column k (weights
/// w/Σw), so each standardized column has weighted RMS 1. Indicator columns
/// stay sparse; only the implicit entry value changes to 1/scale. Columns
/// that never appear get scale 0 and are flagged degenerate. Idempotent: the
/// scales are recomputed from the raw indicators each time.
inline DesignProblem standardize(DesignProblem p) {
    const auto pcols = static_cast<Eigen::Index>(p.cols());
    Eigen::VectorXd sumw = Eigen::VectorXd::Zero(pcols);
    for (std::size_t i = 0; i < p.n_rows; ++i) {
        const double w = p.weights[static_cast<Eigen::Index>(i)];
        for (const auto* c = p.row_begin(i); c != p.row_end(i); ++c) sumw[*c] += w;
    }
    const double total = p.weights.sum();
    p.scales = (sumw / total).cwiseSqrt();
    // The all-ones intercept has RMS 1 by definition; pin it exactly.
    if (!p.catalog.entries.empty() && p.catalog.entries[0].kind == ColumnKind::INTERCEPT)
        p.scales[ColumnCatalog::kIntercept] = 1.0;
    p.standardized = true;
    return p;
}

/// Fitted values from original-unit coefficients: the raw indicators are 0/1,
/// so each row's prediction is the sum of its columns' coefficients.
inline Eigen::VectorXd fitted_values(const DesignProblem& p, const Eigen::VectorXd& coefficients) {
    Eigen::VectorXd yhat = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p.n_rows));
    for (std::size_t i = 0; i < p.n_rows; ++i) {
        double s = 0.0;
        for (const auto* c = p.row_begin(i); c != p.row_end(i); ++c) s += coefficients[*c];
        yhat[static_cast<Eigen::Index>(i)] = s;
    }
    return yhat;
}

inline void write_catalog_csv(std::ostream& out, const ColumnCatalog& catalog,
                              const Eigen::VectorXd* scales = nullptr) {
    out << "column_index,kind,player_id,penalized,scale\n";
    for (std::size_t i = 0; i < catalog.entries.size(); ++i) {
        const auto& e = catalog.entries[i];
        out << i << ',' << column_kind_name(e.kind) << ',' << e.player_id.value_or("") << ','
            << (e.penalized ? 1 : 0) << ','
            << (scales ? csv::fmt((*scales)[static_cast<Eigen::Index>(i)]) : "") << '\n';
    }
}

}  // namespace apm::design
