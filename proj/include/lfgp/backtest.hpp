#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "lfgp/dataset.hpp"
#include "lfgp/gp.hpp"
#include "lfgp/trainer.hpp"

namespace lfgp {

/// Mid-price history of one instrument; timestamps strictly increasing, in
/// UTC epoch seconds.
struct RateSeries {
    std::vector<std::int64_t> timestamps;
    std::vector<double> rates;
    std::string instrument = "GBP/JPY";
    double pip_size = 0.01;

    std::size_t size() const { return timestamps.size(); }
    void validate() const; // DataIntegrityError on disorder, non-positive rates

    /// Last rate at or before t, provided a tick exists within the trailing
    /// max_age seconds; returns false otherwise (a data gap).
    bool rate_at(std::int64_t t, double& out, std::int64_t max_age = 30) const;
};

/// CSV "timestamp,rate" with ISO-8601 UTC timestamps.
RateSeries load_rate_csv(const std::string& path, double pip_size = 0.01,
                         const std::string& instrument = "GBP/JPY");
void save_rate_csv(const RateSeries& series, const std::string& path);

/// Seeded geometric random walk sampled every step_seconds, rates rounded to
/// 0.1 pip. Stands in for proprietary broker history in tests and demos.
/// momentum is an optional AR(1) coefficient on the log returns (0 = pure
/// walk); with it the series carries a short-horizon pattern the strategy
/// can actually detect, which keeps demo ledgers non-empty.
RateSeries gen_random_walk_rates(std::int64_t start_ts, std::int64_t n_steps,
                                 std::int64_t step_seconds, double rate0, double vol_pips,
                                 std::uint64_t seed, double pip_size = 0.01,
                                 const std::string& instrument = "GBP/JPY",
                                 double momentum = 0.0);

/// Weekday trading window "8:00-29:00" in a fixed-offset local clock (29:00
/// is 5:00 the next day); holidays exclude whole session dates.
struct SessionCalendar {
    int tz_offset_hours = 9; // broker local clock
    std::set<std::int64_t> holiday_days; // local civil day numbers (session dates)

    bool entry_allowed(std::int64_t utc_ts) const;
};

std::set<std::int64_t> load_holiday_file(const std::string& path);

enum class StrategyMode { Proposal, Baseline };
StrategyMode parse_strategy_mode(const std::string& text);

struct StrategyParams {
    double alpha = 0.5;             // stress level, 0 < alpha <= 0.5
    int feature_lag = 10;           // d: number of 30-s returns per round
    int n0 = 100;                   // minimum cluster size for the LFGP fits
    double entry_threshold_pips = 0.05;
    double payout = 1.95;
    StrategyMode mode = StrategyMode::Proposal;
    SessionCalendar calendar;
    double epsilon = 1.0;
    int max_outer_iters = 20;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Feature/target rounds: one row per eligible minute, features are the
/// lag_d consecutive 30-s rate differences ending at the entry time, target
/// is the following 30-s difference; everything in pips rounded to 0.1.
struct RoundSet {
    Dataset data;                    // X: n x lag_d, y: n
    std::vector<std::int64_t> entry_ts;
    int dropped_gap_rounds = 0;
};

RoundSet build_rounds(const RateSeries& series, int lag_d, const SessionCalendar& calendar);

/// Two LFGP fits per mode. Proposal: percentile 95/195 and 100/195 of the
/// 30-s move. Baseline: per-cluster win frequencies, i.e. means of the
/// indicators {y > +threshold} and {y < -threshold} (draws count against
/// both).
std::pair<LfgpModel, LfgpModel> fit_strategy_models(const Dataset& train,
                                                    const StrategyParams& params,
                                                    std::uint64_t seed);

/// Lower-alpha / upper-(1-alpha) normal quantiles of the two posteriors:
/// f_H* = m_H + z_alpha sqrt(k_H), f_L* = m_L + z_{1-alpha} sqrt(k_L).
std::pair<double, double> stress_quantiles(const PosteriorPrediction& pred_H,
                                           const PosteriorPrediction& pred_L, double alpha);

enum class BetSide { High, Low };

/// One entry: stake 1, payout 1.95 on a win, draws lose. Profit is kept in
/// integer cents so the ledger arithmetic is exact.
struct LedgerEntry {
    std::int64_t timestamp = 0;
    BetSide side = BetSide::High;
    double signal = 0.0;        // stressed quantile (proposal) or probability (baseline)
    double realized_pips = 0.0; // rounded 30-s move
    bool win = false;
    std::int64_t profit_cents = 0;     // +95 or -100
    std::int64_t cumulative_cents = 0; // running prefix sum
};

struct BacktestLedger {
    std::vector<LedgerEntry> entries;
    std::int64_t rounds_evaluated = 0;
    int dropped_gap_rounds = 0;

    double cumulative_profit() const {
        return entries.empty() ? 0.0 : static_cast<double>(entries.back().cumulative_cents) / 100.0;
    }
};

BacktestLedger run_backtest(const RateSeries& eval_series, const LfgpModel& model_H,
                            const LfgpModel& model_L, const StrategyParams& params);

/// CSV: timestamp,side,signal,realized_pips,outcome,profit,cumulative
void save_ledger_csv(const BacktestLedger& ledger, const std::string& path);

/// 0.1-pip rounding used for features, targets and outcome decisions.
double round_to_tenth_pip(double pips);

} // namespace lfgp
