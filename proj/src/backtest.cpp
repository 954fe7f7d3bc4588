#include "lfgp/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "lfgp/errors.hpp"
#include "lfgp/rng.hpp"
#include "lfgp/special.hpp"
#include "lfgp/timeparse.hpp"

namespace lfgp {

double round_to_tenth_pip(double pips) {
    // Half away from zero on the 0.1-pip grid.
    return std::round(pips * 10.0) / 10.0;
}

void RateSeries::validate() const {
    if (timestamps.size() != rates.size())
        throw DataIntegrityError("RateSeries: timestamp/rate length mismatch");
    if (!(pip_size > 0.0)) throw DataIntegrityError("RateSeries: pip_size must be positive");
    for (std::size_t i = 0; i < timestamps.size(); ++i) {
        if (!(rates[i] > 0.0))
            throw DataIntegrityError("RateSeries: non-positive rate at " +
                                     format_iso8601_utc(timestamps[i]));
        if (i > 0 && timestamps[i] <= timestamps[i - 1])
            throw DataIntegrityError("RateSeries: timestamps not strictly increasing at " +
                                     format_iso8601_utc(timestamps[i]));
    }
}

bool RateSeries::rate_at(std::int64_t t, double& out, std::int64_t max_age) const {
    const auto it = std::upper_bound(timestamps.begin(), timestamps.end(), t);
    if (it == timestamps.begin()) return false;
    const auto idx = static_cast<std::size_t>(std::distance(timestamps.begin(), it)) - 1;
    if (t - timestamps[idx] >= max_age) return false;
    out = rates[idx];
    return true;
}

RateSeries load_rate_csv(const std::string& path, double pip_size, const std::string& instrument) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    RateSeries series;
    series.pip_size = pip_size;
    series.instrument = instrument;
    std::string line;
    if (!std::getline(in, line) || line.rfind("timestamp,rate", 0) != 0)
        throw std::runtime_error("rate CSV must start with header 'timestamp,rate': " + path);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw std::runtime_error("ragged rate CSV row in " + path);
        series.timestamps.push_back(parse_iso8601_utc(line.substr(0, comma)));
        series.rates.push_back(std::strtod(line.c_str() + comma + 1, nullptr));
    }
    series.validate();
    return series;
}

void save_rate_csv(const RateSeries& series, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "timestamp,rate\n";
    for (std::size_t i = 0; i < series.size(); ++i)
        out << format_iso8601_utc(series.timestamps[i]) << ',' << format_double(series.rates[i])
            << '\n';
    if (!out) throw std::runtime_error("write failed: " + path);
}

RateSeries gen_random_walk_rates(std::int64_t start_ts, std::int64_t n_steps,
                                 std::int64_t step_seconds, double rate0, double vol_pips,
                                 std::uint64_t seed, double pip_size, const std::string& instrument,
                                 double momentum) {
    if (n_steps < 1) throw std::invalid_argument("gen_random_walk_rates: n_steps must be positive");
    if (!(momentum > -1.0 && momentum < 1.0))
        throw std::invalid_argument("gen_random_walk_rates: momentum must lie in (-1, 1)");
    RateSeries series;
    series.pip_size = pip_size;
    series.instrument = instrument;
    series.timestamps.reserve(static_cast<std::size_t>(n_steps));
    series.rates.reserve(static_cast<std::size_t>(n_steps));
    Rng rng(seed);
    const double sigma_log = vol_pips * pip_size / rate0;
    double log_rate = std::log(rate0);
    double ret = 0.0; // AR(1) log return
    const double tick = 0.1 * pip_size; // quote granularity
    for (std::int64_t i = 0; i < n_steps; ++i) {
        series.timestamps.push_back(start_ts + i * step_seconds);
        const double quote = std::round(std::exp(log_rate) / tick) * tick;
        series.rates.push_back(quote);
        ret = momentum * ret + sigma_log * rng.normal();
        log_rate += ret;
    }
    series.validate();
    return series;
}

bool SessionCalendar::entry_allowed(std::int64_t utc_ts) const {
    // Shift the local clock back by the 8:00 session open, so a session is a
    // contiguous 21-hour block starting at local midnight of its own date.
    const std::int64_t shifted = utc_ts + static_cast<std::int64_t>(tz_offset_hours) * 3600 - 8 * 3600;
    const std::int64_t day = floor_div(shifted, 86400);
    const std::int64_t second_of_day = shifted - day * 86400;
    if (second_of_day >= 21 * 3600) return false; // past 29:00 local
    const int dow = weekday_from_days(day);
    if (dow > 4) return false; // Saturday/Sunday session dates
    return holiday_days.find(day) == holiday_days.end();
}

std::set<std::int64_t> load_holiday_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::set<std::int64_t> days;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        days.insert(parse_iso_date(line));
    }
    return days;
}

StrategyMode parse_strategy_mode(const std::string& text) {
    if (text == "proposal") return StrategyMode::Proposal;
    if (text == "baseline") return StrategyMode::Baseline;
    throw std::invalid_argument("unknown strategy mode '" + text + "' (proposal|baseline)");
}

void StrategyParams::validate() const {
    if (!(alpha > 0.0) || !(alpha <= 0.5))
        throw std::invalid_argument("StrategyParams: alpha must lie in (0, 0.5]");
    if (feature_lag < 1) throw std::invalid_argument("StrategyParams: feature_lag must be positive");
    if (!(payout > 1.0)) throw std::invalid_argument("StrategyParams: payout must exceed 1");
    if (n0 < 2) throw std::invalid_argument("StrategyParams: n0 must be at least 2");
}

RoundSet build_rounds(const RateSeries& series, int lag_d, const SessionCalendar& calendar) {
    series.validate();
    if (lag_d < 1) throw std::invalid_argument("build_rounds: lag_d must be positive");
    RoundSet rounds;
    if (series.size() == 0) return rounds;

    const std::int64_t span = 30LL * (lag_d + 1);
    if (series.timestamps.back() - series.timestamps.front() < span) return rounds;

    std::vector<double> feats;
    std::vector<double> targets;
    std::vector<std::int64_t> stamps;

    const std::int64_t first_minute =
        floor_div(series.timestamps.front() + 30LL * lag_d + 59, 60) * 60;
    const std::int64_t last_minute = floor_div(series.timestamps.back() - 30, 60) * 60;

    std::vector<double> grid(static_cast<std::size_t>(lag_d) + 2);
    for (std::int64_t t = first_minute; t <= last_minute; t += 60) {
        if (!calendar.entry_allowed(t)) continue;
        // Rates on the 30-s grid t - 30*lag_d, ..., t, t + 30. A gap anywhere
        // in the window drops the round.
        bool ok = true;
        for (int j = 0; j <= lag_d + 1 && ok; ++j) {
            const std::int64_t tau = t - 30LL * lag_d + 30LL * j;
            ok = series.rate_at(tau, grid[static_cast<std::size_t>(j)]);
        }
        if (!ok) {
            ++rounds.dropped_gap_rounds;
            continue;
        }
        for (int j = 0; j < lag_d; ++j) {
            const double diff_pips =
                (grid[static_cast<std::size_t>(j) + 1] - grid[static_cast<std::size_t>(j)]) /
                series.pip_size;
            feats.push_back(round_to_tenth_pip(diff_pips));
        }
        const double target_pips =
            (grid[static_cast<std::size_t>(lag_d) + 1] - grid[static_cast<std::size_t>(lag_d)]) /
            series.pip_size;
        targets.push_back(round_to_tenth_pip(target_pips));
        stamps.push_back(t);
    }

    const auto n = static_cast<Eigen::Index>(targets.size());
    rounds.data.X.resize(n, lag_d);
    rounds.data.y.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (int j = 0; j < lag_d; ++j)
            rounds.data.X(i, j) = feats[static_cast<std::size_t>(i) * static_cast<std::size_t>(lag_d) +
                                        static_cast<std::size_t>(j)];
        rounds.data.y[i] = targets[static_cast<std::size_t>(i)];
    }
    rounds.data.meta.generator = "rounds";
    rounds.data.meta.n = n;
    rounds.entry_ts = std::move(stamps);
    return rounds;
}

std::pair<LfgpModel, LfgpModel> fit_strategy_models(const Dataset& train,
                                                    const StrategyParams& params,
                                                    std::uint64_t seed) {
    params.validate();
    if (train.size() == 0) throw InsufficientDataError("fit_strategy_models: empty training set");

    FitConfig base;
    base.n0 = params.n0;
    base.epsilon = params.epsilon;
    base.max_outer_iters = params.max_outer_iters;

    const Rng root(seed);
    Dataset train_h = train, train_l = train;
    if (params.mode == StrategyMode::Proposal) {
        base.statistic = StatisticKind::percentile(95.0 / 195.0);
        FitConfig cfg_h = base;
        cfg_h.seed = root.stream(1).next_u64();
        FitConfig cfg_l = base;
        cfg_l.statistic = StatisticKind::percentile(100.0 / 195.0);
        cfg_l.seed = root.stream(2).next_u64();
        return {fit(train_h, cfg_h).model, fit(train_l, cfg_l).model};
    }

    // Baseline: win frequencies of each side; a draw counts against both.
    const double thr = params.entry_threshold_pips;
    for (Eigen::Index i = 0; i < train.size(); ++i) {
        train_h.y[i] = train.y[i] > thr ? 1.0 : 0.0;
        train_l.y[i] = train.y[i] < -thr ? 1.0 : 0.0;
    }
    base.statistic = StatisticKind::mean();
    FitConfig cfg_h = base;
    cfg_h.seed = root.stream(1).next_u64();
    FitConfig cfg_l = base;
    cfg_l.seed = root.stream(2).next_u64();
    return {fit(train_h, cfg_h).model, fit(train_l, cfg_l).model};
}

std::pair<double, double> stress_quantiles(const PosteriorPrediction& pred_H,
                                           const PosteriorPrediction& pred_L, double alpha) {
    if (!(alpha > 0.0) || !(alpha <= 0.5))
        throw std::invalid_argument("stress_quantiles: alpha must lie in (0, 0.5]");
    const double z = normal_quantile(alpha);
    const double f_h = pred_H.mean + z * std::sqrt(std::max(0.0, pred_H.variance));
    const double f_l = pred_L.mean - z * std::sqrt(std::max(0.0, pred_L.variance));
    return {f_h, f_l};
}

BacktestLedger run_backtest(const RateSeries& eval_series, const LfgpModel& model_H,
                            const LfgpModel& model_L, const StrategyParams& params) {
    params.validate();
    eval_series.validate();
    if (model_H.gp_dim() != params.feature_lag || model_L.gp_dim() != params.feature_lag)
        throw std::invalid_argument("run_backtest: models were fitted with a different feature lag");

    const RoundSet rounds = build_rounds(eval_series, params.feature_lag, params.calendar);
    BacktestLedger ledger;
    ledger.rounds_evaluated = rounds.data.size();
    ledger.dropped_gap_rounds = rounds.dropped_gap_rounds;
    const double thr = params.entry_threshold_pips;
    const std::int64_t win_cents = std::llround((params.payout - 1.0) * 100.0);
    std::int64_t cumulative = 0;

    for (Eigen::Index i = 0; i < rounds.data.size(); ++i) {
        const Eigen::VectorXd x = rounds.data.X.row(i).transpose();
        const PosteriorPrediction pred_h = posterior_predict(x, model_H);
        const PosteriorPrediction pred_l = posterior_predict(x, model_L);

        bool bet_high = false, bet_low = false;
        double sig_high = 0.0, sig_low = 0.0;
        if (params.mode == StrategyMode::Proposal) {
            const auto [f_h, f_l] = stress_quantiles(pred_h, pred_l, params.alpha);
            sig_high = f_h;
            sig_low = f_l;
            bet_high = f_h > thr;
            bet_low = f_l < -thr;
            if (bet_high && bet_low && std::fabs(f_l) > std::fabs(f_h)) bet_high = false;
            else if (bet_high && bet_low) bet_low = false;
        } else {
            // Both probabilities are stressed downward; enter past 1/2.
            const double z = normal_quantile(params.alpha);
            const double p_h = pred_h.mean + z * std::sqrt(std::max(0.0, pred_h.variance));
            const double p_l = pred_l.mean + z * std::sqrt(std::max(0.0, pred_l.variance));
            sig_high = p_h;
            sig_low = p_l;
            bet_high = p_h > 0.5;
            bet_low = p_l > 0.5;
            if (bet_high && bet_low && p_l > p_h) bet_high = false;
            else if (bet_high && bet_low) bet_low = false;
        }
        if (!bet_high && !bet_low) continue;

        LedgerEntry entry;
        entry.timestamp = rounds.entry_ts[static_cast<std::size_t>(i)];
        entry.side = bet_high ? BetSide::High : BetSide::Low;
        entry.signal = bet_high ? sig_high : sig_low;
        entry.realized_pips = rounds.data.y[i]; // already rounded to 0.1 pip
        entry.win = bet_high ? entry.realized_pips > 0.0 : entry.realized_pips < 0.0;
        entry.profit_cents = entry.win ? win_cents : -100;
        cumulative += entry.profit_cents;
        entry.cumulative_cents = cumulative;
        ledger.entries.push_back(entry);
    }
    return ledger;
}

void save_ledger_csv(const BacktestLedger& ledger, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "timestamp,side,signal,realized_pips,outcome,profit,cumulative\n";
    auto cents = [](std::int64_t c) {
        std::ostringstream os;
        if (c < 0) {
            os << '-';
            c = -c;
        }
        os << c / 100 << '.' << (c % 100 < 10 ? "0" : "") << c % 100;
        return os.str();
    };
    for (const LedgerEntry& e : ledger.entries) {
        out << format_iso8601_utc(e.timestamp) << ',' << (e.side == BetSide::High ? "high" : "low")
            << ',' << format_double(e.signal) << ',' << format_double(e.realized_pips) << ','
            << (e.win ? "win" : "loss") << ',' << cents(e.profit_cents) << ','
            << cents(e.cumulative_cents) << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

} // namespace lfgp
