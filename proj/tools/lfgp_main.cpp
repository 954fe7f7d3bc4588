// lfgp: likelihood-free Gaussian process regression toolkit.
//
// Subcommands: generate, generate-rates, fit, predict, bench, backtest.
// All randomness flows from the --seed flag of each subcommand; repeated runs
// with identical flags produce byte-identical primary outputs.

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "lfgp/backtest.hpp"
#include "lfgp/dataset.hpp"
#include "lfgp/datasets.hpp"
#include "lfgp/model_io.hpp"
#include "lfgp/svg.hpp"
#include "lfgp/timeparse.hpp"
#include "lfgp/trainer.hpp"

namespace fs = std::filesystem;

namespace {

struct MissingFileError : std::runtime_error {
    explicit MissingFileError(const std::string& path)
        : std::runtime_error("input file not found: " + path) {}
};

void require_file(const std::string& path) {
    if (!fs::exists(path)) throw MissingFileError(path);
}

std::string alpha_tag(double alpha) {
    std::ostringstream os;
    os << alpha;
    std::string s = os.str();
    for (char& c : s)
        if (c == '.') c = 'p';
    return s;
}

// ---------------------------------------------------------------- generate

int run_generate(const std::string& kind, std::int64_t n, std::uint64_t seed,
                 const std::string& out) {
    // The *-grid kinds export the deterministic test grid (x columns only),
    // ready for --embed-extra or predict --points.
    if (kind == "cube-grid" || kind == "roll-grid") {
        const lfgp::SyntheticKind k = lfgp::parse_synthetic_kind(kind.substr(0, 4));
        lfgp::save_points_csv(lfgp::test_grid(k, n), out);
        std::cout << "wrote " << n << " grid rows to " << out << "\n";
        return 0;
    }
    const lfgp::SyntheticKind k = lfgp::parse_synthetic_kind(kind);
    const lfgp::Dataset data = k == lfgp::SyntheticKind::Cube ? lfgp::gen_cube(n, seed)
                                                              : lfgp::gen_roll(n, seed);
    lfgp::save_dataset_csv(data, out);
    std::cout << "wrote " << data.size() << " rows to " << out << "\n";
    return 0;
}

int run_generate_rates(const std::string& start, double days, std::int64_t step_seconds,
                       double rate0, double vol_pips, double momentum, std::uint64_t seed,
                       double pip_size, const std::string& out) {
    const std::int64_t start_ts = lfgp::parse_iso8601_utc(start);
    const auto steps = static_cast<std::int64_t>(days * 86400.0 / static_cast<double>(step_seconds));
    const lfgp::RateSeries series = lfgp::gen_random_walk_rates(
        start_ts, steps, step_seconds, rate0, vol_pips, seed, pip_size, "GBP/JPY", momentum);
    lfgp::save_rate_csv(series, out);
    std::cout << "wrote " << series.size() << " ticks to " << out << "\n";
    return 0;
}

// --------------------------------------------------------------------- fit

struct FitFlags {
    std::string data_path;
    std::string statistic = "mean";
    int n0 = 1000;
    double epsilon = 1.0;
    std::uint64_t seed = 0;
    std::string metric = "rbf";
    std::string embedding = "none";
    int k_neighbors = 50;
    int embed_dim = 2;
    std::string embed_extra;
    int max_outer_iters = 20;
    std::string model_out = "model.json";
    std::string report_out;
};

int run_fit(const FitFlags& flags) {
    require_file(flags.data_path);
    const lfgp::Dataset data = lfgp::load_dataset_csv(flags.data_path);

    lfgp::FitConfig config;
    config.n0 = flags.n0;
    config.epsilon = flags.epsilon;
    config.statistic = lfgp::StatisticKind::parse(flags.statistic);
    config.seed = flags.seed;
    config.max_outer_iters = flags.max_outer_iters;
    if (flags.metric == "euclidean") {
        config.euclidean_clustering = true;
    } else if (flags.metric != "rbf") {
        throw std::invalid_argument("unknown metric '" + flags.metric + "' (rbf|euclidean)");
    }
    config.embedding.method = lfgp::EmbeddingConfig::parse_method(flags.embedding);
    config.embedding.k_neighbors = flags.k_neighbors;
    config.embedding.target_dim = flags.embed_dim;
    if (!flags.embed_extra.empty()) {
        require_file(flags.embed_extra);
        config.embed_extra = lfgp::load_points_csv(flags.embed_extra);
    }

    const lfgp::FitResult result = lfgp::fit(data, config);
    lfgp::save_model(result.model, flags.model_out);
    if (!flags.report_out.empty()) {
        std::ofstream rep(flags.report_out);
        if (!rep) throw std::runtime_error("cannot open for writing: " + flags.report_out);
        rep << lfgp::FitReport::csv_header() << "\n"
            << result.report.csv_row(data.size(), data.dim(), config) << "\n";
    }
    std::cout << "fit: m=" << result.report.cluster_count
              << " repetitions=" << result.report.repetition_count << " lml="
              << (result.report.objective_trace.empty() ? 0.0
                                                        : result.report.objective_trace.back())
              << " -> " << flags.model_out << "\n";
    return 0;
}

// ----------------------------------------------------------------- predict

struct PredictFlags {
    std::string model_path;
    std::string grid; // cube|roll -> built-in grid with the true curve
    std::int64_t n_star = 30;
    std::string points_path; // alternative: explicit points CSV
    std::string out = "predictions.csv";
    std::string plot;
};

int run_predict(const PredictFlags& flags) {
    require_file(flags.model_path);
    const lfgp::LfgpModel model = lfgp::load_model(flags.model_path);

    Eigen::MatrixXd points;
    bool known_family = false;
    lfgp::SyntheticKind family = lfgp::SyntheticKind::Cube;
    if (!flags.grid.empty()) {
        family = lfgp::parse_synthetic_kind(flags.grid);
        known_family = true;
        points = lfgp::test_grid(family, flags.n_star);
    } else if (!flags.points_path.empty()) {
        require_file(flags.points_path);
        points = lfgp::load_points_csv(flags.points_path);
    } else {
        throw std::invalid_argument("predict: pass --grid cube|roll or --points <csv>");
    }

    const std::vector<lfgp::PosteriorPrediction> preds = lfgp::predict_batch(model, points);

    std::ofstream out(flags.out);
    if (!out) throw std::runtime_error("cannot open for writing: " + flags.out);
    out << "x1,mean,variance" << (known_family ? ",true" : "") << "\n";
    std::vector<double> xs, means, trues;
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        out << lfgp::format_double(points(i, 0)) << ',' << lfgp::format_double(preds[static_cast<std::size_t>(i)].mean)
            << ',' << lfgp::format_double(preds[static_cast<std::size_t>(i)].variance);
        xs.push_back(points(i, 0));
        means.push_back(preds[static_cast<std::size_t>(i)].mean);
        if (known_family) {
            const double tv = lfgp::true_statistic(
                lfgp::grid_beta_params(family, i + 1, flags.n_star), model.statistic());
            trues.push_back(tv);
            out << ',' << lfgp::format_double(tv);
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + flags.out);

    if (!flags.plot.empty()) {
        std::vector<lfgp::LineSeries> series;
        series.push_back({"posterior mean", xs, means, ""});
        if (known_family) series.push_back({"true value", xs, trues, ""});
        lfgp::ChartSpec spec;
        spec.title = "posterior mean of " + model.statistic().name();
        spec.x_label = "x1*";
        spec.y_label = model.statistic().name();
        lfgp::write_line_chart(flags.plot, spec, series);
    }
    std::cout << "wrote " << points.rows() << " predictions to " << flags.out << "\n";
    return 0;
}

// ------------------------------------------------------------------- bench

int run_bench(const std::vector<std::int64_t>& ns, const std::vector<int>& n0s, int trials,
              std::uint64_t seed, const std::string& out) {
    if (trials < 1) throw std::invalid_argument("bench: trials must be positive");
    std::ofstream os(out);
    if (!os) throw std::runtime_error("cannot open for writing: " + out);
    os << "n,n0,trials,time_mean_s,time_sd_s,reps_mean,reps_sd,m_mean\n";
    for (const std::int64_t n : ns) {
        for (const int n0 : n0s) {
            std::vector<double> times, reps, ms;
            for (int t = 0; t < trials; ++t) {
                const std::uint64_t trial_seed = seed + 1000003ull * static_cast<std::uint64_t>(t);
                const lfgp::Dataset data = lfgp::gen_cube(n, trial_seed);
                lfgp::FitConfig config;
                config.n0 = n0;
                config.epsilon = 1.0;
                config.statistic = lfgp::StatisticKind::mean();
                config.seed = trial_seed;
                const lfgp::FitResult result = lfgp::fit(data, config);
                times.push_back(result.report.wall_time_s);
                reps.push_back(result.report.repetition_count);
                ms.push_back(result.report.cluster_count);
            }
            auto mean_of = [](const std::vector<double>& v) {
                double s = 0.0;
                for (double x : v) s += x;
                return s / static_cast<double>(v.size());
            };
            auto sd_of = [&](const std::vector<double>& v) {
                if (v.size() < 2) return 0.0;
                const double mu = mean_of(v);
                double s2 = 0.0;
                for (double x : v) s2 += (x - mu) * (x - mu);
                return std::sqrt(s2 / static_cast<double>(v.size() - 1));
            };
            os << n << ',' << n0 << ',' << trials << ',' << lfgp::format_double(mean_of(times))
               << ',' << lfgp::format_double(sd_of(times)) << ',' << lfgp::format_double(mean_of(reps))
               << ',' << lfgp::format_double(sd_of(reps)) << ',' << lfgp::format_double(mean_of(ms))
               << '\n';
            std::cout << "bench n=" << n << " n0=" << n0 << ": time " << mean_of(times) << "s reps "
                      << mean_of(reps) << "\n";
        }
    }
    return 0;
}

// ---------------------------------------------------------------- backtest

struct BacktestFlags {
    std::string rates_path;
    std::string mode = "proposal";
    std::vector<double> alphas{0.5};
    int lag_d = 10;
    int n0 = 100;
    std::string split_ts; // boundary between training and evaluation
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    double payout = 1.95;
    double entry_threshold = 0.05;
    double pip_size = 0.01;
    int tz_offset = 9;
    std::string holidays;
    double epsilon = 1.0;
};

int run_backtest_cmd(const BacktestFlags& flags) {
    require_file(flags.rates_path);
    const lfgp::RateSeries series = lfgp::load_rate_csv(flags.rates_path, flags.pip_size);
    if (series.size() == 0) throw std::runtime_error("backtest: empty rate series");

    lfgp::StrategyParams params;
    params.mode = lfgp::parse_strategy_mode(flags.mode);
    params.feature_lag = flags.lag_d;
    params.n0 = flags.n0;
    params.payout = flags.payout;
    params.entry_threshold_pips = flags.entry_threshold;
    params.calendar.tz_offset_hours = flags.tz_offset;
    params.epsilon = flags.epsilon;
    params.seed = flags.seed;
    if (!flags.holidays.empty()) {
        require_file(flags.holidays);
        params.calendar.holiday_days = lfgp::load_holiday_file(flags.holidays);
    }

    // Timestamp split; default at 2/3 of the covered span.
    std::int64_t split = flags.split_ts.empty()
                             ? series.timestamps.front() +
                                   (series.timestamps.back() - series.timestamps.front()) * 2 / 3
                             : lfgp::parse_iso8601_utc(flags.split_ts);

    lfgp::RateSeries train_series = series, eval_series = series;
    {
        const auto cut = std::lower_bound(series.timestamps.begin(), series.timestamps.end(), split);
        const auto k = static_cast<std::size_t>(std::distance(series.timestamps.begin(), cut));
        train_series.timestamps.assign(series.timestamps.begin(), cut);
        train_series.rates.assign(series.rates.begin(), series.rates.begin() + static_cast<std::ptrdiff_t>(k));
        eval_series.timestamps.assign(cut, series.timestamps.end());
        eval_series.rates.assign(series.rates.begin() + static_cast<std::ptrdiff_t>(k), series.rates.end());
    }

    const lfgp::RoundSet train_rounds = lfgp::build_rounds(train_series, params.feature_lag, params.calendar);
    if (train_rounds.data.size() == 0) {
        std::cout << "warning: no training rounds inside session windows\n";
        return 0;
    }
    std::cout << "training rounds: " << train_rounds.data.size()
              << " (dropped " << train_rounds.dropped_gap_rounds << " on gaps)\n";
    const auto [model_h, model_l] = lfgp::fit_strategy_models(train_rounds.data, params, flags.seed);

    fs::create_directories(flags.out_dir);
    std::vector<lfgp::LineSeries> curves;
    std::ofstream summary(fs::path(flags.out_dir) / "summary.csv");
    summary << "alpha,entries,wins,win_rate,cumulative_profit\n";
    for (const double alpha : flags.alphas) {
        lfgp::StrategyParams run = params;
        run.alpha = alpha;
        const lfgp::BacktestLedger ledger = lfgp::run_backtest(eval_series, model_h, model_l, run);
        const fs::path ledger_path =
            fs::path(flags.out_dir) / ("ledger_alpha_" + alpha_tag(alpha) + ".csv");
        lfgp::save_ledger_csv(ledger, ledger_path.string());

        std::size_t wins = 0;
        lfgp::LineSeries curve;
        curve.label = "alpha=" + alpha_tag(alpha);
        for (std::size_t i = 0; i < ledger.entries.size(); ++i) {
            wins += ledger.entries[i].win ? 1u : 0u;
            curve.x.push_back(static_cast<double>(i + 1));
            curve.y.push_back(static_cast<double>(ledger.entries[i].cumulative_cents) / 100.0);
        }
        curves.push_back(std::move(curve));
        const double win_rate =
            ledger.entries.empty() ? 0.0 : static_cast<double>(wins) / static_cast<double>(ledger.entries.size());
        summary << lfgp::format_double(alpha) << ',' << ledger.entries.size() << ',' << wins << ','
                << lfgp::format_double(win_rate) << ','
                << lfgp::format_double(ledger.cumulative_profit()) << '\n';
        std::cout << "alpha=" << alpha << ": entries=" << ledger.entries.size()
                  << " profit=" << ledger.cumulative_profit()
                  << " (dropped " << ledger.dropped_gap_rounds << " rounds on gaps)\n";
    }
    lfgp::ChartSpec spec;
    spec.title = "cumulative profit vs entry count (" + flags.mode + ")";
    spec.x_label = "entries";
    spec.y_label = "cumulative profit";
    lfgp::write_line_chart((fs::path(flags.out_dir) / "profit_vs_entries.svg").string(), spec, curves);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"likelihood-free Gaussian process regression toolkit"};
    app.require_subcommand(1);
    app.set_config("--config");

    // generate
    std::string g_kind = "cube", g_out = "dataset.csv";
    std::int64_t g_n = 10000;
    std::uint64_t g_seed = 0;
    auto* gen = app.add_subcommand("generate", "generate a synthetic benchmark dataset");
    gen->add_option("--kind", g_kind, "cube|roll|cube-grid|roll-grid")->required();
    gen->add_option("--n", g_n, "number of points")->required();
    gen->add_option("--seed", g_seed, "random seed");
    gen->add_option("--out", g_out, "output CSV path")->required();

    // generate-rates
    std::string r_start = "2019-01-01T00:00:00Z", r_out = "rates.csv";
    double r_days = 30.0, r_rate0 = 140.0, r_vol = 2.0, r_pip = 0.01, r_momentum = 0.0;
    std::int64_t r_step = 30;
    std::uint64_t r_seed = 0;
    auto* grates = app.add_subcommand("generate-rates",
                                      "generate a synthetic random-walk rate series CSV");
    grates->add_option("--start", r_start, "first timestamp (ISO-8601 UTC)");
    grates->add_option("--days", r_days, "series length in days")->required();
    grates->add_option("--step-seconds", r_step, "tick spacing");
    grates->add_option("--rate0", r_rate0, "initial mid rate");
    grates->add_option("--vol-pips", r_vol, "per-step volatility in pips");
    grates->add_option("--momentum", r_momentum, "AR(1) coefficient on log returns (0 = pure walk)");
    grates->add_option("--pip-size", r_pip, "quote units per pip");
    grates->add_option("--seed", r_seed, "random seed");
    grates->add_option("--out", r_out, "output CSV path")->required();

    // fit
    FitFlags f;
    auto* fitc = app.add_subcommand("fit", "fit an LFGP model to a dataset CSV");
    fitc->add_option("--data", f.data_path, "dataset CSV (x1..xd,y)")->required();
    fitc->add_option("--statistic", f.statistic, "mean|median|variance|skew|percentile:<q>");
    fitc->add_option("--n0", f.n0, "minimum cluster size");
    fitc->add_option("--epsilon", f.epsilon, "convergence threshold (nats)");
    fitc->add_option("--seed", f.seed, "random seed");
    fitc->add_option("--metric", f.metric, "clustering metric: rbf|euclidean");
    fitc->add_option("--embedding", f.embedding, "none|lle|isomap");
    fitc->add_option("--k-neighbors", f.k_neighbors, "k-NN graph size for embeddings");
    fitc->add_option("--embed-dim", f.embed_dim, "embedding target dimension");
    fitc->add_option("--embed-extra", f.embed_extra,
                     "CSV of extra points (prediction grid) to embed jointly");
    fitc->add_option("--max-outer-iters", f.max_outer_iters, "outer alternation cap");
    fitc->add_option("--model-out", f.model_out, "model output path");
    fitc->add_option("--report-out", f.report_out, "fit report CSV path");

    // predict
    PredictFlags p;
    auto* pred = app.add_subcommand("predict", "evaluate a fitted model on a grid");
    pred->add_option("--model", p.model_path, "model JSON path")->required();
    pred->add_option("--grid", p.grid, "built-in grid family: cube|roll");
    pred->add_option("--n-star", p.n_star, "grid size");
    pred->add_option("--points", p.points_path, "explicit points CSV");
    pred->add_option("--out", p.out, "predictions CSV path");
    pred->add_option("--plot", p.plot, "optional SVG chart path");

    // bench
    std::vector<std::int64_t> b_ns{100000};
    std::vector<int> b_n0s{1000};
    int b_trials = 3;
    std::uint64_t b_seed = 0;
    std::string b_out = "bench.csv";
    auto* bench = app.add_subcommand("bench", "time fits over an (n, n0) grid");
    bench->add_option("--n", b_ns, "dataset sizes")->delimiter(',');
    bench->add_option("--n0", b_n0s, "minimum cluster sizes")->delimiter(',');
    bench->add_option("--trials", b_trials, "trials per cell");
    bench->add_option("--seed", b_seed, "random seed");
    bench->add_option("--out", b_out, "summary CSV path");

    // backtest
    BacktestFlags bt;
    auto* back = app.add_subcommand("backtest", "offline binary-option backtest on a rate CSV");
    back->add_option("--rates", bt.rates_path, "rate CSV (timestamp,rate)")->required();
    back->add_option("--mode", bt.mode, "proposal|baseline");
    back->add_option("--alpha", bt.alphas, "stress levels to sweep")->delimiter(',');
    back->add_option("--lag-d", bt.lag_d, "number of 30-s return features");
    back->add_option("--n0", bt.n0, "minimum cluster size");
    back->add_option("--split-ts", bt.split_ts, "train/eval boundary (ISO-8601 UTC)");
    back->add_option("--out-dir", bt.out_dir, "output directory");
    back->add_option("--seed", bt.seed, "random seed");
    back->add_option("--payout", bt.payout, "payout per unit stake");
    back->add_option("--entry-threshold", bt.entry_threshold, "entry threshold in pips");
    back->add_option("--pip-size", bt.pip_size, "quote units per pip");
    back->add_option("--tz-offset", bt.tz_offset, "session clock offset in hours");
    back->add_option("--holidays", bt.holidays, "text file of excluded YYYY-MM-DD dates");
    back->add_option("--epsilon", bt.epsilon, "fit convergence threshold");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return run_generate(g_kind, g_n, g_seed, g_out);
        if (grates->parsed())
            return run_generate_rates(r_start, r_days, r_step, r_rate0, r_vol, r_momentum, r_seed,
                                      r_pip, r_out);
        if (fitc->parsed()) return run_fit(f);
        if (pred->parsed()) return run_predict(p);
        if (bench->parsed()) return run_bench(b_ns, b_n0s, b_trials, b_seed, b_out);
        if (back->parsed()) return run_backtest_cmd(bt);
    } catch (const MissingFileError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
