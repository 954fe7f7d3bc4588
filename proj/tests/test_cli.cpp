#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

const std::string kCli = LFGP_CLI_PATH;

fs::path work_dir() {
    static fs::path dir = [] {
        fs::path p = fs::temp_directory_path() / "lfgp_cli_tests";
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return dir;
}

int run(const std::string& args) {
    const std::string cmd = kCli + " " + args + " > " + (work_dir() / "stdout.txt").string() +
                            " 2> " + (work_dir() / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    if (status == -1) return -1;
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::ifstream in(p);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> row;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) row.push_back(tok);
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("generate writes the dataset and repeats byte-identically") {
    const fs::path a = work_dir() / "cube_a.csv";
    const fs::path b = work_dir() / "cube_b.csv";
    REQUIRE(run("generate --kind cube --n 10000 --seed 7 --out " + a.string()) == 0);
    REQUIRE(run("generate --kind cube --n 10000 --seed 7 --out " + b.string()) == 0);
    const auto rows = read_csv(a);
    CHECK(rows.size() == 10001);
    CHECK(rows[0] == std::vector<std::string>{"x1", "x2", "x3", "y"});
    CHECK(rows[1].size() == 4);
    CHECK(slurp(a) == slurp(b));
    CHECK(fs::exists(a.string() + ".meta.txt"));
}

TEST_CASE("roll radius relation survives the CSV round trip") {
    const fs::path p = work_dir() / "roll.csv";
    REQUIRE(run("generate --kind roll --n 500 --seed 3 --out " + p.string()) == 0);
    const auto rows = read_csv(p);
    REQUIRE(rows.size() == 501);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double x1 = std::strtod(rows[i][0].c_str(), nullptr);
        const double x2 = std::strtod(rows[i][1].c_str(), nullptr);
        const double r = std::sqrt(x1 * x1 + x2 * x2);
        const double expect = static_cast<double>(i) / 500.0;
        CHECK(std::fabs(r - expect) <= 1e-9);
    }
}

TEST_CASE("fit emits a model and a sane report") {
    const fs::path model = work_dir() / "cube_model.json";
    const fs::path report = work_dir() / "cube_report.csv";
    REQUIRE(run("fit --data " + (work_dir() / "cube_a.csv").string() +
                " --statistic mean --n0 1000 --epsilon 1 --seed 1 --model-out " + model.string() +
                " --report-out " + report.string()) == 0);
    const auto rows = read_csv(report);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0][0] == "n");
    const int m = std::stoi(rows[1][5]);
    const int reps = std::stoi(rows[1][6]);
    CHECK(m >= 5);
    CHECK(m <= 10);
    CHECK(reps >= 1);
    CHECK(reps <= 5);
    CHECK(fs::exists(model));
}

TEST_CASE("missing input file exits with status 2 naming the path") {
    CHECK(run("fit --data /nonexistent/nope.csv --model-out " +
              (work_dir() / "x.json").string()) == 2);
    CHECK(slurp(work_dir() / "stderr.txt").find("/nonexistent/nope.csv") != std::string::npos);
    CHECK(run("predict --model /nonexistent/model.json --grid cube --out " +
              (work_dir() / "p.csv").string()) == 2);
}

TEST_CASE("unknown flags are rejected") {
    CHECK(run("generate --kind cube --n 10 --out x.csv --frobnicate") != 0);
    CHECK(run("nonsense-subcommand") != 0);
}

TEST_CASE("predict writes grid predictions with truth column and a plot") {
    const fs::path out = work_dir() / "pred.csv";
    const fs::path svg = work_dir() / "pred.svg";
    REQUIRE(run("predict --model " + (work_dir() / "cube_model.json").string() +
                " --grid cube --n-star 30 --out " + out.string() + " --plot " + svg.string()) == 0);
    const auto rows = read_csv(out);
    REQUIRE(rows.size() == 31);
    CHECK(rows[0] == std::vector<std::string>{"x1", "mean", "variance", "true"});

    const std::string svg_text = slurp(svg);
    CHECK(svg_text.find("<svg") != std::string::npos);
    // one polyline per series: posterior mean + true curve
    std::size_t polylines = 0, pos = 0;
    while ((pos = svg_text.find("<polyline", pos)) != std::string::npos) {
        ++polylines;
        pos += 9;
    }
    CHECK(polylines == 2);

    // byte-identical on repeat
    const fs::path out2 = work_dir() / "pred2.csv";
    REQUIRE(run("predict --model " + (work_dir() / "cube_model.json").string() +
                " --grid cube --n-star 30 --out " + out2.string()) == 0);
    CHECK(slurp(out) == slurp(out2));
}

TEST_CASE("embedded fit via grid export") {
    const fs::path roll = work_dir() / "roll_fit.csv";
    const fs::path grid = work_dir() / "roll_grid.csv";
    const fs::path model = work_dir() / "roll_model.json";
    const fs::path pred = work_dir() / "roll_pred.csv";
    REQUIRE(run("generate --kind roll --n 1500 --seed 5 --out " + roll.string()) == 0);
    REQUIRE(run("generate --kind roll-grid --n 30 --out " + grid.string()) == 0);
    REQUIRE(run("fit --data " + roll.string() +
                " --statistic mean --n0 300 --seed 2 --embedding lle --k-neighbors 25 "
                "--embed-dim 2 --embed-extra " + grid.string() +
                " --model-out " + model.string()) == 0);
    const std::string doc = slurp(model);
    CHECK(doc.find("\"method\": \"lle\"") != std::string::npos);
    CHECK(doc.find("\"k_neighbors\": 25") != std::string::npos);
    REQUIRE(run("predict --model " + model.string() + " --grid roll --n-star 30 --out " +
                pred.string()) == 0);
    CHECK(read_csv(pred).size() == 31);
}

TEST_CASE("bench emits one row per grid cell") {
    const fs::path out = work_dir() / "bench.csv";
    REQUIRE(run("bench --n 20000 --n0 2000,5000 --trials 2 --seed 5 --out " + out.string()) == 0);
    const auto rows = read_csv(out);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0][0] == "n");
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(std::stod(rows[i][5]) >= 1.0); // reps_mean
        CHECK(std::stod(rows[i][3]) > 0.0);  // time_mean_s
    }
}

TEST_CASE("backtest pipeline end to end") {
    const fs::path rates = work_dir() / "rates.csv";
    const fs::path outdir = work_dir() / "bt";
    REQUIRE(run("generate-rates --start 2019-01-07T00:00:00Z --days 7 --rate0 140 --vol-pips 2 "
                "--momentum 0.25 --seed 11 --out " + rates.string()) == 0);
    REQUIRE(run("backtest --rates " + rates.string() +
                " --mode proposal --alpha 0.5,0.3,0.1 --lag-d 3 --n0 150 --seed 4 --out-dir " +
                outdir.string()) == 0);
    CHECK(fs::exists(outdir / "summary.csv"));
    CHECK(fs::exists(outdir / "ledger_alpha_0p5.csv"));
    CHECK(fs::exists(outdir / "ledger_alpha_0p1.csv"));
    CHECK(fs::exists(outdir / "profit_vs_entries.svg"));

    const auto summary = read_csv(outdir / "summary.csv");
    REQUIRE(summary.size() == 4);
    CHECK(std::stol(summary[1][1]) > 0); // alpha = 0.5 places entries
    long prev = std::numeric_limits<long>::max();
    for (std::size_t i = 1; i < summary.size(); ++i) {
        const long entries = std::stol(summary[i][1]);
        CHECK(entries <= prev);
        prev = entries;
    }

    // determinism of the ledger outputs
    const fs::path outdir2 = work_dir() / "bt2";
    REQUIRE(run("backtest --rates " + rates.string() +
                " --mode proposal --alpha 0.5,0.3,0.1 --lag-d 3 --n0 150 --seed 4 --out-dir " +
                outdir2.string()) == 0);
    CHECK(slurp(outdir / "ledger_alpha_0p3.csv") == slurp(outdir2 / "ledger_alpha_0p3.csv"));
    CHECK(slurp(outdir / "profit_vs_entries.svg") == slurp(outdir2 / "profit_vs_entries.svg"));
}

TEST_CASE("baseline backtest mode runs") {
    const fs::path outdir = work_dir() / "bt_base";
    REQUIRE(run("backtest --rates " + (work_dir() / "rates.csv").string() +
                " --mode baseline --alpha 0.5 --lag-d 3 --n0 200 --seed 4 --out-dir " +
                outdir.string()) == 0);
    CHECK(fs::exists(outdir / "summary.csv"));
}

} // TEST_SUITE
