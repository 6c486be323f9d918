#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "infoflow/report.hpp"
#include "infoflow/rng.hpp"

namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(INFOFLOW_BIN) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  EXPECT_TRUE(in) << "missing file " << path;
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

size_t count_data_lines(const std::string& csv) {
  // skip the manifest-hash comment and the header row
  size_t lines = 0;
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#') ++lines;
  }
  return lines == 0 ? 0 : lines - 1;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("infoflow_cli_test_" + std::to_string(::getpid()));
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  // Geometric-random-walk price file: n_days rows, one column per ticker.
  fs::path write_price_csv(const std::string& name, int n_days, int n_tickers,
                           std::uint64_t seed) {
    const fs::path path = root_ / name;
    std::ofstream out(path);
    out << "date";
    for (int c = 0; c < n_tickers; ++c) out << ",TK" << c;
    out << "\n";
    std::vector<infoflow::Stream> streams;
    std::vector<double> price(static_cast<size_t>(n_tickers), 100.0);
    for (int c = 0; c < n_tickers; ++c) {
      streams.emplace_back(infoflow::derive_stream_seed(seed, static_cast<std::uint64_t>(c)));
    }
    int year = 2004, month = 1, day = 1;
    for (int t = 0; t < n_days; ++t) {
      char date[40];
      std::snprintf(date, sizeof(date), "%04d-%02d-%02d", year, month, day);
      if (++day > 28) {
        day = 1;
        if (++month > 12) {
          month = 1;
          ++year;
        }
      }
      out << date;
      for (int c = 0; c < n_tickers; ++c) {
        price[static_cast<size_t>(c)] *= std::exp(0.01 * streams[static_cast<size_t>(c)].gaussian());
        out << ',' << infoflow::format_double(price[static_cast<size_t>(c)]);
      }
      out << "\n";
    }
    return path;
  }

  fs::path root_;
};

}  // namespace

TEST_F(CliTest, AnalyzeDefaultsProduceAllTables) {
  const auto input = write_price_csv("panel.csv", 130, 3, 7);
  const fs::path out = root_ / "run1";
  const int code = run_cli("analyze --input " + input.string() + " --out " + out.string());
  EXPECT_EQ(code, 0);
  for (const char* name : {"fr_curves.csv", "fr_curves.json", "pairs.csv", "pairs.json",
                           "apen.csv", "apen.json", "manifest.json"}) {
    EXPECT_TRUE(fs::exists(out / name)) << name;
  }
  // default 5x5 grid -> 25 fr rows; 3 tickers -> 3 pairs x 25 cells
  EXPECT_EQ(count_data_lines(slurp(out / "fr_curves.csv")), 25u);
  EXPECT_EQ(count_data_lines(slurp(out / "pairs.csv")), 75u);
  EXPECT_EQ(count_data_lines(slurp(out / "apen.csv")), 3u);
  // every table carries the manifest hash
  const std::string manifest = slurp(out / "manifest.json");
  const auto hash_pos = manifest.find("manifest_hash");
  ASSERT_NE(hash_pos, std::string::npos);
  const auto quote = manifest.find('"', manifest.find(':', hash_pos));
  const std::string hash = manifest.substr(quote + 1, 16);
  EXPECT_NE(slurp(out / "fr_curves.csv").find(hash), std::string::npos);
  EXPECT_NE(slurp(out / "pairs.json").find(hash), std::string::npos);
}

TEST_F(CliTest, ShuffledRunsAreByteIdentical) {
  const auto input = write_price_csv("panel.csv", 130, 3, 11);
  const fs::path out1 = root_ / "a";
  const fs::path out2 = root_ / "b";
  ASSERT_EQ(run_cli("analyze --input " + input.string() + " --shuffle --seed 42 --threads 1 --out " +
                    out1.string()),
            0);
  ASSERT_EQ(run_cli("analyze --input " + input.string() + " --shuffle --seed 42 --threads 2 --out " +
                    out2.string()),
            0);
  for (const char* name : {"fr_curves.csv", "fr_curves.json", "pairs.csv", "pairs.json",
                           "apen.csv", "apen.json", "manifest.json"}) {
    EXPECT_EQ(slurp(out1 / name), slurp(out2 / name)) << name;
  }
  // a different seed must actually change the analysis
  const fs::path out3 = root_ / "c";
  ASSERT_EQ(run_cli("analyze --input " + input.string() + " --shuffle --seed 43 --out " +
                    out3.string()),
            0);
  EXPECT_NE(slurp(out1 / "pairs.csv"), slurp(out3 / "pairs.csv"));
}

TEST_F(CliTest, InvalidAlphaIsConfigErrorWithNoOutputs) {
  const auto input = write_price_csv("panel.csv", 130, 3, 7);
  const fs::path out = root_ / "bad";
  const int code = run_cli("analyze --input " + input.string() + " --alpha 1.5 --out " +
                           out.string());
  EXPECT_EQ(code, 2);
  EXPECT_FALSE(fs::exists(out / "fr_curves.csv"));
  EXPECT_FALSE(fs::exists(out / "manifest.json"));
}

TEST_F(CliTest, MissingInputIsDataError) {
  EXPECT_EQ(run_cli("analyze --input " + (root_ / "nope.csv").string() + " --out " +
                    (root_ / "x").string()),
            3);
}

TEST_F(CliTest, UnknownFlagIsConfigError) {
  EXPECT_EQ(run_cli("analyze --frobnicate"), 2);
  EXPECT_EQ(run_cli(""), 2);  // missing subcommand
}

TEST_F(CliTest, ConstantTickerDegeneracyExitCode) {
  // two tickers, one constant: every pair involves it -> 100% unclassifiable
  const fs::path path = root_ / "flat.csv";
  {
    std::ofstream out(path);
    out << "date,TK0,TK1\n";
    infoflow::Stream stream(3);
    double p = 50.0;
    int day = 1;
    for (int t = 0; t < 130; ++t) {
      p *= std::exp(0.01 * stream.gaussian());
      char date[40];
      std::snprintf(date, sizeof(date), "2004-%02d-%02d", 1 + day / 28, 1 + day % 28);
      ++day;
      out << date << ',' << infoflow::format_double(p) << ",100.0\n";
    }
  }
  const int code = run_cli("analyze --input " + path.string() + " --scales 1 --lags 1 --out " +
                           (root_ / "deg").string());
  EXPECT_EQ(code, 4);
  // outputs exist but the run is flagged degenerate
  EXPECT_TRUE(fs::exists(root_ / "deg" / "fr_curves.csv"));
}

TEST_F(CliTest, SynthChainFixture) {
  const fs::path spec = root_ / "chain.spec";
  {
    std::ofstream out(spec);
    out << "# A -> B -> C chain\n"
        << "n_tickers = 3\n"
        << "horizon = 2000\n"
        << "noise_sigma = 1.0\n"
        << "seed = 10\n"
        << "coupling = 0,1,1,0.8\n"
        << "coupling = 1,2,1,0.8\n";
  }
  const fs::path out = root_ / "chain";
  ASSERT_EQ(run_cli("synth --spec " + spec.string() + " --scales 1 --lags 1 --out " +
                    out.string()),
            0);
  const std::string truth = slurp(out / "truth.csv");
  EXPECT_NE(truth.find("S000,S001,1,"), std::string::npos);
  EXPECT_NE(truth.find("S001,S002,1,"), std::string::npos);
  const std::string pairs = slurp(out / "pairs.csv");
  EXPECT_NE(pairs.find("S000,S001,1,1,oneway_xy"), std::string::npos);
  EXPECT_NE(pairs.find("S001,S002,1,1,oneway_xy"), std::string::npos);

  // same spec and seed: byte-identical rerun
  const fs::path out2 = root_ / "chain2";
  ASSERT_EQ(run_cli("synth --spec " + spec.string() + " --scales 1 --lags 1 --out " +
                    out2.string()),
            0);
  for (const char* name : {"fr_curves.csv", "pairs.csv", "apen.csv", "truth.csv",
                           "manifest.json"}) {
    EXPECT_EQ(slurp(out / name), slurp(out2 / name)) << name;
  }
}

TEST_F(CliTest, SynthNullCalibrationAcrossCells) {
  const fs::path spec = root_ / "null.spec";
  {
    std::ofstream out(spec);
    out << "n_tickers = 50\nhorizon = 750\nnoise_sigma = 1.0\nseed = 99\n";
  }
  const fs::path out = root_ / "null";
  ASSERT_EQ(run_cli("synth --spec " + spec.string() + " --scales 1:3 --lags 1:2 --out " +
                    out.string() + " --format csv"),
            0);
  const std::string fr = slurp(out / "fr_curves.csv");
  std::istringstream in(fr);
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line[0] == 'k') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    ASSERT_EQ(cells.size(), 9u);
    const double fr_oneway = std::stod(cells[3]);
    EXPECT_NEAR(fr_oneway, 2 * 0.05 * 0.95, 0.03) << line;
    ++rows;
  }
  EXPECT_EQ(rows, 6);
  EXPECT_FALSE(fs::exists(out / "fr_curves.json"));  // csv-only run
}

TEST_F(CliTest, ConfigFileWithFlagOverride) {
  const auto input = write_price_csv("panel.csv", 130, 3, 7);
  const fs::path cfg = root_ / "run.cfg";
  {
    std::ofstream out(cfg);
    out << "alpha=0.2\nscales=1:2\nlags=1\n";
  }
  const fs::path out1 = root_ / "cfg1";
  ASSERT_EQ(run_cli("analyze --input " + input.string() + " --config " + cfg.string() +
                    " --out " + out1.string()),
            0);
  EXPECT_EQ(count_data_lines(slurp(out1 / "fr_curves.csv")), 2u);  // 2 scales x 1 lag
  EXPECT_NE(slurp(out1 / "manifest.json").find("\"alpha\": 0.2"), std::string::npos);

  // flags win over the config file
  const fs::path out2 = root_ / "cfg2";
  ASSERT_EQ(run_cli("analyze --input " + input.string() + " --config " + cfg.string() +
                    " --alpha 0.1 --scales 1 --out " + out2.string()),
            0);
  EXPECT_EQ(count_data_lines(slurp(out2 / "fr_curves.csv")), 1u);
  EXPECT_NE(slurp(out2 / "manifest.json").find("\"alpha\": 0.1"), std::string::npos);
}

TEST_F(CliTest, ShuffleTestWritesBothRuns) {
  const auto input = write_price_csv("panel.csv", 130, 4, 5);
  const fs::path out = root_ / "st";
  ASSERT_EQ(run_cli("shuffle-test --input " + input.string() +
                    " --scales 1 --lags 1 --seed 9 --out " + out.string()),
            0);
  EXPECT_TRUE(fs::exists(out / "original" / "fr_curves.csv"));
  EXPECT_TRUE(fs::exists(out / "shuffled" / "fr_curves.csv"));
  const std::string orig_manifest = slurp(out / "original" / "manifest.json");
  const std::string shuf_manifest = slurp(out / "shuffled" / "manifest.json");
  EXPECT_NE(orig_manifest.find("\"shuffle\": false"), std::string::npos);
  EXPECT_NE(shuf_manifest.find("\"shuffle\": true"), std::string::npos);
}

TEST_F(CliTest, DropIncompleteWarnsAndProceeds) {
  const fs::path path = root_ / "gappy.csv";
  {
    std::ofstream out(path);
    out << "date,GOOD,GAPPY\n";
    infoflow::Stream stream(8);
    double p = 80.0;
    int year = 2004, month = 1, day = 1;
    for (int t = 0; t < 130; ++t) {
      char date[40];
      std::snprintf(date, sizeof(date), "%04d-%02d-%02d", year, month, day);
      if (++day > 28) {
        day = 1;
        if (++month > 12) {
          month = 1;
          ++year;
        }
      }
      p *= std::exp(0.01 * stream.gaussian());
      out << date << ',' << infoflow::format_double(p);
      if (t == 60) {
        out << ",\n";  // one missing cell
      } else {
        out << ",55.5\n";
      }
    }
  }
  // without the flag: data error; with it: proceeds on the remaining ticker,
  // which then fails the sweep (need >= 2 tickers) -> still a data error.
  EXPECT_EQ(run_cli("analyze --input " + path.string() + " --scales 1 --lags 1 --out " +
                    (root_ / "g1").string()),
            3);
  EXPECT_EQ(run_cli("analyze --input " + path.string() +
                    " --drop-incomplete --scales 1 --lags 1 --out " + (root_ / "g2").string()),
            3);
}
