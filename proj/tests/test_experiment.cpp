#include "doctest.h"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "json.hpp"
#include "readcx/complexity.hpp"
#include "readcx/error.hpp"
#include "readcx/experiment.hpp"
#include "readcx/gaze.hpp"
#include "support.hpp"

using namespace readcx;
namespace fs = std::filesystem;

namespace {

// A small synthetic language: random trees over a 50-word vocabulary, a
// lexicon for that vocabulary, and metrics that follow sentence length.
struct Workspace {
  testing::TempDir dir;
  std::vector<ProfileRow> profiles;

  explicit Workspace(std::size_t n = 100, std::uint64_t seed = 1) {
    std::mt19937_64 rng(seed);
    Document doc;
    doc.lang = "en";
    for (std::size_t i = 0; i < n; ++i) {
      Sentence s;
      do {
        s = testing::random_tree(rng, 3 + static_cast<int>(uniform_below(rng, 25)), fixtures::sid(i));
      } while (word_count(s) == 0);
      s.lang = "en";
      doc.sentences.push_back(s);
    }
    std::ostringstream conllu;
    write_conllu(doc, conllu);
    dir.write("en.conllu", conllu.str());

    std::ostringstream lex;
    FrequencyLexicon lexicon("en");
    for (int w = 0; w < 50; ++w) {
      const double z = 1.0 + 6.0 * uniform01(rng);
      lex << 'w' << w << '\t' << z << '\n';
    }
    dir.write("en.tsv", lex.str());
    profiles = profile_document(doc, load_lexicon_file((dir / "en.tsv").string(), "en"));

    std::ostringstream metrics;
    write_metrics_csv(fixtures::length_metrics(profiles, 0.5, seed + 1), metrics);
    dir.write("en_metrics.csv", metrics.str());
  }

  std::string path(const std::string& name) const { return (dir / name).string(); }

  std::string base_config(const std::string& pipeline) const {
    return "pipeline = " + pipeline + "\nseed = 3\nfolds = 5\nlanguages = en\n" + "conllu.en = " + path("en.conllu") +
           "\nlexicon.en = " + path("en.tsv") + "\nmetrics.en = " + path("en_metrics.csv") +
           "\noutput_dir = " + path("out") + "\n";
  }
};

ExperimentConfig config(const std::string& text) {
  std::istringstream in(text);
  return ExperimentConfig::parse(in);
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

ErrorKind run_error(const std::string& config_text) {
  try {
    run_experiment(config(config_text));
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Io;
}

int cli(const std::string& args) {
  const std::string cmd = std::string(READCX_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_SUITE("experiment") {
  TEST_CASE("config parsing") {
    const auto cfg = config("# comment\npipeline = svr\nseed=7\nlanguages = en, fi tr\n\n");
    CHECK(cfg.get("pipeline") == "svr");
    CHECK(cfg.get_int("seed", 0) == 7);
    CHECK(cfg.get_list("languages") == std::vector<std::string>{"en", "fi", "tr"});
    CHECK(cfg.get_or("missing", "x") == "x");
    CHECK(cfg.get_bool("flag", true));
    CHECK_FALSE(cfg.has("folds"));

    try {
      config("a = 1\na = 2\n");
      FAIL("expected error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
    }
    CHECK_THROWS_AS(config("no equals sign\n"), ParseError);
    CHECK_THROWS_AS(config("bad key! = 1\n"), ParseError);
    try {
      cfg.get("output_dir");
      FAIL("expected error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Config);
      CHECK(std::string(e.what()).find("output_dir") != std::string::npos);
    }
    CHECK_THROWS_AS(config("seed = seven\n").get_int("seed", 0), Error);
    CHECK_THROWS_AS(config("x = maybe\n").get_bool("x", false), Error);
  }

  TEST_CASE("svr pipeline writes a complete bundle") {
    Workspace ws;
    const auto cfg = config(ws.base_config("svr") + "feature_group = LENGTH\n");
    const auto result = run_experiment(cfg);
    CHECK(result.output_dir == fs::path(ws.path("out")));
    CHECK_FALSE(fs::exists(ws.path("out.partial")));
    for (const char* f : {"scores.csv", "svr_subsets.csv", "correlations_en.csv", "manifest.json"})
      CHECK(fs::exists(ws.dir / ("out/" + std::string(f))));

    const auto rows = csv_rows(testing::read_file(ws.dir / "out/scores.csv"));
    REQUIRE(rows.size() == 1 + 4 * 6);
    CHECK(rows[0] == std::vector<std::string>{"language", "metric", "condition", "fold", "explained_variance",
                                              "r_squared", "n"});
    int fold_rows = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      CHECK(rows[i][2] == "LENGTH");
      if (rows[i][3] != "mean") {
        ++fold_rows;
        CHECK(std::stod(rows[i][4]) > 0.8);  // metrics follow length closely
      }
    }
    CHECK(fold_rows == 20);
    CHECK(csv_rows(testing::read_file(ws.dir / "out/svr_subsets.csv")).size() == 1 + 4 * 4);

    const auto manifest = nlohmann::json::parse(testing::read_file(ws.dir / "out/manifest.json"));
    CHECK(manifest["pipeline"] == "svr");
    CHECK(manifest["seed"] == 3);
    CHECK(manifest["version"] == kVersion);
    CHECK(manifest["derived_seeds"]["folds"] == derive_seed(3, 1));
    CHECK(manifest["config"]["feature_group"] == "LENGTH");
  }

  TEST_CASE("same config, same bundle") {
    Workspace ws;
    const auto cfg = config(ws.base_config("svr"));
    run_experiment(cfg);
    std::map<std::string, std::string> first;
    for (const auto& e : fs::directory_iterator(ws.dir / "out")) first[e.path().filename().string()] = testing::read_file(e.path());
    run_experiment(cfg);
    for (const auto& [name, content] : first) {
      auto again = testing::read_file(ws.dir / ("out/" + name));
      if (name == "manifest.json") {
        auto a = nlohmann::json::parse(content);
        auto b = nlohmann::json::parse(again);
        a.erase("created");
        b.erase("created");
        CHECK(a == b);
      } else {
        CHECK(again == content);
      }
    }
  }

  TEST_CASE("baseline pipeline scores below zero") {
    Workspace ws(150, 4);
    run_experiment(config(ws.base_config("baseline") + "baseline_runs = 3\nfeature_group = LENGTH\n"));
    const auto rows = csv_rows(testing::read_file(ws.dir / "out/baseline_summary.csv"));
    REQUIRE(rows.size() == 5);
    for (std::size_t i = 1; i < rows.size(); ++i) {
      CHECK(std::stod(rows[i][2]) < 0.0);
      CHECK(std::stod(rows[i][3]) < 0.0);
      CHECK(rows[i][4] == "3");
    }
  }

  TEST_CASE("probe pipeline recovers encoded features") {
    Workspace ws(100, 5);
    const auto pre = fixtures::noise_embeddings(ws.profiles, 8, 6);
    const auto ft = fixtures::encoding_embeddings(ws.profiles, {0, 1}, 8, 7);
    write_embeddings_file(pre, ws.path("pre.tsv"));
    write_embeddings_file(ft, ws.path("ft.tsv"));
    const std::string cfg = ws.base_config("probe") + "embeddings_pre.en = " + ws.path("pre.tsv") +
                            "\nembeddings_ft.en = " + ws.path("ft.tsv") +
                            "\nprobe.train_size = 80\nprobe.test_size = 20\nprobe.epochs = 60\n";
    run_experiment(config(cfg));
    const auto rows = csv_rows(testing::read_file(ws.dir / "out/probe_report.csv"));
    REQUIRE(rows.size() == 10);
    CHECK(rows[1][0] == "sentence_length");
    // Fine-tuned R^2 is near one; the noise probe can score below zero on
    // 80 training rows, so the deltas are only bounded from below.
    for (int r : {1, 2}) {
      CHECK(std::stod(rows[r][2]) == doctest::Approx(1.0).epsilon(0.05));
      CHECK(std::stod(rows[r][3]) > 0.9);
    }
    CHECK(rows[1][4] == "en");
  }

  TEST_CASE("head and scramble-eval pipelines") {
    Workspace ws(100, 8);
    const auto emb = fixtures::encoding_embeddings(ws.profiles, {0}, 6, 9);
    write_embeddings_file(emb, ws.path("emb.tsv"));
    // Scrambled vectors keep length (coordinate 0) but are otherwise fresh noise.
    EmbeddingSet scrambled(6, "scrambled");
    const auto noise = fixtures::noise_embeddings(ws.profiles, 6, 10);
    for (const auto& r : ws.profiles) {
      auto v = noise.at(r.sentence_id);
      v[0] = emb.at(r.sentence_id)[0];
      scrambled.add(r.sentence_id + "-scrambled", v);
    }
    write_embeddings_file(scrambled, ws.path("scr.tsv"));
    const std::string head_keys = "embeddings.en = " + ws.path("emb.tsv") + "\nhead.lr = 0.05\nhead.epochs = 40\n";

    run_experiment(config(ws.base_config("head") + head_keys));
    auto rows = csv_rows(testing::read_file(ws.dir / "out/scores.csv"));
    REQUIRE(rows.size() == 1 + 4 * 6);
    CHECK(rows[1][2] == "embeddings");

    run_experiment(config(ws.base_config("scramble-eval") + head_keys +
                                           "embeddings_scrambled.en = " + ws.path("scr.tsv") + "\n"));
    rows = csv_rows(testing::read_file(ws.dir / "out/scores.csv"));
    REQUIRE(rows.size() == 1 + 2 * 4 * 6);
    std::map<std::string, int> conditions;
    for (std::size_t i = 1; i < rows.size(); ++i) ++conditions[rows[i][2]];
    CHECK(conditions["normal"] == 24);
    CHECK(conditions["scrambled"] == 24);
  }

  TEST_CASE("configuration errors leave nothing behind") {
    Workspace ws;
    std::string cfg = ws.base_config("svr");
    const std::string without_lexicon = cfg.substr(0, cfg.find("lexicon.en")) + cfg.substr(cfg.find("metrics.en"));
    try {
      run_experiment(config(without_lexicon));
      FAIL("expected error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Config);
      CHECK(std::string(e.what()).find("lexicon.en") != std::string::npos);
    }
    CHECK_FALSE(fs::exists(ws.path("out")));
    CHECK_FALSE(fs::exists(ws.path("out.partial")));

    CHECK(run_error("pipeline = magic\nlanguages = en\noutput_dir = " + ws.path("o") + "\n") == ErrorKind::Config);
    CHECK(run_error(ws.base_config("svr") + "folds = 1\n") == ErrorKind::Parse);  // duplicate key
    std::string one_fold = cfg;
    one_fold.replace(one_fold.find("folds = 5"), 9, "folds = 1");
    CHECK(run_error(one_fold) == ErrorKind::Config);
    CHECK(run_error(ws.base_config("probe")) == ErrorKind::Config);
    CHECK_FALSE(fs::exists(ws.path("out")));
  }

  TEST_CASE("relative paths resolve against the config file") {
    Workspace ws;
    ws.dir.write("run.cfg", "pipeline = svr\nlanguages = en\nconllu.en = en.conllu\nlexicon.en = en.tsv\n"
                            "metrics.en = en_metrics.csv\noutput_dir = rel_out\n");
    const auto result = run_experiment(ExperimentConfig::load(ws.dir / "run.cfg"));
    CHECK(fs::exists(ws.dir / "rel_out/scores.csv"));
    CHECK(result.files.size() == 4);
  }
}

TEST_SUITE("cli") {
  TEST_CASE("exit codes") {
    Workspace ws;
    CHECK(cli("--help") == 0);
    CHECK(cli("profile --corpus " + ws.path("en.conllu") + " --lang en --lexicon " + ws.path("en.tsv") + " -o " +
              ws.path("profiles.csv")) == 0);
    CHECK(fs::exists(ws.path("profiles.csv")));
    CHECK(cli("") != 0);
    CHECK(cli("no-such-command") == 1);
    CHECK(cli("profile --lang en") == 1);  // missing --corpus
    ws.dir.write("broken.conllu", "1\tword\n");
    CHECK(cli("profile --corpus " + ws.path("broken.conllu") + " --lang en") == 1);
    CHECK(cli("profile --corpus " + ws.path("en.conllu") + " --lang en --lexicon " + ws.path("en.tsv") + " -o " + ws.path("missing/dir/p.csv")) == 2);
    ws.dir.write("flat.csv", "sentence_id,fixation_count,total_fixation_duration,first_pass_duration,regression_duration\n"
                             "a,1,100,100,0\nb,1,100,100,0\n");
    ws.dir.write("flat.cfg", "pipeline = svr\nlanguages = en\nconllu.en = en.conllu\nlexicon.en = en.tsv\n"
                             "metrics.en = flat.csv\noutput_dir = flat_out\n");
    CHECK(cli("run --config " + ws.path("flat.cfg")) == 2);  // constant metrics cannot be scaled
  }

  TEST_CASE("scramble and train-svr round trip through files") {
    Workspace ws;
    CHECK(cli("scramble --corpus " + ws.path("en.conllu") + " --lang en --seed 4 -o " + ws.path("a.txt")) == 0);
    CHECK(cli("scramble --corpus " + ws.path("en.conllu") + " --lang en --seed 4 -o " + ws.path("b.txt")) == 0);
    CHECK(testing::read_file(ws.dir / "a.txt") == testing::read_file(ws.dir / "b.txt"));
    CHECK(cli("scramble --corpus " + ws.path("en.conllu") + " --lang en") == 1);  // seed is required

    CHECK(cli("profile --corpus " + ws.path("en.conllu") + " --lang en --lexicon " + ws.path("en.tsv") + " -o " +
              ws.path("p.csv")) == 0);
    CHECK(cli("train-svr --profiles " + ws.path("p.csv") + " --metrics " + ws.path("en_metrics.csv") +
              " --metric total_fixation_duration --group LENGTH -o " + ws.path("m.json")) == 0);
    const auto model = nlohmann::json::parse(testing::read_file(ws.dir / "m.json"));
    CHECK(model["target"] == "total_fixation_duration");
    CHECK(cli("evaluate --model " + ws.path("m.json") + " --metrics " + ws.path("en_metrics.csv") + " --profiles " +
              ws.path("p.csv") + " --group LENGTH -o " + ws.path("eval.csv")) == 0);
    CHECK(cli("evaluate --model " + ws.path("m.json") + " --metrics " + ws.path("en_metrics.csv") + " --profiles " +
              ws.path("p.csv") + " --group ALL") == 1);  // width mismatch
  }
}
