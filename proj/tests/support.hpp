#pragma once

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "readcx/corpus.hpp"
#include "readcx/lexicon.hpp"
#include "readcx/random.hpp"

namespace testing {

using readcx::Upos;

struct Row {
  std::string surface;
  Upos upos;
  int head;
  std::string deprel;
};

inline readcx::Sentence sentence(std::string id, const std::vector<Row>& rows, std::string lang = "en") {
  readcx::Sentence s;
  s.id = std::move(id);
  s.lang = std::move(lang);
  int i = 0;
  for (const auto& r : rows) {
    ++i;
    s.tokens.push_back(readcx::make_token(i, r.surface, r.surface, r.upos, r.head, r.deprel));
  }
  return s;
}

inline std::string data_path(const std::string& rel) { return std::string(READCX_DATA_DIR) + "/" + rel; }

/// Random single-rooted tree over n tokens: token order is a random
/// permutation, each token after the first attaches to an earlier one in it.
inline readcx::Sentence random_tree(std::mt19937_64& rng, int n, const std::string& id = "r") {
  static const Upos kTags[] = {Upos::NOUN, Upos::VERB, Upos::ADJ, Upos::DET, Upos::ADP, Upos::PUNCT, Upos::ADV, Upos::PROPN};
  auto order = readcx::shuffled_indices(static_cast<std::size_t>(n), rng);
  std::vector<int> head(static_cast<std::size_t>(n) + 1, 0);
  for (int k = 1; k < n; ++k) {
    const auto parent = order[readcx::uniform_below(rng, static_cast<std::uint64_t>(k))];
    head[order[static_cast<std::size_t>(k)] + 1] = static_cast<int>(parent) + 1;
  }
  readcx::Sentence s;
  s.id = id;
  s.lang = "xx";
  for (int i = 1; i <= n; ++i) {
    const auto tag = kTags[readcx::uniform_below(rng, 8)];
    std::string surface = "w" + std::to_string(readcx::uniform_below(rng, 50));
    const bool cop = head[static_cast<std::size_t>(i)] != 0 && readcx::uniform_below(rng, 6) == 0;
    s.tokens.push_back(readcx::make_token(i, surface, surface, tag, head[static_cast<std::size_t>(i)],
                                          head[static_cast<std::size_t>(i)] == 0 ? "root" : (cop ? "cop" : "dep")));
  }
  return s;
}

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("readcx-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

  std::filesystem::path write(const std::string& name, const std::string& content) const {
    const auto p = path_ / name;
    std::ofstream(p, std::ios::binary) << content;
    return p;
  }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace testing
