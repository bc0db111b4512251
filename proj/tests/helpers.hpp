#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include "rankfair/lexicon.hpp"

namespace testutil {

// Unique scratch directory, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    dir_ = std::filesystem::temp_directory_path() /
           ("rankfair_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(dir_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(dir_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return dir_; }
  std::filesystem::path file(const std::string& name) const { return dir_ / name; }

 private:
  std::filesystem::path dir_;
};

inline std::filesystem::path write_file(const std::filesystem::path& path,
                                        const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  return path;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// Binary uniform gender config with the given threshold.
inline rankfair::AttributeConfig gender_config(
    int tau, std::vector<std::string> female = {"she", "her", "woman", "mother"},
    std::vector<std::string> male = {"he", "him", "man", "his", "brother"}) {
  return rankfair::AttributeConfig::create_uniform(
      {rankfair::AttributeMember{"female", std::move(female)},
       rankfair::AttributeMember{"male", std::move(male)}},
      tau);
}

}  // namespace testutil
