#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "predex/relation.hpp"

namespace predex::testing {

// Five-row profile table used across the suite: two coupled categorical
// columns (Sex, Occupation), geography, and a repeat-visit prediction.
inline const char* kProfilesCsv =
    "Age,Sex,City,State,Occupation,M.predict(I)\n"
    "48,F,Mesa,AZ,Athlete,repeat\n"
    "45,F,Miami,FL,Artist,repeat\n"
    "46,M,Mesa,AZ,Writer,one-time\n"
    "40,M,Miami,FL,Athlete,repeat\n"
    "42,F,Miami,FL,Athlete,repeat\n";

inline Relation profiles() {
  std::istringstream in{std::string(kProfilesCsv)};
  return load_csv(in, {});
}

// Unique scratch directory under the system temp dir; removed on destruction.
class TempDir {
 public:
  TempDir() {
    auto base = std::filesystem::temp_directory_path();
    std::random_device rd;
    for (int i = 0; i < 64; ++i) {
      auto cand = base / ("predex-test-" + std::to_string(rd()));
      std::error_code ec;
      if (std::filesystem::create_directory(cand, ec)) {
        path_ = cand;
        return;
      }
    }
    throw std::runtime_error("TempDir: could not create scratch directory");
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path file(const std::string& name) const { return path_ / name; }

  std::filesystem::path write(const std::string& name, const std::string& content) const {
    auto p = path_ / name;
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << content;
    return p;
  }

 private:
  std::filesystem::path path_;
};

}  // namespace predex::testing
