#pragma once

// Helpers for driving the installed CLI binary from tests. The binary path
// arrives via the BLIP_CLI environment variable (set by ctest).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

namespace cli {

struct Result {
  int exit_code = -1;
  std::string out;
  std::string err;
};

inline std::string binary_path() {
  const char* env = std::getenv("BLIP_CLI");
  if (env == nullptr || *env == '\0')
    throw std::runtime_error("BLIP_CLI is not set; run through ctest");
  return env;
}

inline std::filesystem::path make_temp_dir(const std::string& tag) {
  static std::mt19937_64 rng(std::random_device{}());
  const auto base = std::filesystem::temp_directory_path();
  const auto dir = base / ("blip-" + tag + "-" + std::to_string(rng()));
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Result run(const std::string& args) {
  const auto dir = make_temp_dir("run");
  const auto out_path = dir / "stdout.txt";
  const auto err_path = dir / "stderr.txt";
  const std::string command = "\"" + binary_path() + "\" " + args + " > \"" +
                              out_path.string() + "\" 2> \"" +
                              err_path.string() + "\"";
  const int status = std::system(command.c_str());
  Result result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.out = slurp(out_path);
  result.err = slurp(err_path);
  std::filesystem::remove_all(dir);
  return result;
}

}  // namespace cli
