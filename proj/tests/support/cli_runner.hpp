#pragma once

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "support/test_support.hpp"

namespace mhc::test {

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;

  std::string first_line() const {
    auto pos = out.find('\n');
    return pos == std::string::npos ? out : out.substr(0, pos);
  }
};

/// Runs the installed CLI binary with shell-joined arguments, capturing
/// stdout/stderr and the exit code. `env_prefix` may carry VAR=value pairs.
inline CliResult run_cli(const std::string& args, const std::string& env_prefix = "") {
  static TempDir capture_dir;
  static int counter = 0;
  auto out_path = capture_dir.file("out_" + std::to_string(counter));
  auto err_path = capture_dir.file("err_" + std::to_string(counter));
  counter += 1;

  std::string command = env_prefix + (env_prefix.empty() ? "" : " ") + MHC_CLI_PATH +
                        " " + args + " >" + out_path.string() + " 2>" +
                        err_path.string();
  int status = std::system(command.c_str());

  CliResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  auto slurp = [](const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  result.out = slurp(out_path);
  result.err = slurp(err_path);
  return result;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

}  // namespace mhc::test
