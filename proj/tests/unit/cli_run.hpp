#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace clirun {

struct Output {
    int exit_code = -1;
    std::string out;
    std::string err;
};

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Runs the CLI with `args` (already shell-quoted), capturing both streams.
inline Output run(const std::string& args) {
    static int counter = 0;
    const auto dir = std::filesystem::temp_directory_path();
    const auto tag = std::to_string(::getpid()) + "_" + std::to_string(++counter);
    const auto out_path = dir / ("nontextpd_out_" + tag);
    const auto err_path = dir / ("nontextpd_err_" + tag);
    const std::string cmd = std::string("'") + NONTEXTPD_CLI + "' " + args + " >'" + out_path.string() + "' 2>'" +
                            err_path.string() + "'";
    const int status = std::system(cmd.c_str());
    Output o;
    o.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    o.out = slurp(out_path);
    o.err = slurp(err_path);
    std::filesystem::remove(out_path);
    std::filesystem::remove(err_path);
    return o;
}

inline std::string quote(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

} // namespace clirun
