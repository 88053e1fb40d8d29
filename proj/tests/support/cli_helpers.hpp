// Helpers for driving the built CLI from tests.

#ifndef MFTR_TESTS_CLI_HELPERS_HPP
#define MFTR_TESTS_CLI_HELPERS_HPP

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

namespace cli {

struct Outcome {
    int exit_code = -1;
    std::string out;
    std::string err;
};

inline std::string cli_path() { return MFTR_CLI_PATH; }

inline Outcome run(const std::string& args) {
    const std::string errfile =
        std::string(std::tmpnam(nullptr)) + "_stderr.txt";
    const std::string cmd = cli_path() + " " + args + " 2>" + errfile;
    Outcome res;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return res;
    std::array<char, 4096> buf{};
    std::size_t got;
    while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) res.out.append(buf.data(), got);
    const int status = pclose(pipe);
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream ef(errfile, std::ios::binary);
    std::stringstream ss;
    ss << ef.rdbuf();
    res.err = ss.str();
    std::remove(errfile.c_str());
    return res;
}

inline std::string first_line(const std::string& s) {
    const auto pos = s.find('\n');
    return pos == std::string::npos ? s : s.substr(0, pos);
}

inline std::string line_at(const std::string& s, std::size_t idx) {
    std::istringstream is(s);
    std::string line;
    for (std::size_t i = 0; i <= idx; ++i)
        if (!std::getline(is, line)) return {};
    return line;
}

} // namespace cli

#endif
