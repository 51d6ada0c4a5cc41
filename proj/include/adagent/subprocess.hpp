#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace adagent {

struct ProcessSpec {
    std::vector<std::string> argv; // argv[0] = program, resolved via PATH
    std::filesystem::path working_dir; // empty = inherit
    std::vector<std::pair<std::string, std::string>> extra_env;
    double timeout_s = 0.0;    // 0 = unlimited
    double kill_grace_s = 5.0; // SIGKILL this long after the timeout SIGTERM
};

struct ProcessResult {
    bool spawn_failed = false; // interpreter missing, fork failure, ...
    std::string spawn_error;
    int exit_code = -1;
    bool timed_out = false;
    bool signaled = false;
    int term_signal = 0;
    std::string stdout_text;
    std::string stderr_text;
    double duration_s = 0.0;

    bool ok() const { return !spawn_failed && !timed_out && !signaled && exit_code == 0; }
};

// Runs argv in a child process group, capturing stdout/stderr, enforcing the
// timeout with SIGTERM and a SIGKILL backstop on the whole group.
ProcessResult run_process(const ProcessSpec& spec);

// Whitespace-split of an interpreter command ("python3 -u" -> {python3, -u}).
std::vector<std::string> split_command(const std::string& command);

} // namespace adagent
