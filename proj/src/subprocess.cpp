#include "adagent/subprocess.hpp"

#include <cerrno>
#include <chrono>
#include <csignal>
#include <cstring>
#include <sstream>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

namespace adagent {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

bool read_chunk(int fd, std::string& sink) {
    char buf[4096];
    for (;;) {
        const ssize_t n = ::read(fd, buf, sizeof(buf));
        if (n > 0) {
            sink.append(buf, static_cast<std::size_t>(n));
            if (n < static_cast<ssize_t>(sizeof(buf))) return true;
            continue;
        }
        if (n == 0) return false; // EOF
        if (errno == EINTR) continue;
        if (errno == EAGAIN || errno == EWOULDBLOCK) return true;
        return false;
    }
}

void set_nonblocking(int fd) {
    const int flags = fcntl(fd, F_GETFL, 0);
    fcntl(fd, F_SETFL, flags | O_NONBLOCK);
}

} // namespace

std::vector<std::string> split_command(const std::string& command) {
    std::vector<std::string> out;
    std::istringstream in(command);
    std::string word;
    while (in >> word) out.push_back(word);
    return out;
}

ProcessResult run_process(const ProcessSpec& spec) {
    ProcessResult result;
    if (spec.argv.empty()) {
        result.spawn_failed = true;
        result.spawn_error = "empty argv";
        return result;
    }

    int out_pipe[2], err_pipe[2], status_pipe[2];
    if (pipe(out_pipe) != 0 || pipe(err_pipe) != 0 || pipe(status_pipe) != 0) {
        result.spawn_failed = true;
        result.spawn_error = std::strerror(errno);
        return result;
    }
    // the status pipe closes on a successful exec; otherwise carries errno
    fcntl(status_pipe[1], F_SETFD, FD_CLOEXEC);

    const auto started = Clock::now();
    const pid_t pid = fork();
    if (pid < 0) {
        result.spawn_failed = true;
        result.spawn_error = std::strerror(errno);
        for (int fd : {out_pipe[0], out_pipe[1], err_pipe[0], err_pipe[1], status_pipe[0],
                       status_pipe[1]})
            ::close(fd);
        return result;
    }

    if (pid == 0) {
        ::setpgid(0, 0); // own process group, so the timeout kill reaps helpers too
        ::close(out_pipe[0]);
        ::close(err_pipe[0]);
        ::close(status_pipe[0]);
        ::dup2(out_pipe[1], STDOUT_FILENO);
        ::dup2(err_pipe[1], STDERR_FILENO);
        ::close(out_pipe[1]);
        ::close(err_pipe[1]);

        if (!spec.working_dir.empty() && ::chdir(spec.working_dir.c_str()) != 0) {
            const int err = errno;
            (void)!::write(status_pipe[1], &err, sizeof(err));
            _exit(127);
        }
        for (const auto& [key, value] : spec.extra_env) ::setenv(key.c_str(), value.c_str(), 1);

        std::vector<char*> argv;
        argv.reserve(spec.argv.size() + 1);
        for (const auto& a : spec.argv) argv.push_back(const_cast<char*>(a.c_str()));
        argv.push_back(nullptr);
        ::execvp(argv[0], argv.data());
        const int err = errno;
        (void)!::write(status_pipe[1], &err, sizeof(err));
        _exit(127);
    }

    ::close(out_pipe[1]);
    ::close(err_pipe[1]);
    ::close(status_pipe[1]);
    set_nonblocking(out_pipe[0]);
    set_nonblocking(err_pipe[0]);

    // exec outcome
    int exec_errno = 0;
    {
        const ssize_t n = ::read(status_pipe[0], &exec_errno, sizeof(exec_errno));
        if (n == sizeof(exec_errno)) {
            result.spawn_failed = true;
            result.spawn_error = spec.argv[0] + ": " + std::strerror(exec_errno);
        }
    }
    ::close(status_pipe[0]);
    if (result.spawn_failed) {
        int status = 0;
        ::waitpid(pid, &status, 0);
        ::close(out_pipe[0]);
        ::close(err_pipe[0]);
        return result;
    }

    bool out_open = true, err_open = true;
    bool sent_term = false, sent_kill = false;
    for (;;) {
        struct pollfd fds[2];
        nfds_t nfds = 0;
        if (out_open) fds[nfds++] = {out_pipe[0], POLLIN, 0};
        if (err_open) fds[nfds++] = {err_pipe[0], POLLIN, 0};
        if (nfds == 0) break;

        const double elapsed = seconds_since(started);
        int wait_ms = 200;
        if (spec.timeout_s > 0.0 && !sent_term) {
            const double left = spec.timeout_s - elapsed;
            wait_ms = left <= 0 ? 0 : static_cast<int>(std::min(left * 1000.0, 200.0)) + 1;
        }
        const int rc = ::poll(fds, nfds, wait_ms);
        if (rc > 0) {
            for (nfds_t i = 0; i < nfds; ++i) {
                if (!(fds[i].revents & (POLLIN | POLLHUP))) continue;
                const bool is_out = fds[i].fd == out_pipe[0];
                const bool still_open =
                    read_chunk(fds[i].fd, is_out ? result.stdout_text : result.stderr_text);
                if (!still_open) {
                    if (is_out) out_open = false;
                    else err_open = false;
                }
            }
        }
        if (spec.timeout_s > 0.0) {
            const double now = seconds_since(started);
            if (!sent_term && now >= spec.timeout_s) {
                result.timed_out = true;
                ::kill(-pid, SIGTERM);
                sent_term = true;
            } else if (sent_term && !sent_kill && now >= spec.timeout_s + spec.kill_grace_s) {
                ::kill(-pid, SIGKILL);
                sent_kill = true;
            }
        }
    }
    ::close(out_pipe[0]);
    ::close(err_pipe[0]);

    int status = 0;
    // backstop: if the pipes closed but the group lingers past the grace
    // window, escalate before blocking in waitpid
    if (result.timed_out && !sent_kill) {
        while (::waitpid(pid, &status, WNOHANG) == 0) {
            if (seconds_since(started) >= spec.timeout_s + spec.kill_grace_s) {
                ::kill(-pid, SIGKILL);
                sent_kill = true;
                break;
            }
            ::usleep(20 * 1000);
        }
        if (sent_kill) ::waitpid(pid, &status, 0);
    } else {
        ::waitpid(pid, &status, 0);
    }

    result.duration_s = seconds_since(started);
    if (WIFEXITED(status)) {
        result.exit_code = WEXITSTATUS(status);
    } else if (WIFSIGNALED(status)) {
        result.signaled = true;
        result.term_signal = WTERMSIG(status);
    }
    return result;
}

} // namespace adagent
