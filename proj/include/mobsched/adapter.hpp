#pragma once

#include <csignal>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

#include <fcntl.h>
#include <poll.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "simtarget.hpp"

namespace mobsched {

// Recoverable per-execution failure: malformed reply, bad field, timeout.
// The engine retries the input once and then skips the seed.
struct AdapterError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The harness process is gone; the campaign aborts with a resumable snapshot.
struct AdapterDead : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Speaks the harness protocol over a child process's stdio: each request is
// a 4-byte little-endian length followed by the raw input bytes; each reply
// is one JSON line with edges, exec_cost_us, stack_bytes and cmp_matched.
class AdapterProcess {
public:
    explicit AdapterProcess(const std::string& command, int timeout_ms = 2000)
        : command_(command), timeout_ms_(timeout_ms) {
        spawn();
    }

    AdapterProcess(const AdapterProcess&) = delete;
    AdapterProcess& operator=(const AdapterProcess&) = delete;

    ~AdapterProcess() { shutdown(); }

    const std::string& command() const { return command_; }

    ExecutionRecord execute_once(const std::vector<std::uint8_t>& input) {
        if (pid_ < 0) throw AdapterDead("adapter process is not running");
        std::uint8_t header[4];
        const auto len = static_cast<std::uint32_t>(input.size());
        for (int i = 0; i < 4; ++i) header[i] = static_cast<std::uint8_t>(len >> (8 * i));
        write_all(header, 4);
        if (!input.empty()) write_all(input.data(), input.size());
        const std::string line = read_line();
        return parse_reply(line);
    }

private:
    void spawn() {
        int to_child[2], from_child[2];
        if (pipe(to_child) != 0 || pipe(from_child) != 0)
            throw std::runtime_error("adapter: pipe failed");
        pid_ = fork();
        if (pid_ < 0) throw std::runtime_error("adapter: fork failed");
        if (pid_ == 0) {
            // own process group so shutdown can reap whatever the shell forks
            setpgid(0, 0);
            dup2(to_child[0], STDIN_FILENO);
            dup2(from_child[1], STDOUT_FILENO);
            close(to_child[0]);
            close(to_child[1]);
            close(from_child[0]);
            close(from_child[1]);
            execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
            _exit(127);
        }
        close(to_child[0]);
        close(from_child[1]);
        setpgid(pid_, pid_);  // loses the race only after the child did it itself
        in_fd_ = to_child[1];
        out_fd_ = from_child[0];
        signal(SIGPIPE, SIG_IGN);
    }

    void shutdown() {
        if (in_fd_ >= 0) close(in_fd_);
        if (out_fd_ >= 0) close(out_fd_);
        in_fd_ = out_fd_ = -1;
        if (pid_ > 0) {
            kill(-pid_, SIGKILL);  // the whole group: sh -c may fork instead of exec
            kill(pid_, SIGKILL);
            int status = 0;
            waitpid(pid_, &status, 0);
            pid_ = -1;
        }
    }

    void write_all(const std::uint8_t* data, std::size_t n) {
        std::size_t written = 0;
        while (written < n) {
            const ssize_t r = write(in_fd_, data + written, n - written);
            if (r <= 0) {
                shutdown();
                throw AdapterDead("adapter: write failed (harness exited?)");
            }
            written += static_cast<std::size_t>(r);
        }
    }

    std::string read_line() {
        while (true) {
            const std::size_t nl = buffer_.find('\n');
            if (nl != std::string::npos) {
                std::string line = buffer_.substr(0, nl);
                buffer_.erase(0, nl + 1);
                return line;
            }
            pollfd pfd{out_fd_, POLLIN, 0};
            const int pr = poll(&pfd, 1, timeout_ms_);
            if (pr == 0) throw AdapterError("adapter: reply timeout");
            if (pr < 0) throw AdapterError("adapter: poll failed");
            char chunk[4096];
            const ssize_t r = read(out_fd_, chunk, sizeof chunk);
            if (r == 0) {
                shutdown();
                throw AdapterDead("adapter: harness closed its output");
            }
            if (r < 0) throw AdapterError("adapter: read failed");
            buffer_.append(chunk, static_cast<std::size_t>(r));
        }
    }

    static ExecutionRecord parse_reply(const std::string& line) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw AdapterError(std::string("adapter: malformed reply: ") + e.what());
        }
        ExecutionRecord rec;
        try {
            rec.edges = j.at("edges").get<std::vector<std::uint32_t>>();
            rec.exec_cost_us = j.at("exec_cost_us").get<std::uint64_t>();
            rec.stack_bytes = j.at("stack_bytes").get<std::uint64_t>();
            rec.cmp_matched = j.at("cmp_matched").get<std::uint64_t>();
        } catch (const nlohmann::json::exception& e) {
            throw AdapterError(std::string("adapter: reply missing field: ") + e.what());
        }
        for (std::uint32_t e : rec.edges)
            if (e >= kMapSize)
                throw AdapterError("adapter: reply claims edge " + std::to_string(e) +
                                   " beyond map size");
        if (rec.exec_cost_us == 0) throw AdapterError("adapter: exec_cost_us must be positive");
        return rec;
    }

    std::string command_;
    int timeout_ms_;
    pid_t pid_ = -1;
    int in_fd_ = -1;
    int out_fd_ = -1;
    std::string buffer_;
};

}  // namespace mobsched
