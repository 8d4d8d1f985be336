#pragma once

#include <sys/types.h>
#include <sys/wait.h>
#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <csignal>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <span>
#include <string>

#include "pseudobo/errors.hpp"

namespace pseudobo {

/// Long-lived child process speaking the line protocol: one point per line
/// on its stdin (space-separated decimals), one value per line on stdout.
class ExternalObjective {
public:
    explicit ExternalObjective(std::string command) : command_(std::move(command)) {
        // A dead child must surface as a write error, not kill the process.
        std::signal(SIGPIPE, SIG_IGN);
        int to_child[2];
        int from_child[2];
        if (pipe2(to_child, O_CLOEXEC) != 0) throw ObjectiveError("pipe() failed");
        if (pipe2(from_child, O_CLOEXEC) != 0) {
            close(to_child[0]);
            close(to_child[1]);
            throw ObjectiveError("pipe() failed");
        }
        pid_ = fork();
        if (pid_ < 0) throw ObjectiveError("fork() failed");
        if (pid_ == 0) {
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
        in_ = fdopen(to_child[1], "w");
        out_ = fdopen(from_child[0], "r");
        if (!in_ || !out_) throw ObjectiveError("fdopen() failed");
    }

    ExternalObjective(const ExternalObjective&) = delete;
    ExternalObjective& operator=(const ExternalObjective&) = delete;

    ~ExternalObjective() {
        if (in_) std::fclose(in_);
        if (out_) std::fclose(out_);
        if (pid_ > 0) {
            int status = 0;
            waitpid(pid_, &status, 0);
        }
    }

    double operator()(std::span<const double> x) {
        std::string line;
        char buf[64];
        for (std::size_t i = 0; i < x.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", x[i]);
            if (i) line += ' ';
            line += buf;
        }
        line += '\n';
        const bool wrote = std::fputs(line.c_str(), in_) >= 0 && std::fflush(in_) == 0;
        if (!wrote) throw ObjectiveError("external objective '" + command_ + "' closed its input");

        std::string reply;
        int c;
        while ((c = std::fgetc(out_)) != EOF && c != '\n') reply += static_cast<char>(c);
        if (c == EOF && reply.empty())
            throw ObjectiveError("external objective '" + command_ + "' produced no value");
        const char* begin = reply.c_str();
        char* end = nullptr;
        errno = 0;
        const double v = std::strtod(begin, &end);
        while (end && (*end == ' ' || *end == '\t' || *end == '\r')) ++end;
        if (end == begin || (end && *end != '\0'))
            throw ObjectiveError("external objective '" + command_ + "' returned unparsable value '" + reply + "'");
        return v;
    }

private:
    std::string command_;
    pid_t pid_ = -1;
    FILE* in_ = nullptr;
    FILE* out_ = nullptr;
};

}  // namespace pseudobo
