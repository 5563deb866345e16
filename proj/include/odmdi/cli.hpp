#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "odmdi/verify.hpp"

namespace odmdi::cli {

// Exit codes.
constexpr int kOk = 0;
constexpr int kVerifyFailed = 1;
constexpr int kUsageError = 2;
constexpr int kIoError = 3;

// Runs the command line `args` (args[0] is the program name). `rules` lets
// tests inject faulty table rules into verify-tables.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        const verify::TableRules& rules = {});

}  // namespace odmdi::cli
