#pragma once

#include <string>
#include <vector>

namespace labsearch::cli {

enum ExitCode : int {
  kSuccess = 0,
  kConfigError = 2,
  kPartialFailure = 3,
  kTotalFailure = 4,
};

// Subcommands: annotate | train-ngram | decode | select | evaluate | bench.
// Errors are reported on stderr as one JSON record.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);  // args exclude the program name

}  // namespace labsearch::cli
