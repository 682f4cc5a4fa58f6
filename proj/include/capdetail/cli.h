#ifndef CAPDETAIL_CLI_H_
#define CAPDETAIL_CLI_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace capdetail {

// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidationFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitPartialFailure = 3;

// Runs one subcommand (validate, annotate, score, filter, sample, analyze)
// and returns its exit code. Diagnostics go to err, listings to out.
int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err);

}  // namespace capdetail

#endif  // CAPDETAIL_CLI_H_
