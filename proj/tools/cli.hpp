#ifndef TDM_CLI_HPP
#define TDM_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace tdm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitRejectedDefs = 2;
inline constexpr int kExitNoMatch = 3;
inline constexpr int kExitCertificateRejected = 4;
inline constexpr int kExitCheckUnproven = 5;

/// Runs the tdm command line. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tdm::cli

#endif  // TDM_CLI_HPP
