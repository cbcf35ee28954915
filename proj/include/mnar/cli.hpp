#ifndef MNAR_CLI_HPP
#define MNAR_CLI_HPP

#include <iosfwd>

namespace mnar {

// Exit codes: 0 success, 1 runtime or experiment failure, 2 usage or
// validation error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// Entry point behind the `mnar` executable:
//   mnar simulate  --preset table1 --out DIR
//   mnar fit       --input strata.csv --out DIR
//   mnar verify    example1|lemma1|identity|consistency|all
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mnar

#endif  // MNAR_CLI_HPP
