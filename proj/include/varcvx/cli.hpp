#pragma once

// Command-line front end. Subcommands: check-vc, check-svc, check-nlp,
// envelope-scan, gallery. Exit codes: 0 holds, 1 fails, 2 inconclusive,
// 3 error (SpecInvalid, LicqFailed, solver errors, bad usage).

namespace varcvx::cli {

int run(int argc, const char* const* argv);

}  // namespace varcvx::cli
