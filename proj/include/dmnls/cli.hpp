#pragma once

namespace dmnls::cli {

// Entry point behind the `dmnls` binary. Subcommands: simulate, sweep,
// groundstate, blowup, validate. Each reads one JSON config (--config),
// writes artifacts under --out (manifest.json, results.csv, and per-command
// extras), and returns 0 on success, 1 on a validation/runtime failure, 2 on
// a config error (unknown key, bad type, violated constraint). SIGINT flushes
// partial outputs, marks the manifest "aborted", and returns 130.
int run(int argc, const char* const* argv);

}  // namespace dmnls::cli
