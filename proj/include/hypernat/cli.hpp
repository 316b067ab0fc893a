#pragma once

namespace hypernat {

// Full CLI entry point; returns the process exit code.
// 0 = success, 1 = usage error, 2 = parse/validation error, 3 = runtime error.
int cli_run(int argc, const char* const* argv);

}  // namespace hypernat
