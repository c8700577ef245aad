#pragma once

#include <functional>
#include <ostream>
#include <string_view>

namespace bladetrack::cli {

inline constexpr std::string_view kToolVersion = "0.1.0";

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kIoFailure = 1;
inline constexpr int kInvalid = 2;

// Runs one invocation of the tool. Normal output goes to `out`, diagnostics
// to `err`; the return value is the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Worker count for parallel stages: hardware concurrency, capped by a
// positive integer in BLADETRACK_THREADS.
unsigned worker_count();

// Calls fn(i) for i in [0, n) on up to worker_count() threads. If any call
// throws, the exception from the lowest index is rethrown after all workers
// finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace bladetrack::cli
