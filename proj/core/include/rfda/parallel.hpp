#pragma once

#include <cstddef>
#include <functional>

namespace rfda {

/// Number of worker threads to use for a request of `threads` (0 = hardware
/// concurrency), never more than `tasks`.
int resolve_threads(int threads, std::size_t tasks);

/// Calls body(i) for i in [0, count) on up to `threads` workers. Work is
/// handed out dynamically, so body must write only to slot i of its output.
/// The first exception thrown by any body is rethrown after all workers stop.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body);

}  // namespace rfda
