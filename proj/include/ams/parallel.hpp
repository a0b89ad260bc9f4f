#pragma once

#include <cstddef>
#include <functional>

namespace ams {

/// Worker count from AMS_WORKERS, else hardware concurrency (at least 1).
/// Throws std::invalid_argument when AMS_WORKERS is set but not a positive integer.
std::size_t default_worker_count();

/// Runs fn(index, worker) for index in [0, count) on up to `workers` threads.
/// `worker` is in [0, workers) and identifies per-thread scratch state.
/// If tasks throw, the exception of the lowest failing index is rethrown after all
/// tasks finish, so the outcome does not depend on scheduling.
void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t index, std::size_t worker)>& fn);

}  // namespace ams
