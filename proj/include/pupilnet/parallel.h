#pragma once

#include <cstddef>
#include <functional>

namespace pupilnet {

/// Worker count: PUPILNET_THREADS if set and positive, else all cores.
std::size_t worker_count();

/// Runs body(begin, end) over contiguous chunks of [0, n) on up to `workers`
/// threads. Chunk boundaries depend only on n and workers; with one worker the
/// body runs inline on the calling thread.
void parallel_for(std::size_t n, std::size_t workers,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace pupilnet
