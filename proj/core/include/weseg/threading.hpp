#pragma once

#include <cstddef>
#include <functional>

namespace weseg {

// Caps the worker pool used by parallel_for. 0 restores the hardware default.
void set_max_threads(unsigned n);
unsigned max_threads();

// Runs fn(i) for i in [begin, end) across up to max_threads() workers, each
// owning a contiguous slice. Callers keep results deterministic by writing
// to per-index slots; exceptions propagate to the caller.
void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t)>& fn);

}  // namespace weseg
