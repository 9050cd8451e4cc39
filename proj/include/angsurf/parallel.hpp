#pragma once

#include <cstddef>
#include <functional>

namespace angsurf {

/// Number of worker threads to use when the caller passes 0.
unsigned default_threads() noexcept;

/// Splits [0, n) into contiguous chunks and runs `body(begin, end)` on up to
/// `threads` workers. With threads <= 1 the body runs inline. The first
/// exception thrown by any chunk is rethrown on the calling thread.
void parallel_for(std::size_t n, unsigned threads,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace angsurf
