#pragma once

#include <functional>

namespace aif {

// Runs fn(0..count-1) on up to `workers` threads. Each index must be
// independent of the others; results must not depend on execution order.
void parallel_for(int count, int workers, const std::function<void(int)>& fn);

}  // namespace aif
