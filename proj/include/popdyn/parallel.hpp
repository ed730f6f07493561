#pragma once

#include <functional>

namespace popdyn {

// Worker count: POPDYN_THREADS when set and positive, else hardware threads.
int worker_count();

// Runs body(k) for k in [0, count) on up to worker_count() threads. Each
// index runs exactly once; the first exception thrown is rethrown here.
void parallel_for(int count, const std::function<void(int)>& body);

}  // namespace popdyn
