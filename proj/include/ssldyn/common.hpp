#pragma once

#include <functional>
#include <vector>

namespace ssldyn {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Ordinary least-squares line through (x, y); requires >= 2 points.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

/// Worker count: SSLDYN_THREADS env var if set, else hardware concurrency.
int thread_count();

/// Runs fn(i) for i in [0, n) across thread_count() workers. Output written
/// by index stays deterministic regardless of scheduling. fn must not throw.
void parallel_for(long n, const std::function<void(long)>& fn);

}  // namespace ssldyn
