#pragma once

#include <functional>
#include <string>

namespace scehg {

/// Map a --threads argument ("auto" or a positive integer) to a worker count.
int resolve_threads(const std::string& spec);
int resolve_threads(int requested);

/// Run body(0..n_tasks-1) on up to `threads` workers. Task results must be
/// written to caller-owned slots indexed by task id so the outcome does not
/// depend on scheduling. The first (lowest-index) task exception is rethrown
/// after all workers join.
void parallel_for(int n_tasks, int threads, const std::function<void(int)>& body);

}  // namespace scehg
