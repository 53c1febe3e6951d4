#pragma once

namespace drwr {

/// Number of threads the parallel kernels may use. Defaults to the OpenMP
/// default; capped by the DRWR_THREADS environment variable when set.
int thread_count();

/// Overrides the thread cap for the current process (0 = back to default).
void set_thread_cap(int n);

}  // namespace drwr
