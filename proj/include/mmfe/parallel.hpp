#pragma once

#include <span>

namespace mmfe {

/// Selects the OpenMP kernel or its serial reference. Both produce
/// bit-identical results; the serial path is kept for testing.
enum class Execution { serial, parallel };

/// Sets the OpenMP team size used by parallel kernels (n <= 0 keeps the default).
void set_thread_count(int n);
int thread_count();

/// Pairwise (cascade) summation; the result does not depend on thread count.
double pairwise_sum(std::span<const double> values);

}  // namespace mmfe
