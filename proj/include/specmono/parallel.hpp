#pragma once

namespace specmono {

/// Kernels that loop over independent items come in a serial reference form
/// and an OpenMP form; both must produce identical results.
enum class Exec { Serial, Parallel };

/// Reads a positive thread count from the named environment variable and
/// applies it to OpenMP. Returns the count in effect.
int configure_threads_from_env(const char* var);

int max_threads();

}  // namespace specmono
