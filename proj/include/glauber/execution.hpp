#pragma once

namespace glauber {

// Selects between the OpenMP kernel and its serial reference. Both must
// produce identical results; the serial path exists for testing and
// benchmarking.
enum class Execution { kSerial, kParallel };

}  // namespace glauber
