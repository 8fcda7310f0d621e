#pragma once

#include "qgraph/simd.hpp"

namespace qgraph::simd {

namespace scalar {
const KernelSet& kernel_set();
}

namespace avx2 {
const KernelSet& kernel_set();
}

}  // namespace qgraph::simd
