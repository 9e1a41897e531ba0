#pragma once

#include "samom/kernels.hpp"

namespace samom::kernels::detail {

const Ops& scalar_ops();
// Return nullptr when the variant was not compiled for this target.
const Ops* avx2_ops();
const Ops* neon_ops();

}  // namespace samom::kernels::detail
