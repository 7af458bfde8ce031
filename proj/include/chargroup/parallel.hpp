#pragma once

#include <cstddef>

namespace chargroup {

// Number of OpenMP workers used by the parallel kernels. Every kernel produces
// results that do not depend on this value.
void set_worker_count(std::size_t workers);
std::size_t worker_count();

}  // namespace chargroup
