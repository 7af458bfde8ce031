#include "chargroup/parallel.hpp"

#include <algorithm>

#include <omp.h>

namespace chargroup {

void set_worker_count(std::size_t workers) {
  omp_set_num_threads(static_cast<int>(std::max<std::size_t>(1, workers)));
}

std::size_t worker_count() { return static_cast<std::size_t>(std::max(1, omp_get_max_threads())); }

}  // namespace chargroup
