#include "ehrqa/common/heap.hpp"

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace ehrqa {

void retain_heap() {
#if defined(__GLIBC__)
  mallopt(M_TRIM_THRESHOLD, 256 << 20);
  mallopt(M_MMAP_THRESHOLD, 64 << 20);
#endif
}

}  // namespace ehrqa
