#pragma once

namespace ehrqa {

// Keeps freed memory in the process instead of returning it to the kernel
// after every training step. No effect outside glibc.
void retain_heap();

}  // namespace ehrqa
