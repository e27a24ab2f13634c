//! C ABI surface; implementation lands with the header generation.
