#pragma once

#include <stdexcept>
#include <string>

namespace spmap {

// Base for every error this library raises on bad input or unusable state.
// Programming errors (violated preconditions inside the library) use assert.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define SPMAP_DEFINE_ERROR(NAME)                                  \
  struct NAME : Error {                                           \
    explicit NAME(const std::string& msg) : Error(msg) {}         \
  }

SPMAP_DEFINE_ERROR(FileNotFound);     // path does not exist / cannot open
SPMAP_DEFINE_ERROR(ParseError);       // malformed mesh or config file
SPMAP_DEFINE_ERROR(IoError);          // short read/write, bad stream
SPMAP_DEFINE_ERROR(EmptyMesh);        // mesh with no faces where faces required
SPMAP_DEFINE_ERROR(OutOfRange);       // index or parameter outside valid range
SPMAP_DEFINE_ERROR(NonPositiveDepth); // depth <= 0 fed to unprojection
SPMAP_DEFINE_ERROR(OriginPoint);      // cannot project the origin to the sphere
SPMAP_DEFINE_ERROR(PadTooLarge);      // circular pad wider than the map
SPMAP_DEFINE_ERROR(BadMagic);         // wrong file magic / endian tag
SPMAP_DEFINE_ERROR(HeaderMismatch);   // header fields inconsistent with payload
SPMAP_DEFINE_ERROR(UnnormalizedMesh); // vertices outside the unit box contract
SPMAP_DEFINE_ERROR(EmptyMap);         // map with zero valid samples
SPMAP_DEFINE_ERROR(TruncatedMap);     // parity decode needs zero truncation
SPMAP_DEFINE_ERROR(EmptyGrid);        // occupancy grid with no occupied voxels
SPMAP_DEFINE_ERROR(GridMismatch);     // mixed grid resolutions / domains
SPMAP_DEFINE_ERROR(EmptySet);         // metric over an empty point set
SPMAP_DEFINE_ERROR(NonWatertight);    // winding numbers far from integers
SPMAP_DEFINE_ERROR(StackMismatch);    // nested-depth stacks disagree in shape

#undef SPMAP_DEFINE_ERROR

}  // namespace spmap
