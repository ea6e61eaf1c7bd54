#pragma once

#include <stdexcept>

namespace wasabi {

// Every pixel of the map carries a dynamic class; there is nothing left to
// anchor the infill, so the image cannot be described.
struct AllDynamicError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Edge has zero arc length (or a zero-norm coefficient vector downstream).
struct DegenerateEdgeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// No edge survives extraction; the image has no descriptor.
struct UndescribableImageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DuplicateIdError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MissingPoseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptyDatabaseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Every query has zero relevant database entries; mAP is undefined.
struct NoRelevantAnywhereError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ShapeOutOfBoundsError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace wasabi
