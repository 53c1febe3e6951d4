#pragma once

#include <stdexcept>
#include <string>

namespace drwr {

/// Silhouette has no foreground pixel, so no boundary exists.
struct AllBackgroundError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Point at or behind the camera plane where the Jacobian is undefined.
struct InvalidProjectionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptyViewsError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptyCloudError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateViewError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateBoxError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CorruptCheckpointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace drwr
