#pragma once

#include <stdexcept>
#include <string>

namespace macchiato {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid grid geometry, values outside the permitted range, or an
// argument outside a function's numeric domain.
struct DomainError : Error {
  using Error::Error;
};

// Masks or stacks that do not live on the same grid.
struct GridMismatch : Error {
  using Error::Error;
};

// A distance map was requested from a mask with no voxel in the
// relevant region.
struct EmptySourceMask : Error {
  using Error::Error;
};

// A hard consensus candidate with foreground outside the rater union.
struct SupportError : Error {
  using Error::Error;
};

// Brute-force reference refused an instance above its enumeration budget.
struct BudgetExceeded : Error {
  using Error::Error;
};

// Malformed mask files, manifests or reports.
struct FormatError : Error {
  using Error::Error;
};

}  // namespace macchiato
