#pragma once

#include <array>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace rwre {

inline constexpr int kMaxDim = 8;

enum class ErrorKind {
  NonUnitDirection,
  EmptyBox,
  InsufficientSamples,
  OutOfSlab,
  SingularSystem,
  NonConvergence,
  StartOutsideBox,
  BracketNotTight,
  StepBudgetExceeded,
  TooFewScales,
  ConstraintViolation,
  HypothesisViolation,
  ConfigInvalid,
  MissingManifest,
  Internal,
};

const char* error_kind_name(ErrorKind k);

// Single exception type used across the library. `kind` maps onto the C API
// status codes and the CLI exit codes (config errors -> 2, everything else -> 3).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, std::string module = "");
  ErrorKind kind() const { return kind_; }
  const std::string& module_name() const { return module_; }

 private:
  ErrorKind kind_;
  std::string module_;
};

// Lattice site in up to kMaxDim dimensions. Coordinates past `dim` stay zero so
// equality and hashing can look at the whole array.
struct Site {
  std::array<int64_t, kMaxDim> c{};
  int dim = 0;

  static Site origin(int d) {
    Site s;
    s.dim = d;
    return s;
  }

  static Site of(std::initializer_list<int64_t> coords) {
    Site s;
    s.dim = static_cast<int>(coords.size());
    int k = 0;
    for (int64_t v : coords) s.c[k++] = v;
    return s;
  }

  Site neighbor(int axis, int64_t step) const {
    Site s = *this;
    s.c[axis] += step;
    return s;
  }

  int64_t l1_distance(const Site& o) const {
    int64_t sum = 0;
    for (int k = 0; k < dim; ++k) sum += std::llabs(c[k] - o.c[k]);
    return sum;
  }

  bool operator==(const Site& o) const { return dim == o.dim && c == o.c; }
};

struct SiteHash {
  size_t operator()(const Site& s) const;
};

std::string site_to_string(const Site& s);

}  // namespace rwre
