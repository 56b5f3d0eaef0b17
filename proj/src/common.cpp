#include "common.hpp"

#include <sstream>

namespace rwre {

const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::NonUnitDirection: return "NonUnitDirection";
    case ErrorKind::EmptyBox: return "EmptyBox";
    case ErrorKind::InsufficientSamples: return "InsufficientSamples";
    case ErrorKind::OutOfSlab: return "OutOfSlab";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::StartOutsideBox: return "StartOutsideBox";
    case ErrorKind::BracketNotTight: return "BracketNotTight";
    case ErrorKind::StepBudgetExceeded: return "StepBudgetExceeded";
    case ErrorKind::TooFewScales: return "TooFewScales";
    case ErrorKind::ConstraintViolation: return "ConstraintViolation";
    case ErrorKind::HypothesisViolation: return "HypothesisViolation";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    case ErrorKind::MissingManifest: return "MissingManifest";
    case ErrorKind::Internal: return "Internal";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message, std::string module)
    : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message),
      kind_(kind),
      module_(std::move(module)) {}

size_t SiteHash::operator()(const Site& s) const {
  // splitmix64-style fold; avalanche matters because site maps are hot.
  uint64_t h = 0x9e3779b97f4a7c15ull ^ static_cast<uint64_t>(s.dim);
  for (int k = 0; k < s.dim; ++k) {
    uint64_t z = h + 0x9e3779b97f4a7c15ull + static_cast<uint64_t>(s.c[k]);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    h = z ^ (z >> 31);
  }
  return static_cast<size_t>(h);
}

std::string site_to_string(const Site& s) {
  std::ostringstream os;
  os << '(';
  for (int k = 0; k < s.dim; ++k) {
    if (k) os << ',';
    os << s.c[k];
  }
  os << ')';
  return os.str();
}

}  // namespace rwre
