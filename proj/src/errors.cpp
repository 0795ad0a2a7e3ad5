#include "nlcvp/errors.hpp"

#include <sstream>

namespace nlcvp {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::domain: return "domain";
    case ErrorKind::pole: return "pole";
    case ErrorKind::non_integrable: return "non_integrable";
    case ErrorKind::quadrature: return "quadrature";
    case ErrorKind::singular_system: return "singular_system";
    case ErrorKind::incompatible: return "incompatible";
    case ErrorKind::resonance: return "resonance";
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::singular_evaluation: return "singular_evaluation";
    case ErrorKind::regularity: return "regularity";
    case ErrorKind::mesh_mismatch: return "mesh_mismatch";
    case ErrorKind::config: return "config";
  }
  return "unknown";
}

namespace {

std::string incompatible_message(double residual, double tolerance) {
  std::ostringstream os;
  os << "Neumann data violate the compatibility condition (integral of f over the domain plus integral of g "
        "over the complement must vanish): residual "
     << residual << " exceeds tolerance " << tolerance;
  return os.str();
}

std::string resonance_message(std::size_t index, double eigenvalue, double projection) {
  std::ostringstream os;
  os << "lambda is resonant with discrete eigenvalue #" << index << " (" << eigenvalue
     << ") and the data are not orthogonal to its eigenspace: projection norm " << projection;
  return os.str();
}

}  // namespace

IncompatibleDataError::IncompatibleDataError(double residual, double tolerance)
    : Error(ErrorKind::incompatible, incompatible_message(residual, tolerance)),
      residual_(residual),
      tolerance_(tolerance) {}

ResonanceError::ResonanceError(std::size_t eigen_index, double eigenvalue, double projection_norm)
    : Error(ErrorKind::resonance, resonance_message(eigen_index, eigenvalue, projection_norm)),
      index_(eigen_index),
      eigenvalue_(eigenvalue),
      projection_(projection_norm) {}

}  // namespace nlcvp
