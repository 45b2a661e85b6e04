#include "levisim/core.hpp"

namespace levisim {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidBeam: return "InvalidBeam";
    case ErrorKind::NoSurface: return "NoSurface";
    case ErrorKind::CouplingDivergence: return "CouplingDivergence";
    case ErrorKind::NoWellFound: return "NoWellFound";
    case ErrorKind::UnstableWell: return "UnstableWell";
    case ErrorKind::RegimeViolation: return "RegimeViolation";
    case ErrorKind::QuadratureNonConvergence: return "QuadratureNonConvergence";
    case ErrorKind::ParticleLost: return "ParticleLost";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::TooShort: return "TooShort";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::NoPeak: return "NoPeak";
    case ErrorKind::PropagatingOrder: return "PropagatingOrder";
    case ErrorKind::MeshNotConverged: return "MeshNotConverged";
    case ErrorKind::Interpenetration: return "Interpenetration";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace levisim
