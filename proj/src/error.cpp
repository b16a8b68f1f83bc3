#include "zkrect/error.hpp"

namespace zkrect {

const char* kind_name(ErrorKind k)
{
    switch (k) {
    case ErrorKind::InvalidConfig: return "invalid-configuration";
    case ErrorKind::Shape: return "shape";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::InvalidGrid: return "invalid-grid";
    case ErrorKind::InvalidParameter: return "invalid-parameter";
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::InternalConsistency: return "internal-consistency";
    case ErrorKind::StepFailure: return "step-failure";
    case ErrorKind::Divergence: return "divergence";
    case ErrorKind::IncompleteTrajectory: return "incomplete-trajectory";
    case ErrorKind::NearUncontrollable: return "near-uncontrollable-target";
    case ErrorKind::DataTooLarge: return "data-too-large";
    case ErrorKind::Io: return "io";
    case ErrorKind::Schema: return "schema";
    }
    return "unknown";
}

}  // namespace zkrect
