#pragma once

#include <ostream>

namespace strainmech {

// Finite-difference oracle battery: constitutive stress/tangent consistency,
// element and global force/stiffness consistency, and a small end-to-end
// adjoint check. Prints one PASS/FAIL line per check; returns true when all
// checks pass.
bool run_verify(std::ostream& out);

}  // namespace strainmech
