#pragma once

#include "diblab/family.hpp"
#include "diblab/jet.hpp"

namespace diblab {

// Built-in families, keyed by the identifiers accepted in run configs:
//   hartogs_ball      sum|t|^2 + sum|z|^2 - 1            (n, m in {1,2})
//   product_disk      sum|z|^2 - 1, base-independent      (n, m in {1,2})
//   egg               sum|t|^2 + S + S^2 - 1, S = sum|z|^2
//   annulus_reinhardt (log|z|^2-log a^2)(log|z|^2-log b^2) + c|t|^2  (m = 1)
// All ship analytic third-order jets.
FamilySpec make_family(const std::string& name, int n = 1, int m = 1);
std::vector<std::string> family_names();

// Built-in fiber metrics, keyed likewise:
//   flat                identity
//   gaussian_weight     e^{-phi} I,  phi = sum|z|^2 + sum|t|^2
//   diag_weights        diag(e^{-phi}, ..., e^{-r phi})
//   reinhardt_invariant e^{-phi} I,  phi = sum(|z_p|^2 + |z_p|^4/2) + sum|t|^2
// All ship analytic second-order jets and are Hermitian positive definite.
MatrixField make_metric(const std::string& name, int n = 1, int m = 1, int r = 1);
std::vector<std::string> metric_names();

// Scalar weight phi with h = e^{-phi} I for the metrics above; identically
// zero for "flat".  Exposed for oracles that need the weight directly.
ScalarField make_weight(const std::string& metric_name, int n, int m);

}  // namespace diblab
