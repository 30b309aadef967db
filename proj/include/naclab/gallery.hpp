#pragma once

#include <string>
#include <vector>

#include "naclab/instance_io.hpp"

namespace naclab {

/// A named, frozen problem instance with an evaluation target policy and
/// a default contraction target used when certifying it.
struct CanonicalInstance {
    std::string name;
    std::string notes;
    Instance inst;
    Matrix target_policy; // evaluation policy for critic-only experiments
    double gamma_c = 0.8;
};

/// Live certification record of a gallery instance; the stored values are
/// regenerated and asserted in tests.
struct Certification {
    int n_min = 0;
    double lambda_min = 0.0;
    double kappa_min = 0.0;
    double contraction_n1 = 0.0;
    double contraction_nmin = 0.0;
    double gamma_c = 0.0;
    double zeta = 0.0;
};

std::vector<std::string> gallery_names();
CanonicalInstance gallery_get(const std::string& name);

Certification certify_instance(const CanonicalInstance& ci);

/// Two-state, two-action, one-dimensional-feature instance on which
/// one-step off-policy TD provably drifts away from the fixed point while
/// the n = n_min run contracts. Found by a bounded deterministic search
/// over mismatch levels and frozen; repeated calls return the same
/// instance bit for bit.
CanonicalInstance build_deadly_triad_instance();

} // namespace naclab
