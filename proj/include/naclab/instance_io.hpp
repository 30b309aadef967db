#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "naclab/mdp.hpp"

namespace naclab {

/// A fully specified problem instance. Features default to scaled-identity
/// tabular features and the behavior policy defaults to uniform when the
/// definition file omits them.
struct Instance {
    Mdp mdp;
    FeatureMap features;
    BehaviorPolicy behavior;

    static Instance with_defaults(Mdp mdp, std::optional<Matrix> features,
                                  std::optional<Matrix> behavior);
};

/// Parses the documented JSON instance format: keys `num_states`,
/// `num_actions`, `gamma`, `transitions` (action-major list of SxS
/// matrices), `rewards` (SxA), optional `features` (|S||A| x d rows in
/// sa-index order) and `behavior_policy` (SxA). Invariant violations are
/// reported with the offending key and row.
Instance load_instance(std::istream& is, const std::string& origin = "<stream>");
Instance load_instance_file(const std::string& path);

/// Serializes an instance back to the same JSON format.
void save_instance(const Instance& inst, std::ostream& os);

/// Short content hash of the serialized instance, for run manifests.
std::string instance_hash(const Instance& inst);

} // namespace naclab
