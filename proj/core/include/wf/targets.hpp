#pragma once

#include "wf/artifact.hpp"
#include "wf/grammar.hpp"

#include <vector>

namespace wf {

/// All closed derivation trees of a non-recursive grammar, one per distinct
/// tree, ordered by canonical serialization. Throws ModelError naming a
/// recursive sort.
std::vector<Artifact> enumerate_target_artifacts(const Gmwf& g);

}  // namespace wf
