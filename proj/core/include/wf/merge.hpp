#pragma once

#include "wf/artifact.hpp"
#include "wf/projection.hpp"

#include <cstddef>
#include <string_view>

namespace wf {

/// Node-wise union of two replicas of the same case. Development wins over a
/// bud. Bud states of the result follow precedence. Throws ConflictError.
Artifact merge_artifacts(const Artifact& a, const Artifact& b);

/// A target artifact that both the global replica and the holder's partial
/// replica can be developed into.
struct MergeGuide {
    Artifact target;
    std::size_t index = 0;  ///< position in LocalGmwf::global_targets
};

/// Picks the candidate with the smallest canonical serialization.
/// Throws InvariantError when no target qualifies.
MergeGuide find_merge_guide(const Artifact& t, const Artifact& partial, const LocalGmwf& local);
MergeGuide find_merge_guide(const Artifact& t, const Artifact& partial, const View& v, const Gmwf& g);

/// Rebuilds a global artifact from the global replica `t` and the holder's
/// partial replica. Guide nodes known to neither side become upstairs buds
/// created by `agent` when something below them is known, plain buds otherwise.
Artifact three_way_expand(const Artifact& t, const Artifact& partial, const MergeGuide& guide,
                          const LocalGmwf& local, std::string_view agent);

/// Cuts every root path at its first upstairs bud. `previous` must remain a
/// prefix of the result.
Artifact prune_upstairs(const Artifact& expanded, const Artifact& previous);

/// True when no ancestor is upstairs and every earlier sibling under a
/// sequential ancestor is closed.
bool precedence_ready(const Artifact& t, const DeweyAddress& address);

Artifact recompute_bud_states(const Artifact& t);
Artifact recompute_bud_states(const Artifact& t, const SortSet& writable);

}  // namespace wf
