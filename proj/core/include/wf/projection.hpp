#pragma once

#include "wf/artifact.hpp"
#include "wf/grammar.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace wf {

/// An actor's read set.
using View = SortSet;

/// Canonical key of a synthesized structuring node: its mode and the ordered
/// sequence of its children's sorts (nested structuring children contribute
/// their own signature).
std::string structuring_signature(Mode mode, const std::vector<std::string>& children);

/// Projection of one tree before structuring sorts are named. Synthesized
/// nodes carry their signature as sort and have no production.
struct ProjectedTree {
    Node root;
    std::map<DeweyAddress, DeweyAddress> source;  ///< projected address -> input address
    std::set<DeweyAddress> synthesized;
};

/// Throws ModelError when the root sort is not visible.
ProjectedTree project_tree(const Node& t, const View& v);

/// Local workflow model of one view, together with the projected targets it
/// was collected from.
struct LocalGmwf {
    Gmwf gmwf;
    View view;
    std::map<std::string, std::string> structuring_names;  ///< signature -> sort
    std::map<std::string, std::string> production_ids;     ///< shape key -> production id
    std::vector<Artifact> global_targets;
    std::vector<Artifact> local_targets;  ///< parallel to global_targets
    std::vector<std::map<DeweyAddress, DeweyAddress>> sources;

    bool is_synthesized(std::string_view sort) const;
    /// Sorts the holder may develop: its write set plus synthesized sorts.
    SortSet writable(const SortSet& write) const;
};

LocalGmwf project_gmwf(const Gmwf& g, const View& v);

/// Projection of a prefix of a target. Nodes of the projected target whose
/// origin does not exist yet in `t` appear as locked buds.
Artifact project_artifact(const Artifact& t, const LocalGmwf& local);
Artifact project_artifact(const Artifact& t, const View& v, const Gmwf& g);

}  // namespace wf
