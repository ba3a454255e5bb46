#pragma once

#include "wf/artifact.hpp"
#include "wf/consensus.hpp"
#include "wf/decisions.hpp"
#include "wf/engine.hpp"
#include "wf/grammar.hpp"
#include "wf/projection.hpp"

#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace wf::testing {

std::string data_path(const std::string& name);

/// Peer-review model as stored on disk.
const Gmawfp& raw_peer_review();
/// Axiom-augmented peer-review model.
const Gmawfp& peer_review();
const DecisionScript& accept_script();
const DecisionScript& reject_script();

/// Decision of the accept script for the first offered bud of a service workspace.
Decision accept_decision(const std::string& agent, const nlohmann::json& workspace);

/// Builds a closed tree under a root of `root_sort` from a bracket string.
Node parse_dyck(const std::string& root_sort, const std::string& content, const std::map<char, std::string>& opens);

struct Coediting {
    Gmwf grammar;
    View v1;
    View v2;
    Node tv1;
    Node tv2;
    TreeAutomaton a1;
    TreeAutomaton a2;
};

const Coediting& coediting();

/// Every prefix of `t` (subtrees replaced by buds), bud states recomputed.
std::vector<Artifact> all_prefixes(const Artifact& t);

/// Term with every sort of `renamed` printed as "S".
std::string term_modulo(const Node& n, const LocalGmwf& local);

/// Random global execution of `g` from a fresh case for at most `steps` extensions.
Artifact random_execution(const Gmwf& g, std::mt19937_64& rng, std::size_t steps);

/// Random prefix of `t`.
Artifact random_prefix(const Artifact& t, std::mt19937_64& rng);

/// Production descriptions, with structuring sorts renamed through `names`.
std::vector<std::string> production_texts(const Gmwf& g, const std::map<std::string, std::string>& names = {});

/// True when some bijection from the synthesized sorts of `local` to `names`
/// makes its production descriptions equal to `expected`.
bool isomorphic(const LocalGmwf& local, const std::vector<std::string>& names, std::vector<std::string> expected);

/// Accepted-paper run in which referee 2 still owes the report I2; F and D wait behind it.
Artifact awaiting_second_report();

/// Closed tree from a term such as "P1[P7,P2]"; "Xω" yields a bud of X.
Node from_term(const Gmwf& g, std::string_view text);

/// Brute-force consensus: pairwise merges of annotated runs of height at most
/// `run_height`, kept when the merged term has height at most `max_height`.
/// Conflicting states yield a bud; a label mismatch between compatible states
/// discards the pair.
std::set<std::string> run_merge_oracle(const TreeAutomaton& a1, const TreeAutomaton& a2, std::size_t run_height,
                                       std::size_t max_height);

}  // namespace wf::testing
