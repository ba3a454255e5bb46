#pragma once

#include "wf/artifact.hpp"
#include "wf/grammar.hpp"
#include "wf/projection.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace wf {

struct BracketPair {
    std::string open;
    std::string close;
};

/// Bracket pair per visible sort. A bud of sort X renders as open(X) "ω" close(X).
class BracketMap {
public:
    /// Assigns (), [], {}, <> to the sorts of `v` in order, then "(k" / "k)".
    static BracketMap for_view(const View& v);

    void assign(const std::string& sort, BracketPair pair);
    bool contains(std::string_view sort) const { return pairs_.find(sort) != pairs_.end(); }
    const BracketPair& at(std::string_view sort) const;

private:
    std::map<std::string, BracketPair, std::less<>> pairs_;
};

struct DyckToken {
    enum class Kind { open, close, bud };
    Kind kind;
    std::string sort;
    std::string text;

    bool operator==(const DyckToken&) const = default;
};

/// Linearized forest. Equality is equality of the rendered text.
class DyckWord {
public:
    DyckWord() = default;
    explicit DyckWord(std::vector<DyckToken> tokens);

    const std::vector<DyckToken>& tokens() const noexcept { return tokens_; }
    const std::string& text() const noexcept { return text_; }
    bool empty() const noexcept { return tokens_.empty(); }

    /// Top-level trees as half-open token ranges.
    std::vector<std::pair<std::size_t, std::size_t>> groups() const;
    DyckWord slice(std::size_t begin, std::size_t end) const;

    bool operator==(const DyckWord& other) const { return text_ == other.text_; }

private:
    std::vector<DyckToken> tokens_;
    std::string text_;
};

/// Depth-first linearization of `t`; invisible nodes contribute their
/// children only.
DyckWord dyck_linearize(const Node& t, const View& v, const BracketMap& map);
/// Linearization of the children of `t` (the forest below the root).
DyckWord dyck_content(const Node& t, const View& v, const BracketMap& map);

struct AutomatonTransition {
    std::string label;  ///< production id; empty for a bud transition
    std::vector<std::size_t> targets;
    bool bud = false;

    bool operator==(const AutomatonTransition&) const = default;
};

struct AutomatonState {
    std::string key;  ///< identity of the state
    std::string sort;
    bool exit = false;
    std::vector<std::string> components;  ///< component keys for product states
};

/// Descending tree automaton whose exit states generate buds.
class TreeAutomaton {
public:
    /// Returns the index of the state with `s.key`, inserting it if new.
    std::size_t intern(AutomatonState s);
    std::optional<std::size_t> find(const std::string& key) const;
    /// Exit state standing for an unconstrained tree of `sort`.
    std::size_t asleep(const std::string& sort);

    void add_transition(std::size_t state, AutomatonTransition t);

    std::size_t size() const noexcept { return states_.size(); }
    const AutomatonState& state(std::size_t i) const { return states_.at(i); }
    const std::vector<AutomatonTransition>& transitions(std::size_t i) const { return transitions_.at(i); }
    std::vector<std::size_t> exit_states() const;

    std::size_t initial = 0;

    nlohmann::json to_json() const;

private:
    std::vector<AutomatonState> states_;
    std::vector<std::vector<AutomatonTransition>> transitions_;
    std::map<std::string, std::size_t> index_;
};

/// Automaton generating the trees of `g` whose linearization on `v` is the
/// replica's. States are (Open|Close, sort, forest); Open states are exits.
TreeAutomaton automaton_from_replica(const Node& replica, const View& v, const Gmwf& g,
                                     const BracketMap& map);

/// No (label, arity) pair is offered by both states.
bool states_in_conflict(const TreeAutomaton& a1, std::size_t q1, const TreeAutomaton& a2, std::size_t q2);
bool have_consensus(const TreeAutomaton& a1, std::size_t q1, const TreeAutomaton& a2, std::size_t q2);

/// Throws NoConsensusError when the initial states have different sorts.
TreeAutomaton consensus_product(const TreeAutomaton& a1, const TreeAutomaton& a2);
TreeAutomaton consensus_product(const std::vector<TreeAutomaton>& automata);

/// Trees in which no state repeats along a root path. Exit states end a
/// branch with a bud.
std::vector<Node> generate_simplest_trees(const TreeAutomaton& a, std::size_t limit = 100000);

/// Every tree of height at most `max_height` (root at height 0).
std::vector<Node> generate_trees(const TreeAutomaton& a, std::size_t max_height, std::size_t limit = 1000000);

/// Node-wise merge: agreement kept, a bud yields to the other side,
/// different developments of the same sort become a bud.
Node consensual_merge_pair(const Node& t1, const Node& t2);

}  // namespace wf
