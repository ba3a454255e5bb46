#pragma once

#include "wf/grammar.hpp"

#include <compare>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace wf {

/// Position of a node: the root is the empty path, children are numbered from 1.
class DeweyAddress {
public:
    DeweyAddress() = default;
    explicit DeweyAddress(std::vector<std::size_t> path);

    /// Accepts "" or "ε" for the root, otherwise "1.2.1".
    static DeweyAddress parse(std::string_view text);

    const std::vector<std::size_t>& path() const noexcept { return path_; }
    std::size_t depth() const noexcept { return path_.size(); }
    bool is_root() const noexcept { return path_.empty(); }

    DeweyAddress child(std::size_t index) const;
    DeweyAddress parent() const;
    bool is_prefix_of(const DeweyAddress& other) const;

    std::string to_string() const;

    auto operator<=>(const DeweyAddress&) const = default;

private:
    std::vector<std::size_t> path_;
};

enum class NodeState { closed, locked_bud, unlocked_bud, upstairs_bud };

std::string to_string(NodeState state);
NodeState node_state_from_string(std::string_view text);

struct Node {
    std::string sort;
    NodeState state = NodeState::locked_bud;
    std::string status;
    Mode mode = Mode::seq;
    std::optional<std::string> production;
    std::optional<std::string> creator;
    std::vector<Node> children;

    bool is_bud() const noexcept
    {
        return state == NodeState::locked_bud || state == NodeState::unlocked_bud;
    }
    bool is_upstairs() const noexcept { return state == NodeState::upstairs_bud; }

    bool operator==(const Node&) const = default;
};

Node make_bud(std::string sort, bool unlocked = false, std::optional<std::string> creator = std::nullopt);

struct Artifact {
    Node root;

    bool operator==(const Artifact&) const = default;
};

struct BudRef {
    DeweyAddress address;
    std::string sort;
    std::optional<std::string> creator;
    NodeState state;
};

Artifact create_case(const Gmwf& g);

/// Develops the unlocked bud at `address` with `p`. The input is left untouched.
Artifact extend_bud(const Artifact& t, const DeweyAddress& address, const Production& p,
                    std::string status, std::string creator);

/// Prefix order on trees: `a` can be developed into `b`.
bool is_prefix(const Node& a, const Node& b);
bool is_prefix(const Artifact& a, const Artifact& b);

/// Derivation tree of `g` extended with bud leaves, rooted at an axiom.
bool conforms(const Artifact& t, const Gmwf& g);
bool conforms_from(const Node& n, const Gmwf& g);

const Node& node_at(const Artifact& t, const DeweyAddress& address);
const Node* find_node(const Artifact& t, const DeweyAddress& address);
Node& mutable_node_at(Artifact& t, const DeweyAddress& address);

bool is_closed(const Node& n);
bool is_closed(const Artifact& t);

std::vector<BudRef> buds(const Artifact& t);
std::vector<BudRef> unlocked_buds(const Artifact& t);

/// Preorder walk.
void for_each_node(const Artifact& t, const std::function<void(const DeweyAddress&, const Node&)>& fn);

std::size_t node_count(const Node& n);
std::size_t height(const Node& n);

/// Equality of sorts, states, modes, productions and shape; statuses and creators ignored.
bool same_structure(const Node& a, const Node& b);

// Wire format.
nlohmann::json to_json(const Node& n);
nlohmann::json to_json(const Artifact& t);
Node node_from_json(const nlohmann::json& doc);
Artifact artifact_from_json(const nlohmann::json& doc);
std::string canonical(const Artifact& t);

/// Compact term notation: closed nodes print their production (or sort when
/// absent), buds print as "Xω".
std::string term(const Node& n);

}  // namespace wf
