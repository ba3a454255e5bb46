#include "wf/artifact.hpp"

#include "wf/errors.hpp"

#include <algorithm>
#include <charconv>

namespace wf {

DeweyAddress::DeweyAddress(std::vector<std::size_t> path) : path_(std::move(path))
{
    if (std::find(path_.begin(), path_.end(), 0u) != path_.end())
        throw AddressError("Dewey components are positive");
}

DeweyAddress DeweyAddress::parse(std::string_view text)
{
    if (text.empty() || text == "ε" || text == "e")
        return {};
    std::vector<std::size_t> path;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t dot = text.find('.', start);
        std::string_view part = text.substr(start, dot == std::string_view::npos ? text.npos : dot - start);
        std::size_t value = 0;
        auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), value);
        if (ec != std::errc() || ptr != part.data() + part.size() || value == 0)
            throw AddressError("malformed address '" + std::string(text) + "'");
        path.push_back(value);
        if (dot == std::string_view::npos)
            break;
        start = dot + 1;
    }
    return DeweyAddress(std::move(path));
}

DeweyAddress DeweyAddress::child(std::size_t index) const
{
    if (index == 0)
        throw AddressError("Dewey components are positive");
    DeweyAddress out = *this;
    out.path_.push_back(index);
    return out;
}

DeweyAddress DeweyAddress::parent() const
{
    if (path_.empty())
        throw AddressError("the root has no parent");
    DeweyAddress out = *this;
    out.path_.pop_back();
    return out;
}

bool DeweyAddress::is_prefix_of(const DeweyAddress& other) const
{
    return path_.size() <= other.path_.size() &&
           std::equal(path_.begin(), path_.end(), other.path_.begin());
}

std::string DeweyAddress::to_string() const
{
    if (path_.empty())
        return "ε";
    std::string out;
    for (std::size_t i = 0; i < path_.size(); ++i) {
        if (i)
            out += '.';
        out += std::to_string(path_[i]);
    }
    return out;
}

std::string to_string(NodeState state)
{
    switch (state) {
    case NodeState::closed: return "closed";
    case NodeState::locked_bud: return "locked_bud";
    case NodeState::unlocked_bud: return "unlocked_bud";
    case NodeState::upstairs_bud: return "upstairs_bud";
    }
    return "closed";
}

NodeState node_state_from_string(std::string_view text)
{
    if (text == "closed") return NodeState::closed;
    if (text == "locked_bud") return NodeState::locked_bud;
    if (text == "unlocked_bud") return NodeState::unlocked_bud;
    if (text == "upstairs_bud") return NodeState::upstairs_bud;
    throw ModelError("unknown node state '" + std::string(text) + "'");
}

Node make_bud(std::string sort, bool unlocked, std::optional<std::string> creator)
{
    Node n;
    n.sort = std::move(sort);
    n.state = unlocked ? NodeState::unlocked_bud : NodeState::locked_bud;
    n.creator = std::move(creator);
    return n;
}

Artifact create_case(const Gmwf& g)
{
    if (g.axioms.size() != 1)
        throw ModelError("a case starts from a single axiom; augment the grammar first");
    return Artifact{make_bud(g.axioms.front(), true)};
}

const Node* find_node(const Artifact& t, const DeweyAddress& address)
{
    const Node* n = &t.root;
    for (std::size_t i : address.path()) {
        if (i > n->children.size())
            return nullptr;
        n = &n->children[i - 1];
    }
    return n;
}

const Node& node_at(const Artifact& t, const DeweyAddress& address)
{
    const Node* n = find_node(t, address);
    if (n == nullptr)
        throw AddressError("no node at " + address.to_string());
    return *n;
}

Node& mutable_node_at(Artifact& t, const DeweyAddress& address)
{
    Node* n = &t.root;
    for (std::size_t i : address.path()) {
        if (i > n->children.size())
            throw AddressError("no node at " + address.to_string());
        n = &n->children[i - 1];
    }
    return *n;
}

Artifact extend_bud(const Artifact& t, const DeweyAddress& address, const Production& p,
                    std::string status, std::string creator)
{
    Artifact out = t;
    Node& n = mutable_node_at(out, address);
    const std::string where = " at " + address.to_string();
    if (!n.is_bud())
        throw EditError(EditError::Kind::not_a_bud, "node" + where + " is not a bud");
    if (n.state != NodeState::unlocked_bud)
        throw EditError(EditError::Kind::locked, "bud" + where + " is locked");
    if (n.sort != p.lhs)
        throw EditError(EditError::Kind::sort_mismatch,
                        "production " + p.id + " develops " + p.lhs + ", bud" + where + " is " + n.sort);

    n.state = NodeState::closed;
    n.status = std::move(status);
    n.production = p.id;
    n.mode = p.rhs.empty() ? Mode::seq : p.mode;
    n.children.clear();
    for (std::size_t i = 0; i < p.rhs.size(); ++i) {
        bool unlocked = p.mode == Mode::par || i == 0;
        n.children.push_back(make_bud(p.rhs[i], unlocked, creator));
    }
    return out;
}

bool is_prefix(const Node& a, const Node& b)
{
    if (a.sort != b.sort)
        return false;
    if (a.is_bud())
        return true;
    if (b.is_bud())
        return false;
    if (a.children.size() != b.children.size())
        return false;
    if (a.children.size() >= 2 && a.mode != b.mode)
        return false;
    if (a.production && b.production && *a.production != *b.production)
        return false;
    for (std::size_t i = 0; i < a.children.size(); ++i)
        if (!is_prefix(a.children[i], b.children[i]))
            return false;
    return true;
}

bool is_prefix(const Artifact& a, const Artifact& b)
{
    return is_prefix(a.root, b.root);
}

bool conforms_from(const Node& n, const Gmwf& g)
{
    if (!g.has_sort(n.sort))
        return false;
    if (n.is_bud() || (n.is_upstairs() && n.children.empty() && !n.production))
        return n.children.empty() && !n.production && n.status.empty();
    if (!n.production)
        return false;
    const Production* p = g.find_production(*n.production);
    if (p == nullptr || p->lhs != n.sort || p->rhs.size() != n.children.size())
        return false;
    if (p->rhs.size() >= 2 && p->mode != n.mode)
        return false;
    for (std::size_t i = 0; i < n.children.size(); ++i) {
        if (n.children[i].sort != p->rhs[i] || !conforms_from(n.children[i], g))
            return false;
    }
    return true;
}

bool conforms(const Artifact& t, const Gmwf& g)
{
    if (std::find(g.axioms.begin(), g.axioms.end(), t.root.sort) == g.axioms.end())
        return false;
    return conforms_from(t.root, g);
}

bool is_closed(const Node& n)
{
    if (n.state != NodeState::closed)
        return false;
    return std::all_of(n.children.begin(), n.children.end(), [](const Node& c) { return is_closed(c); });
}

bool is_closed(const Artifact& t)
{
    return is_closed(t.root);
}

namespace {

void walk(const Node& n, DeweyAddress& at, const std::function<void(const DeweyAddress&, const Node&)>& fn)
{
    fn(at, n);
    for (std::size_t i = 0; i < n.children.size(); ++i) {
        DeweyAddress child = at.child(i + 1);
        walk(n.children[i], child, fn);
    }
}

}  // namespace

void for_each_node(const Artifact& t, const std::function<void(const DeweyAddress&, const Node&)>& fn)
{
    DeweyAddress root;
    walk(t.root, root, fn);
}

std::vector<BudRef> buds(const Artifact& t)
{
    std::vector<BudRef> out;
    for_each_node(t, [&](const DeweyAddress& a, const Node& n) {
        if (n.is_bud())
            out.push_back({a, n.sort, n.creator, n.state});
    });
    return out;
}

std::vector<BudRef> unlocked_buds(const Artifact& t)
{
    auto all = buds(t);
    std::erase_if(all, [](const BudRef& b) { return b.state != NodeState::unlocked_bud; });
    return all;
}

std::size_t node_count(const Node& n)
{
    std::size_t count = 1;
    for (const auto& c : n.children)
        count += node_count(c);
    return count;
}

std::size_t height(const Node& n)
{
    std::size_t h = 0;
    for (const auto& c : n.children)
        h = std::max(h, 1 + height(c));
    return h;
}

bool same_structure(const Node& a, const Node& b)
{
    if (a.sort != b.sort || a.state != b.state || a.production != b.production ||
        a.children.size() != b.children.size())
        return false;
    if (a.children.size() >= 2 && a.mode != b.mode)
        return false;
    for (std::size_t i = 0; i < a.children.size(); ++i)
        if (!same_structure(a.children[i], b.children[i]))
            return false;
    return true;
}

using nlohmann::json;

json to_json(const Node& n)
{
    json children = json::array();
    for (const auto& c : n.children)
        children.push_back(to_json(c));
    return json{
        {"sort", n.sort},
        {"state", to_string(n.state)},
        {"status", n.status},
        {"mode", to_string(n.mode)},
        {"production", n.production ? json(*n.production) : json(nullptr)},
        {"creator", n.creator ? json(*n.creator) : json(nullptr)},
        {"children", std::move(children)},
    };
}

json to_json(const Artifact& t)
{
    return to_json(t.root);
}

Node node_from_json(const json& doc)
{
    try {
        Node n;
        n.sort = doc.at("sort").get<std::string>();
        n.state = node_state_from_string(doc.value("state", "closed"));
        n.status = doc.value("status", "");
        n.mode = mode_from_string(doc.value("mode", "seq"));
        if (doc.contains("production") && !doc.at("production").is_null())
            n.production = doc.at("production").get<std::string>();
        if (doc.contains("creator") && !doc.at("creator").is_null())
            n.creator = doc.at("creator").get<std::string>();
        for (const auto& c : doc.value("children", json::array()))
            n.children.push_back(node_from_json(c));
        if (n.is_bud() && !n.children.empty())
            throw ModelError("bud '" + n.sort + "' has children");
        return n;
    } catch (const json::exception& e) {
        throw ModelError(std::string("malformed artifact: ") + e.what());
    }
}

Artifact artifact_from_json(const json& doc)
{
    return Artifact{node_from_json(doc)};
}

std::string canonical(const Artifact& t)
{
    return to_json(t).dump();
}

std::string term(const Node& n)
{
    if (n.is_bud())
        return n.sort + "ω";
    std::string out = n.production ? *n.production : n.sort;
    if (n.is_upstairs())
        out += "^";
    if (!n.children.empty()) {
        out += '[';
        for (std::size_t i = 0; i < n.children.size(); ++i) {
            if (i)
                out += ',';
            out += term(n.children[i]);
        }
        out += ']';
    }
    return out;
}

}  // namespace wf
