#include "wf/projection.hpp"

#include "wf/errors.hpp"
#include "wf/targets.hpp"

#include <algorithm>

namespace wf {

std::string structuring_signature(Mode mode, const std::vector<std::string>& children)
{
    std::string out = to_string(mode) + "(";
    for (std::size_t i = 0; i < children.size(); ++i) {
        if (i)
            out += ',';
        out += children[i];
    }
    return out + ")";
}

namespace {

struct Projected {
    std::string sort;
    bool synthesized = false;
    Mode mode = Mode::seq;
    DeweyAddress origin;
    const Node* node = nullptr;
    std::vector<Projected> children;
};

struct Block {
    std::vector<Projected> items;
    Mode mode = Mode::seq;
};

Block project_node(const Node& n, const DeweyAddress& at, const View& v)
{
    const bool visible = v.contains(n.sort);
    if (n.is_bud() && !visible)
        return {};

    std::vector<Projected> grouped;
    for (std::size_t i = 0; i < n.children.size(); ++i) {
        DeweyAddress child_at = at.child(i + 1);
        Block block = project_node(n.children[i], child_at, v);
        if (block.items.size() <= 1 || block.mode == n.mode) {
            for (auto& item : block.items)
                grouped.push_back(std::move(item));
            continue;
        }
        Projected s;
        s.synthesized = true;
        s.mode = block.mode;
        s.origin = child_at;
        std::vector<std::string> keys;
        for (const auto& item : block.items)
            keys.push_back(item.sort);
        s.sort = structuring_signature(block.mode, keys);
        s.children = std::move(block.items);
        grouped.push_back(std::move(s));
    }

    if (!visible)
        return {std::move(grouped), n.mode};

    Projected p;
    p.sort = n.sort;
    p.mode = n.mode;
    p.origin = at;
    p.node = &n;
    p.children = std::move(grouped);
    if (p.children.size() == 1 && p.children.front().synthesized) {
        Projected only = std::move(p.children.front());
        p.mode = only.mode;
        p.children = std::move(only.children);
    }
    if (p.children.empty())
        p.mode = Mode::seq;
    Block out;
    out.items.push_back(std::move(p));
    return out;
}

Node materialize(const Projected& p, const DeweyAddress& at, ProjectedTree& out)
{
    Node n;
    n.sort = p.sort;
    n.mode = p.mode;
    out.source.emplace(at, p.origin);
    if (p.synthesized) {
        n.state = NodeState::closed;
        out.synthesized.insert(at);
    } else {
        n.state = p.node->state;
        n.status = p.node->status;
        n.creator = p.node->creator;
    }
    for (std::size_t i = 0; i < p.children.size(); ++i)
        n.children.push_back(materialize(p.children[i], at.child(i + 1), out));
    return n;
}

std::string shape_key(const std::string& lhs, Mode mode, const std::vector<std::string>& rhs)
{
    std::string key = lhs + "|" + to_string(rhs.size() < 2 ? Mode::seq : mode) + "|";
    for (const auto& x : rhs)
        key += x + ",";
    return key;
}

}  // namespace

ProjectedTree project_tree(const Node& t, const View& v)
{
    if (!v.contains(t.sort))
        throw ModelError("root sort '" + t.sort + "' is not in the view");
    Block block = project_node(t, DeweyAddress{}, v);
    ProjectedTree out;
    out.root = materialize(block.items.front(), DeweyAddress{}, out);
    return out;
}

bool LocalGmwf::is_synthesized(std::string_view sort) const
{
    const Sort* s = gmwf.find_sort(sort);
    return s != nullptr && s->kind == SortKind::structuring &&
           std::any_of(structuring_names.begin(), structuring_names.end(),
                       [&](const auto& kv) { return kv.second == sort; });
}

SortSet LocalGmwf::writable(const SortSet& write) const
{
    SortSet out = write;
    for (const auto& [_, name] : structuring_names)
        out.insert(name);
    return out;
}

namespace {

/// Renames synthesized sorts and assigns local production ids; new
/// productions are appended to `local`.
Node name_tree(const Node& raw, const DeweyAddress& at, const ProjectedTree& tree,
               LocalGmwf& local, const Gmwf& global, std::uint32_t& counter)
{
    Node n = raw;
    if (tree.synthesized.contains(at))
        n.sort = local.structuring_names.at(raw.sort);
    n.children.clear();
    std::vector<std::string> rhs;
    for (std::size_t i = 0; i < raw.children.size(); ++i) {
        n.children.push_back(name_tree(raw.children[i], at.child(i + 1), tree, local, global, counter));
        rhs.push_back(n.children.back().sort);
    }
    if (n.is_bud())
        return n;

    std::string key = shape_key(n.sort, n.mode, rhs);
    auto it = local.production_ids.find(key);
    if (it == local.production_ids.end()) {
        Production p{"", n.sort, rhs, rhs.empty() ? Mode::seq : n.mode};
        for (const auto& q : global.productions) {
            if (same_shape(q, p)) {
                p.id = q.id;
                break;
            }
        }
        if (p.id.empty()) {
            do {
                p.id = "L#" + std::to_string(++counter);
            } while (global.find_production(p.id) != nullptr);
        }
        it = local.production_ids.emplace(key, p.id).first;
        local.gmwf.productions.push_back(std::move(p));
    }
    n.production = it->second;
    return n;
}

void collect_signatures(const Node& n, const DeweyAddress& at, const ProjectedTree& tree,
                        std::vector<std::string>& order)
{
    if (tree.synthesized.contains(at) && std::find(order.begin(), order.end(), n.sort) == order.end())
        order.push_back(n.sort);
    for (std::size_t i = 0; i < n.children.size(); ++i)
        collect_signatures(n.children[i], at.child(i + 1), tree, order);
}

}  // namespace

LocalGmwf project_gmwf(const Gmwf& g, const View& v)
{
    for (const auto& a : g.axioms)
        if (!v.contains(a))
            throw ModelError("axiom '" + a + "' is not in the view");

    LocalGmwf local;
    local.view = v;
    local.global_targets = enumerate_target_artifacts(g);

    std::vector<ProjectedTree> raw;
    std::vector<std::string> signatures;
    for (const auto& t : local.global_targets) {
        raw.push_back(project_tree(t.root, v));
        collect_signatures(raw.back().root, DeweyAddress{}, raw.back(), signatures);
    }

    for (const auto& s : g.sorts)
        if (v.contains(s.name))
            local.gmwf.sorts.push_back(s);
    std::uint32_t k = 0;
    for (const auto& sig : signatures) {
        std::string name;
        do {
            name = "S#" + std::to_string(++k);
        } while (g.has_sort(name));
        local.structuring_names.emplace(sig, name);
        local.gmwf.sorts.push_back({name, SortKind::structuring, {}});
    }
    local.gmwf.axioms = g.axioms;

    std::uint32_t counter = 0;
    for (const auto& tree : raw) {
        local.local_targets.push_back(Artifact{name_tree(tree.root, DeweyAddress{}, tree, local, g, counter)});
        local.sources.push_back(tree.source);
    }
    return local;
}

namespace {

Node truncate(const Node& projected, const DeweyAddress& at,
              const std::map<DeweyAddress, DeweyAddress>& source, const LocalGmwf& local,
              const Artifact& t)
{
    const Node* origin = find_node(t, source.at(at));
    if (origin == nullptr)
        return make_bud(projected.sort);
    if (origin->is_bud()) {
        Node bud = make_bud(projected.sort, origin->state == NodeState::unlocked_bud, origin->creator);
        return bud;
    }
    Node n;
    n.sort = projected.sort;
    n.state = NodeState::closed;
    n.mode = projected.mode;
    n.production = projected.production;
    n.creator = origin->creator;
    if (!local.is_synthesized(projected.sort))
        n.status = origin->status;
    for (std::size_t i = 0; i < projected.children.size(); ++i)
        n.children.push_back(truncate(projected.children[i], at.child(i + 1), source, local, t));
    return n;
}

}  // namespace

Artifact project_artifact(const Artifact& t, const LocalGmwf& local)
{
    for (std::size_t i = 0; i < local.global_targets.size(); ++i) {
        if (is_prefix(t.root, local.global_targets[i].root))
            return Artifact{truncate(local.local_targets[i].root, DeweyAddress{}, local.sources[i], local, t)};
    }
    throw InvariantError("artifact is not a prefix of any target: " + term(t.root));
}

Artifact project_artifact(const Artifact& t, const View& v, const Gmwf& g)
{
    return project_artifact(t, project_gmwf(g, v));
}

}  // namespace wf
