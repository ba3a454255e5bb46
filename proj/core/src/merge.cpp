#include "wf/merge.hpp"

#include "wf/errors.hpp"

#include <map>

namespace wf {

namespace {

std::optional<std::string> first_creator(const std::optional<std::string>& a,
                                         const std::optional<std::string>& b)
{
    if (!a)
        return b;
    if (!b)
        return a;
    return std::min(*a, *b);
}

Node merge_nodes(const Node& x, const Node& y, const DeweyAddress& at)
{
    if (x.sort != y.sort)
        throw ConflictError(at.to_string(), "sorts " + x.sort + " and " + y.sort + " differ");
    if (x.is_bud() && y.is_bud()) {
        Node n = x;
        n.creator = first_creator(x.creator, y.creator);
        if (y.state == NodeState::unlocked_bud)
            n.state = NodeState::unlocked_bud;
        return n;
    }
    if (x.is_bud())
        return y;
    if (y.is_bud())
        return x;

    if (x.production != y.production || x.children.size() != y.children.size())
        throw ConflictError(at.to_string(), "different developments of " + x.sort);
    Node n;
    n.sort = x.sort;
    n.mode = x.mode;
    n.production = x.production;
    n.state = (x.state == NodeState::closed || y.state == NodeState::closed) ? NodeState::closed
                                                                             : NodeState::upstairs_bud;
    n.creator = first_creator(x.creator, y.creator);
    if (x.status.empty())
        n.status = y.status;
    else if (y.status.empty() || y.status == x.status)
        n.status = x.status;
    else
        throw ConflictError(at.to_string(), "different statuses on " + x.sort);
    for (std::size_t i = 0; i < x.children.size(); ++i)
        n.children.push_back(merge_nodes(x.children[i], y.children[i], at.child(i + 1)));
    return n;
}

void restate(Node& n, const Artifact& whole, DeweyAddress& at, const SortSet* writable)
{
    if (n.is_bud()) {
        bool ready = precedence_ready(whole, at);
        if (writable != nullptr)
            ready = ready && writable->contains(n.sort);
        n.state = ready ? NodeState::unlocked_bud : NodeState::locked_bud;
        return;
    }
    for (std::size_t i = 0; i < n.children.size(); ++i) {
        DeweyAddress child = at.child(i + 1);
        restate(n.children[i], whole, child, writable);
    }
}

Artifact restated(const Artifact& t, const SortSet* writable)
{
    Artifact out = t;
    DeweyAddress root;
    restate(out.root, t, root, writable);
    return out;
}

}  // namespace

bool precedence_ready(const Artifact& t, const DeweyAddress& address)
{
    const Node* n = &t.root;
    for (std::size_t index : address.path()) {
        if (n->is_upstairs() || index > n->children.size())
            return false;
        if (n->mode == Mode::seq) {
            for (std::size_t j = 0; j + 1 < index; ++j)
                if (!is_closed(n->children[j]))
                    return false;
        }
        n = &n->children[index - 1];
    }
    return true;
}

Artifact recompute_bud_states(const Artifact& t)
{
    return restated(t, nullptr);
}

Artifact recompute_bud_states(const Artifact& t, const SortSet& writable)
{
    return restated(t, &writable);
}

Artifact merge_artifacts(const Artifact& a, const Artifact& b)
{
    return recompute_bud_states(Artifact{merge_nodes(a.root, b.root, DeweyAddress{})});
}

MergeGuide find_merge_guide(const Artifact& t, const Artifact& partial, const LocalGmwf& local)
{
    for (std::size_t i = 0; i < local.global_targets.size(); ++i) {
        if (is_prefix(t.root, local.global_targets[i].root) &&
            is_prefix(partial.root, local.local_targets[i].root))
            return {local.global_targets[i], i};
    }
    throw InvariantError("no merge guide for " + term(t.root) + " and partial replica " + term(partial.root));
}

MergeGuide find_merge_guide(const Artifact& t, const Artifact& partial, const View& v, const Gmwf& g)
{
    return find_merge_guide(t, partial, project_gmwf(g, v));
}

namespace {

class Expander {
public:
    Expander(const Artifact& t, const Artifact& partial, const MergeGuide& guide, const LocalGmwf& local,
             std::string_view agent)
        : t_(t), local_(local), agent_(agent)
    {
        const Artifact& projected = local.local_targets.at(guide.index);
        index_partial(partial.root, projected.root, DeweyAddress{}, local.sources.at(guide.index));
    }

    Node run(const Node& guide) { return expand(guide, DeweyAddress{}).first; }

private:
    void index_partial(const Node& v, const Node& p, const DeweyAddress& at,
                       const std::map<DeweyAddress, DeweyAddress>& source)
    {
        if (v.sort != p.sort)
            throw InvariantError("partial replica diverges from the guide at " + at.to_string());
        if (!local_.is_synthesized(v.sort))
            partial_at_.emplace(source.at(at), &v);
        if (v.is_bud())
            return;
        if (v.children.size() != p.children.size())
            throw InvariantError("partial replica diverges from the guide at " + at.to_string());
        for (std::size_t i = 0; i < v.children.size(); ++i)
            index_partial(v.children[i], p.children[i], at.child(i + 1), source);
    }

    std::pair<Node, bool> expand(const Node& g, const DeweyAddress& at)
    {
        const Node* from_t = find_node(t_, at);
        const Node* from_v = nullptr;
        if (auto it = partial_at_.find(at); it != partial_at_.end())
            from_v = it->second;
        if (from_t != nullptr && from_t->sort != g.sort)
            throw InvariantError("global replica diverges from the guide at " + at.to_string());

        const Node* chosen = nullptr;
        if (from_t && from_v)
            chosen = (!from_v->is_bud() || from_t->is_bud()) ? from_v : from_t;
        else
            chosen = from_t ? from_t : from_v;
        if (from_t && from_v && from_v->is_bud() && from_t->is_bud())
            chosen = from_t;

        if (chosen != nullptr && chosen->is_bud()) {
            Node bud = make_bud(g.sort, chosen->state == NodeState::unlocked_bud, chosen->creator);
            return {std::move(bud), true};
        }

        Node n;
        n.sort = g.sort;
        n.mode = g.mode;
        n.production = g.production;
        bool contributed = chosen != nullptr;
        if (chosen != nullptr) {
            n.state = NodeState::closed;
            n.creator = chosen->creator;
            n.status = chosen->status;
            if (n.status.empty() && from_t && from_v)
                n.status = (chosen == from_v ? from_t : from_v)->status;
        } else {
            n.state = NodeState::upstairs_bud;
            n.creator = agent_;
        }
        for (std::size_t i = 0; i < g.children.size(); ++i) {
            auto [child, below] = expand(g.children[i], at.child(i + 1));
            contributed = contributed || below;
            n.children.push_back(std::move(child));
        }
        if (!contributed)
            return {make_bud(g.sort, false, agent_), false};
        return {std::move(n), true};
    }

    const Artifact& t_;
    const LocalGmwf& local_;
    std::string agent_;
    std::map<DeweyAddress, const Node*> partial_at_;
};

Node prune(const Node& n)
{
    if (n.is_upstairs())
        return make_bud(n.sort, false, n.creator);
    Node out = n;
    for (auto& c : out.children)
        c = prune(c);
    return out;
}

}  // namespace

Artifact three_way_expand(const Artifact& t, const Artifact& partial, const MergeGuide& guide,
                          const LocalGmwf& local, std::string_view agent)
{
    if (!is_prefix(t.root, guide.target.root))
        throw InvariantError("guide does not extend the global replica");
    Expander expander(t, partial, guide, local, agent);
    return Artifact{expander.run(guide.target.root)};
}

Artifact prune_upstairs(const Artifact& expanded, const Artifact& previous)
{
    Artifact out = recompute_bud_states(Artifact{prune(expanded.root)});
    if (!is_prefix(previous.root, out.root))
        throw InvariantError("pruned expansion lost part of the previous replica");
    return out;
}

}  // namespace wf
