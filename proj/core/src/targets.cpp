#include "wf/targets.hpp"

#include "wf/errors.hpp"

#include <algorithm>
#include <map>

namespace wf {

namespace {

class TargetEnumerator {
public:
    explicit TargetEnumerator(const Gmwf& g) : g_(g) {}

    const std::vector<Node>& trees_of(const std::string& sort)
    {
        if (auto it = memo_.find(sort); it != memo_.end())
            return it->second;
        std::vector<Node> out;
        for (const Production* p : g_.productions_of(sort)) {
            std::vector<std::vector<Node>> partial{{}};
            for (const auto& x : p->rhs) {
                const auto& options = trees_of(x);
                std::vector<std::vector<Node>> next;
                next.reserve(partial.size() * options.size());
                for (const auto& prefix : partial) {
                    for (const auto& option : options) {
                        next.push_back(prefix);
                        next.back().push_back(option);
                    }
                }
                partial = std::move(next);
            }
            for (auto& children : partial) {
                Node n;
                n.sort = sort;
                n.state = NodeState::closed;
                n.mode = p->rhs.empty() ? Mode::seq : p->mode;
                n.production = p->id;
                n.children = std::move(children);
                out.push_back(std::move(n));
            }
        }
        return memo_.emplace(sort, std::move(out)).first->second;
    }

private:
    const Gmwf& g_;
    std::map<std::string, std::vector<Node>> memo_;
};

}  // namespace

std::vector<Artifact> enumerate_target_artifacts(const Gmwf& g)
{
    if (auto rec = is_recursive(g); rec.recursive)
        throw ModelError("recursive sort '" + rec.cycle.front() + "'");

    TargetEnumerator enumerator(g);
    std::vector<std::pair<std::string, Artifact>> keyed;
    for (const auto& axiom : g.axioms) {
        for (const auto& n : enumerator.trees_of(axiom)) {
            Artifact t{n};
            keyed.emplace_back(canonical(t), std::move(t));
        }
    }
    std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    keyed.erase(std::unique(keyed.begin(), keyed.end(),
                            [](const auto& a, const auto& b) { return a.first == b.first; }),
                keyed.end());
    std::vector<Artifact> out;
    out.reserve(keyed.size());
    for (auto& [_, t] : keyed)
        out.push_back(std::move(t));
    return out;
}

}  // namespace wf
