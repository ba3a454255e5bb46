#include "wf/consensus.hpp"

#include "wf/errors.hpp"

#include <algorithm>
#include <deque>
#include <set>

namespace wf {

BracketMap BracketMap::for_view(const View& v)
{
    static const BracketPair palette[] = {{"(", ")"}, {"[", "]"}, {"{", "}"}, {"<", ">"}};
    BracketMap map;
    std::size_t k = 0;
    for (const auto& sort : v) {
        if (k < std::size(palette))
            map.assign(sort, palette[k]);
        else
            map.assign(sort, {"(" + std::to_string(k), std::to_string(k) + ")"});
        ++k;
    }
    return map;
}

void BracketMap::assign(const std::string& sort, BracketPair pair)
{
    pairs_[sort] = std::move(pair);
}

const BracketPair& BracketMap::at(std::string_view sort) const
{
    auto it = pairs_.find(sort);
    if (it == pairs_.end())
        throw ModelError("no bracket pair for sort '" + std::string(sort) + "'");
    return it->second;
}

DyckWord::DyckWord(std::vector<DyckToken> tokens) : tokens_(std::move(tokens))
{
    for (const auto& t : tokens_)
        text_ += t.text;
}

std::vector<std::pair<std::size_t, std::size_t>> DyckWord::groups() const
{
    std::vector<std::pair<std::size_t, std::size_t>> out;
    std::size_t depth = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
        switch (tokens_[i].kind) {
        case DyckToken::Kind::bud:
            if (depth == 0)
                out.emplace_back(i, i + 1);
            break;
        case DyckToken::Kind::open:
            if (depth++ == 0)
                start = i;
            break;
        case DyckToken::Kind::close:
            if (depth == 0)
                throw ModelError("unbalanced Dyck word " + text_);
            if (--depth == 0)
                out.emplace_back(start, i + 1);
            break;
        }
    }
    if (depth != 0)
        throw ModelError("unbalanced Dyck word " + text_);
    return out;
}

DyckWord DyckWord::slice(std::size_t begin, std::size_t end) const
{
    return DyckWord(std::vector<DyckToken>(tokens_.begin() + begin, tokens_.begin() + end));
}

namespace {

void linearize(const Node& n, const View& v, const BracketMap& map, std::vector<DyckToken>& out)
{
    const bool visible = v.contains(n.sort);
    if (n.is_bud()) {
        if (visible) {
            const auto& p = map.at(n.sort);
            out.push_back({DyckToken::Kind::bud, n.sort, p.open + "ω" + p.close});
        }
        return;
    }
    if (visible)
        out.push_back({DyckToken::Kind::open, n.sort, map.at(n.sort).open});
    for (const auto& c : n.children)
        linearize(c, v, map, out);
    if (visible)
        out.push_back({DyckToken::Kind::close, n.sort, map.at(n.sort).close});
}

}  // namespace

DyckWord dyck_linearize(const Node& t, const View& v, const BracketMap& map)
{
    std::vector<DyckToken> tokens;
    linearize(t, v, map, tokens);
    return DyckWord(std::move(tokens));
}

DyckWord dyck_content(const Node& t, const View& v, const BracketMap& map)
{
    std::vector<DyckToken> tokens;
    for (const auto& c : t.children)
        linearize(c, v, map, tokens);
    return DyckWord(std::move(tokens));
}

std::size_t TreeAutomaton::intern(AutomatonState s)
{
    if (auto it = index_.find(s.key); it != index_.end())
        return it->second;
    std::size_t id = states_.size();
    index_.emplace(s.key, id);
    states_.push_back(std::move(s));
    transitions_.emplace_back();
    return id;
}

std::optional<std::size_t> TreeAutomaton::find(const std::string& key) const
{
    if (auto it = index_.find(key); it != index_.end())
        return it->second;
    return std::nullopt;
}

std::size_t TreeAutomaton::asleep(const std::string& sort)
{
    std::string key = "open:" + sort;
    bool fresh = !find(key).has_value();
    std::size_t id = intern({key, sort, true, {}});
    if (fresh)
        add_transition(id, {"", {}, true});
    return id;
}

void TreeAutomaton::add_transition(std::size_t state, AutomatonTransition t)
{
    auto& list = transitions_.at(state);
    if (std::find(list.begin(), list.end(), t) == list.end())
        list.push_back(std::move(t));
}

std::vector<std::size_t> TreeAutomaton::exit_states() const
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < states_.size(); ++i)
        if (states_[i].exit)
            out.push_back(i);
    return out;
}

nlohmann::json TreeAutomaton::to_json() const
{
    nlohmann::json states = nlohmann::json::array();
    for (std::size_t i = 0; i < states_.size(); ++i) {
        nlohmann::json transitions = nlohmann::json::array();
        for (const auto& t : transitions_[i]) {
            if (t.bud)
                transitions.push_back({{"bud", states_[i].sort}});
            else
                transitions.push_back({{"label", t.label}, {"targets", t.targets}});
        }
        nlohmann::json s{{"id", i}, {"key", states_[i].key}, {"sort", states_[i].sort},
                         {"exit", states_[i].exit}, {"transitions", transitions}};
        if (!states_[i].components.empty())
            s["components"] = states_[i].components;
        states.push_back(std::move(s));
    }
    return {{"initial", initial}, {"states", states}};
}

namespace {

class ReplicaAutomatonBuilder {
public:
    ReplicaAutomatonBuilder(const View& v, const Gmwf& g) : v_(v), g_(g) {}

    TreeAutomaton build(const Node& replica, const BracketMap& map)
    {
        if (replica.is_bud() || (!v_.contains(replica.sort) && dyck_linearize(replica, v_, map).empty())) {
            a_.initial = a_.asleep(replica.sort);
            return std::move(a_);
        }
        DyckWord content = v_.contains(replica.sort) ? dyck_content(replica, v_, map)
                                                     : dyck_linearize(replica, v_, map);
        a_.initial = close_state(replica.sort, content);
        while (!pending_.empty()) {
            std::size_t q = pending_.front();
            pending_.pop_front();
            expand(q);
        }
        return std::move(a_);
    }

private:
    std::size_t close_state(const std::string& sort, const DyckWord& forest)
    {
        std::string key = "close:" + sort + ":" + forest.text();
        if (auto found = a_.find(key))
            return *found;
        std::size_t id = a_.intern({key, sort, false, {}});
        forests_.emplace(id, forest);
        pending_.push_back(id);
        return id;
    }

    std::size_t child_state(const std::string& sort, const DyckWord& forest)
    {
        if (forest.empty() && !v_.contains(sort))
            return a_.asleep(sort);
        return close_state(sort, forest);
    }

    void expand(std::size_t q)
    {
        const std::string sort = a_.state(q).sort;
        const DyckWord forest = forests_.at(q);
        const auto groups = forest.groups();
        for (const Production* p : g_.productions_of(sort)) {
            std::vector<std::size_t> targets;
            assign(*p, 0, 0, forest, groups, targets, q);
        }
    }

    void assign(const Production& p, std::size_t i, std::size_t g, const DyckWord& forest,
                const std::vector<std::pair<std::size_t, std::size_t>>& groups,
                std::vector<std::size_t>& targets, std::size_t q)
    {
        if (i == p.rhs.size()) {
            if (g == groups.size())
                a_.add_transition(q, {p.id, targets, false});
            return;
        }
        const std::string& x = p.rhs[i];
        if (v_.contains(x)) {
            if (g == groups.size())
                return;
            auto [begin, end] = groups[g];
            const DyckToken& head = forest.tokens()[begin];
            if (head.sort != x)
                return;
            if (head.kind == DyckToken::Kind::bud)
                targets.push_back(a_.asleep(x));
            else
                targets.push_back(close_state(x, forest.slice(begin + 1, end - 1)));
            assign(p, i + 1, g + 1, forest, groups, targets, q);
            targets.pop_back();
            return;
        }
        for (std::size_t h = g; h <= groups.size(); ++h) {
            std::size_t begin = g < groups.size() ? groups[g].first : forest.tokens().size();
            std::size_t end = h == g ? begin : groups[h - 1].second;
            targets.push_back(child_state(x, forest.slice(begin, end)));
            assign(p, i + 1, h, forest, groups, targets, q);
            targets.pop_back();
        }
    }

    const View& v_;
    const Gmwf& g_;
    TreeAutomaton a_;
    std::map<std::size_t, DyckWord> forests_;
    std::deque<std::size_t> pending_;
};

}  // namespace

TreeAutomaton automaton_from_replica(const Node& replica, const View& v, const Gmwf& g, const BracketMap& map)
{
    return ReplicaAutomatonBuilder(v, g).build(replica, map);
}

bool states_in_conflict(const TreeAutomaton& a1, std::size_t q1, const TreeAutomaton& a2, std::size_t q2)
{
    for (const auto& t1 : a1.transitions(q1)) {
        if (t1.bud)
            continue;
        for (const auto& t2 : a2.transitions(q2))
            if (!t2.bud && t1.label == t2.label && t1.targets.size() == t2.targets.size())
                return false;
    }
    return true;
}

bool have_consensus(const TreeAutomaton& a1, std::size_t q1, const TreeAutomaton& a2, std::size_t q2)
{
    return a1.state(q1).sort == a2.state(q2).sort;
}

namespace {

class ProductBuilder {
public:
    ProductBuilder(const TreeAutomaton& a1, const TreeAutomaton& a2) : a1_(a1), a2_(a2) {}

    TreeAutomaton build()
    {
        if (!have_consensus(a1_, a1_.initial, a2_, a2_.initial))
            throw NoConsensusError("initial states have sorts " + a1_.state(a1_.initial).sort + " and " +
                                   a2_.state(a2_.initial).sort);
        out_.initial = pair_state(a1_.initial, a2_.initial);
        while (!pending_.empty()) {
            auto [id, q1, q2] = pending_.front();
            pending_.pop_front();
            expand(id, q1, q2);
        }
        return std::move(out_);
    }

private:
    std::size_t pair_state(std::size_t q1, std::size_t q2)
    {
        const auto& s1 = a1_.state(q1);
        const auto& s2 = a2_.state(q2);
        std::string key = "(" + s1.key + " | " + s2.key + ")";
        if (auto found = out_.find(key))
            return *found;
        bool exit = false;
        if (s1.sort != s2.sort)
            exit = true;
        else if (s1.exit && s2.exit)
            exit = true;
        else if (!s1.exit && !s2.exit && states_in_conflict(a1_, q1, a2_, q2))
            exit = true;
        std::size_t id = out_.intern({key, s1.sort, exit, {s1.key, s2.key}});
        pending_.push_back({id, q1, q2});
        return id;
    }

    void expand(std::size_t id, std::size_t q1, std::size_t q2)
    {
        if (out_.state(id).exit) {
            out_.add_transition(id, {"", {}, true});
            return;
        }
        if (a1_.state(q1).exit || a2_.state(q2).exit) {
            const bool first_asleep = a1_.state(q1).exit;
            TreeAutomaton& awake = first_asleep ? a2_ : a1_;
            TreeAutomaton& sleeping = first_asleep ? a1_ : a2_;
            const auto transitions = awake.transitions(first_asleep ? q2 : q1);
            for (const auto& t : transitions) {
                if (t.bud)
                    continue;
                AutomatonTransition product{t.label, {}, false};
                for (std::size_t child : t.targets) {
                    std::size_t forwarded = sleeping.asleep(awake.state(child).sort);
                    product.targets.push_back(first_asleep ? pair_state(forwarded, child)
                                                           : pair_state(child, forwarded));
                }
                out_.add_transition(id, std::move(product));
            }
            return;
        }
        const auto transitions1 = a1_.transitions(q1);
        const auto transitions2 = a2_.transitions(q2);
        for (const auto& t1 : transitions1) {
            for (const auto& t2 : transitions2) {
                if (t1.bud || t2.bud || t1.label != t2.label || t1.targets.size() != t2.targets.size())
                    continue;
                AutomatonTransition product{t1.label, {}, false};
                for (std::size_t k = 0; k < t1.targets.size(); ++k)
                    product.targets.push_back(pair_state(t1.targets[k], t2.targets[k]));
                out_.add_transition(id, std::move(product));
            }
        }
    }

    struct Pending {
        std::size_t id;
        std::size_t q1;
        std::size_t q2;
    };

    TreeAutomaton a1_;
    TreeAutomaton a2_;
    TreeAutomaton out_;
    std::deque<Pending> pending_;
};

Node bud_of(const std::string& sort)
{
    return make_bud(sort, true);
}

void dedupe(std::vector<Node>& trees)
{
    std::set<std::string> seen;
    std::vector<Node> out;
    for (auto& t : trees)
        if (seen.insert(term(t)).second)
            out.push_back(std::move(t));
    trees = std::move(out);
}

/// Cartesian product of per-child alternatives under one transition.
void combine(const std::string& sort, const std::string& label, const std::vector<std::vector<Node>>& options,
             std::vector<Node>& out, std::size_t limit)
{
    std::vector<std::size_t> pick(options.size(), 0);
    for (const auto& o : options)
        if (o.empty())
            return;
    while (true) {
        Node n;
        n.sort = sort;
        n.state = NodeState::closed;
        n.production = label;
        for (std::size_t k = 0; k < options.size(); ++k)
            n.children.push_back(options[k][pick[k]]);
        out.push_back(std::move(n));
        if (out.size() > limit)
            throw InvariantError("tree generation exceeded " + std::to_string(limit) + " trees");
        std::size_t k = options.size();
        while (k > 0) {
            --k;
            if (++pick[k] < options[k].size())
                break;
            pick[k] = 0;
            if (k == 0)
                return;
        }
        if (options.empty())
            return;
    }
}

class SimplestGenerator {
public:
    SimplestGenerator(const TreeAutomaton& a, std::size_t limit) : a_(a), limit_(limit), on_path_(a.size(), false) {}

    std::vector<Node> generate(std::size_t q)
    {
        const auto& s = a_.state(q);
        if (s.exit)
            return {bud_of(s.sort)};
        if (on_path_[q])
            return {};
        on_path_[q] = true;
        std::vector<Node> out;
        for (const auto& t : a_.transitions(q)) {
            if (t.bud) {
                out.push_back(bud_of(s.sort));
                continue;
            }
            std::vector<std::vector<Node>> options;
            for (std::size_t child : t.targets)
                options.push_back(generate(child));
            combine(s.sort, t.label, options, out, limit_);
        }
        on_path_[q] = false;
        dedupe(out);
        return out;
    }

private:
    const TreeAutomaton& a_;
    std::size_t limit_;
    std::vector<bool> on_path_;
};

class BoundedGenerator {
public:
    BoundedGenerator(const TreeAutomaton& a, std::size_t limit) : a_(a), limit_(limit) {}

    const std::vector<Node>& generate(std::size_t q, std::size_t height)
    {
        auto key = std::make_pair(q, height);
        if (auto it = memo_.find(key); it != memo_.end())
            return it->second;
        const auto& s = a_.state(q);
        std::vector<Node> out;
        for (const auto& t : a_.transitions(q)) {
            if (t.bud) {
                out.push_back(bud_of(s.sort));
                continue;
            }
            if (!t.targets.empty() && height == 0)
                continue;
            std::vector<std::vector<Node>> options;
            for (std::size_t child : t.targets)
                options.push_back(generate(child, height - 1));
            combine(s.sort, t.label, options, out, limit_);
        }
        dedupe(out);
        return memo_.emplace(key, std::move(out)).first->second;
    }

private:
    const TreeAutomaton& a_;
    std::size_t limit_;
    std::map<std::pair<std::size_t, std::size_t>, std::vector<Node>> memo_;
};

}  // namespace

TreeAutomaton consensus_product(const TreeAutomaton& a1, const TreeAutomaton& a2)
{
    return ProductBuilder(a1, a2).build();
}

TreeAutomaton consensus_product(const std::vector<TreeAutomaton>& automata)
{
    if (automata.empty())
        throw NoConsensusError("no automaton to combine");
    TreeAutomaton acc = automata.front();
    for (std::size_t i = 1; i < automata.size(); ++i)
        acc = consensus_product(acc, automata[i]);
    return acc;
}

std::vector<Node> generate_simplest_trees(const TreeAutomaton& a, std::size_t limit)
{
    return SimplestGenerator(a, limit).generate(a.initial);
}

std::vector<Node> generate_trees(const TreeAutomaton& a, std::size_t max_height, std::size_t limit)
{
    BoundedGenerator gen(a, limit);
    return gen.generate(a.initial, max_height);
}

Node consensual_merge_pair(const Node& t1, const Node& t2)
{
    if (t1.sort != t2.sort)
        throw NoConsensusError("sorts " + t1.sort + " and " + t2.sort + " cannot be reconciled");
    if (t1.is_bud())
        return t2;
    if (t2.is_bud())
        return t1;
    if (t1.production != t2.production || t1.children.size() != t2.children.size())
        return bud_of(t1.sort);
    Node n = t1;
    for (std::size_t i = 0; i < t1.children.size(); ++i)
        n.children[i] = consensual_merge_pair(t1.children[i], t2.children[i]);
    return n;
}

}  // namespace wf
