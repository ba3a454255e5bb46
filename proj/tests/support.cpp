#include "support.hpp"

#include "wf/errors.hpp"
#include "wf/merge.hpp"

#include <algorithm>
#include <fstream>
#include <optional>

#include <nlohmann/json.hpp>

namespace wf::testing {

std::string data_path(const std::string& name)
{
    return std::string(WF_DATA_DIR) + "/" + name;
}

const Gmawfp& raw_peer_review()
{
    static const Gmawfp model = load_model(data_path("peer_review.json"));
    return model;
}

const Gmawfp& peer_review()
{
    static const Gmawfp model = prepare_model(raw_peer_review());
    return model;
}

const DecisionScript& accept_script()
{
    static const DecisionScript s = load_script(data_path("accept_script.json"));
    return s;
}

const DecisionScript& reject_script()
{
    static const DecisionScript s = load_script(data_path("reject_script.json"));
    return s;
}

Decision accept_decision(const std::string& agent, const nlohmann::json& workspace)
{
    const auto& bud = workspace.at("unlocked_writable_buds").at(0);
    const std::string sort = bud.at("sort");
    Decision d{DeweyAddress::parse(bud.at("address").get<std::string>()), "", ""};
    d.production = workspace.at("productions_by_sort").at(sort).at(0).at("id");
    for (const auto& step : accept_script().at(agent))
        if (step.sort == sort) {
            if (step.production)
                d.production = *step.production;
            d.status = step.status;
        }
    return d;
}

Node parse_dyck(const std::string& root_sort, const std::string& content, const std::map<char, std::string>& opens)
{
    Node root;
    root.sort = root_sort;
    root.state = NodeState::closed;
    std::vector<Node*> stack{&root};
    for (char c : content) {
        if (auto it = opens.find(c); it != opens.end()) {
            Node n;
            n.sort = it->second;
            n.state = NodeState::closed;
            stack.back()->children.push_back(n);
            stack.push_back(&stack.back()->children.back());
        } else {
            stack.pop_back();
        }
    }
    return root;
}

const Coediting& coediting()
{
    static const Coediting c = [] {
        Coediting out;
        std::ifstream in(data_path("coediting_grammar.json"));
        out.grammar = gmwf_from_json(nlohmann::json::parse(in));
        out.v1 = {"A", "B"};
        out.v2 = {"A", "C"};
        out.tv1 = parse_dyck("A", "([[()()][()]])[()]", {{'(', "A"}, {'[', "B"}});
        out.tv2 = parse_dyck("A", "[([][]()[]())[]][[][]]()", {{'(', "A"}, {'[', "C"}});
        out.a1 = automaton_from_replica(out.tv1, out.v1, out.grammar, BracketMap::for_view(out.v1));
        out.a2 = automaton_from_replica(out.tv2, out.v2, out.grammar, BracketMap::for_view(out.v2));
        return out;
    }();
    return c;
}

namespace {

Node from_term(const Gmwf& g, std::string_view text, std::size_t& pos)
{
    std::size_t start = pos;
    while (pos < text.size() && text[pos] != '[' && text[pos] != ',' && text[pos] != ']')
        ++pos;
    std::string label(text.substr(start, pos - start));
    const std::string omega = "ω";
    if (label.size() > omega.size() && label.ends_with(omega))
        return make_bud(label.substr(0, label.size() - omega.size()));
    const Production* p = g.find_production(label);
    if (!p)
        throw ModelError("unknown production " + label);
    Node n;
    n.sort = p->lhs;
    n.state = NodeState::closed;
    n.mode = p->mode;
    n.production = p->id;
    if (pos < text.size() && text[pos] == '[') {
        do {
            ++pos;
            n.children.push_back(from_term(g, text, pos));
        } while (text[pos] == ',');
        ++pos;
    }
    return n;
}

// Annotated runs of an automaton up to a height bound, memoized per state.
struct Run {
    std::size_t state;
    std::string label;
    bool bud;
    std::vector<Run> kids;
};

class RunEnumerator {
public:
    explicit RunEnumerator(const TreeAutomaton& a) : a_(a) {}

    const std::vector<Run>& runs(std::size_t q, std::size_t h)
    {
        auto key = std::make_pair(q, h);
        if (auto it = memo_.find(key); it != memo_.end())
            return it->second;
        std::vector<Run> out;
        for (const auto& t : a_.transitions(q)) {
            if (t.bud || t.targets.empty()) {
                out.push_back({q, t.label, t.bud, {}});
                continue;
            }
            if (h == 0)
                continue;
            std::vector<const std::vector<Run>*> options;
            for (auto c : t.targets)
                options.push_back(&runs(c, h - 1));
            if (std::any_of(options.begin(), options.end(), [](auto* o) { return o->empty(); }))
                continue;
            std::vector<std::size_t> index(options.size(), 0);
            for (;;) {
                Run r{q, t.label, false, {}};
                for (std::size_t i = 0; i < options.size(); ++i)
                    r.kids.push_back((*options[i])[index[i]]);
                out.push_back(std::move(r));
                std::size_t k = 0;
                while (k < index.size() && ++index[k] == options[k]->size())
                    index[k++] = 0;
                if (k == index.size())
                    break;
            }
        }
        return memo_[key] = std::move(out);
    }

private:
    const TreeAutomaton& a_;
    std::map<std::pair<std::size_t, std::size_t>, std::vector<Run>> memo_;
};

std::string show(const TreeAutomaton& a, const Run& r)
{
    if (r.bud)
        return a.state(r.state).sort + "ω";
    std::string s = r.label;
    if (r.kids.empty())
        return s;
    s += "[";
    for (std::size_t i = 0; i < r.kids.size(); ++i)
        s += (i ? "," : "") + show(a, r.kids[i]);
    return s + "]";
}

// Consensual merge of two runs: conflicting states yield a bud, a label
// mismatch between compatible states discards the pair.
std::optional<std::string> merge_runs(const TreeAutomaton& a1, const Run& r1, const TreeAutomaton& a2, const Run& r2)
{
    if (r1.bud && r2.bud)
        return a1.state(r1.state).sort + "ω";
    if (r1.bud)
        return show(a2, r2);
    if (r2.bud)
        return show(a1, r1);
    if (states_in_conflict(a1, r1.state, a2, r2.state))
        return a1.state(r1.state).sort + "ω";
    if (r1.label != r2.label || r1.kids.size() != r2.kids.size())
        return std::nullopt;
    std::string s = r1.label;
    if (r1.kids.empty())
        return s;
    s += "[";
    for (std::size_t i = 0; i < r1.kids.size(); ++i) {
        auto m = merge_runs(a1, r1.kids[i], a2, r2.kids[i]);
        if (!m)
            return std::nullopt;
        s += (i ? "," : "") + *m;
    }
    return s + "]";
}

std::size_t term_height(const std::string& t)
{
    std::size_t depth = 0, best = 0;
    for (char c : t) {
        if (c == '[')
            best = std::max(best, ++depth);
        else if (c == ']')
            --depth;
    }
    return best;
}

std::vector<Node> node_prefixes(const Node& n)
{
    std::vector<Node> out;
    out.push_back(make_bud(n.sort, false, n.creator));
    if (n.is_bud())
        return out;
    std::vector<std::vector<Node>> options;
    for (const auto& c : n.children)
        options.push_back(node_prefixes(c));
    std::vector<std::size_t> index(options.size(), 0);
    for (;;) {
        Node copy = n;
        for (std::size_t i = 0; i < options.size(); ++i)
            copy.children[i] = options[i][index[i]];
        out.push_back(std::move(copy));
        std::size_t k = 0;
        while (k < index.size() && ++index[k] == options[k].size())
            index[k++] = 0;
        if (k == index.size())
            break;
    }
    return out;
}

Node random_cut(const Node& n, std::mt19937_64& rng)
{
    if (n.is_bud() || std::uniform_int_distribution<int>(0, 4)(rng) == 0)
        return make_bud(n.sort, false, n.creator);
    Node copy = n;
    for (auto& c : copy.children)
        c = random_cut(c, rng);
    return copy;
}

void print_modulo(const Node& n, const LocalGmwf& local, std::string& out)
{
    out += local.is_synthesized(n.sort) ? "S" : n.sort;
    if (n.is_bud()) {
        out += n.state == NodeState::unlocked_bud ? "ω+" : "ω-";
        return;
    }
    if (n.children.empty())
        return;
    out += n.mode == Mode::par ? "{" : "[";
    for (std::size_t i = 0; i < n.children.size(); ++i) {
        if (i > 0)
            out += ",";
        print_modulo(n.children[i], local, out);
    }
    out += n.mode == Mode::par ? "}" : "]";
}

}  // namespace

std::vector<Artifact> all_prefixes(const Artifact& t)
{
    std::vector<Artifact> out;
    for (auto& n : node_prefixes(t.root))
        out.push_back(recompute_bud_states(Artifact{std::move(n)}));
    return out;
}

std::string term_modulo(const Node& n, const LocalGmwf& local)
{
    std::string out;
    print_modulo(n, local, out);
    return out;
}

Artifact random_execution(const Gmwf& g, std::mt19937_64& rng, std::size_t steps)
{
    Artifact t = create_case(g);
    for (std::size_t i = 0; i < steps; ++i) {
        auto open = unlocked_buds(t);
        if (open.empty())
            break;
        const auto& b = open[std::uniform_int_distribution<std::size_t>(0, open.size() - 1)(rng)];
        auto ps = g.productions_of(b.sort);
        const Production* p = ps[std::uniform_int_distribution<std::size_t>(0, ps.size() - 1)(rng)];
        t = recompute_bud_states(extend_bud(t, b.address, *p, "", "sim"));
    }
    return t;
}

Artifact random_prefix(const Artifact& t, std::mt19937_64& rng)
{
    return recompute_bud_states(Artifact{random_cut(t.root, rng)});
}

std::vector<std::string> production_texts(const Gmwf& g, const std::map<std::string, std::string>& names)
{
    auto rename = [&](const std::string& s) {
        auto it = names.find(s);
        return it == names.end() ? s : it->second;
    };
    std::vector<std::string> out;
    for (const auto& p : g.productions) {
        Production q = p;
        q.lhs = rename(q.lhs);
        for (auto& r : q.rhs)
            r = rename(r);
        out.push_back(describe(q));
    }
    std::sort(out.begin(), out.end());
    return out;
}

Node from_term(const Gmwf& g, std::string_view text)
{
    std::size_t pos = 0;
    return from_term(g, text, pos);
}

std::set<std::string> run_merge_oracle(const TreeAutomaton& a1, const TreeAutomaton& a2, std::size_t run_height,
                                       std::size_t max_height)
{
    RunEnumerator e1(a1);
    RunEnumerator e2(a2);
    const auto& r1 = e1.runs(a1.initial, run_height);
    const auto& r2 = e2.runs(a2.initial, run_height);
    std::set<std::string> out;
    for (const auto& x : r1)
        for (const auto& y : r2)
            if (auto m = merge_runs(a1, x, a2, y); m && term_height(*m) <= max_height)
                out.insert(*m);
    return out;
}

bool isomorphic(const LocalGmwf& local, const std::vector<std::string>& names, std::vector<std::string> expected)
{
    std::sort(expected.begin(), expected.end());
    std::vector<std::string> synthesized;
    for (const auto& s : local.gmwf.sorts)
        if (local.is_synthesized(s.name))
            synthesized.push_back(s.name);
    if (synthesized.size() != names.size())
        return false;
    std::vector<std::string> perm = names;
    std::sort(perm.begin(), perm.end());
    do {
        std::map<std::string, std::string> rename;
        for (std::size_t i = 0; i < perm.size(); ++i)
            rename[synthesized[i]] = perm[i];
        auto texts = production_texts(local.gmwf, rename);
        std::sort(texts.begin(), texts.end());
        if (texts == expected)
            return true;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return false;
}

Artifact awaiting_second_report()
{
    Artifact t = create_case(peer_review().gmwf);
    auto step = [&](const std::string& at, const std::string& p) {
        const Production& prod = *peer_review().gmwf.find_production(p);
        t = recompute_bud_states(extend_bud(t, DeweyAddress::parse(at), prod, "", "x"));
    };
    step("", "A_G.1");
    step("1", "P2");
    step("1.1", "P3");
    step("1.1.1", "P4");
    step("1.1.1.1", "P5");
    step("1.1.1.1.1", "P10");
    step("1.1.1.1.2", "P11");
    step("1.1.1.2", "P6");
    step("1.1.1.2.1", "P12");
    return t;
}

}  // namespace wf::testing
