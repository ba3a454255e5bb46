#include "wf/grammar.hpp"

#include "wf/errors.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace wf {

std::string to_string(Mode mode)
{
    return mode == Mode::par ? "par" : "seq";
}

Mode mode_from_string(std::string_view text)
{
    if (text == "seq" || text == "sequential")
        return Mode::seq;
    if (text == "par" || text == "parallel")
        return Mode::par;
    throw ModelError("unknown production mode '" + std::string(text) + "'");
}

std::string describe(const Production& p)
{
    std::string out = p.lhs + " ->";
    if (p.rhs.empty())
        return out + " ε";
    const char* sep = p.mode == Mode::par ? " || " : " ; ";
    for (std::size_t i = 0; i < p.rhs.size(); ++i) {
        out += i == 0 ? " " : sep;
        out += p.rhs[i];
    }
    return out;
}

bool same_shape(const Production& a, const Production& b)
{
    if (a.lhs != b.lhs || a.rhs != b.rhs)
        return false;
    return a.rhs.size() < 2 || a.mode == b.mode;
}

const Sort* Gmwf::find_sort(std::string_view name) const
{
    auto it = std::find_if(sorts.begin(), sorts.end(),
                           [&](const Sort& s) { return s.name == name; });
    return it == sorts.end() ? nullptr : &*it;
}

bool Gmwf::is_structuring(std::string_view name) const
{
    const Sort* s = find_sort(name);
    return s != nullptr && s->kind == SortKind::structuring;
}

const Production* Gmwf::find_production(std::string_view id) const
{
    auto it = std::find_if(productions.begin(), productions.end(),
                           [&](const Production& p) { return p.id == id; });
    return it == productions.end() ? nullptr : &*it;
}

std::vector<const Production*> Gmwf::productions_of(std::string_view lhs) const
{
    std::vector<const Production*> out;
    for (const auto& p : productions)
        if (p.lhs == lhs)
            out.push_back(&p);
    return out;
}

const Accreditation& Gmawfp::accreditation_of(std::string_view actor) const
{
    for (const auto& a : accreditations)
        if (a.actor == actor)
            return a;
    throw AccreditationError("no accreditation for actor '" + std::string(actor) + "'");
}

std::optional<std::string> Gmawfp::writer_of(std::string_view sort) const
{
    for (const auto& a : accreditations)
        if (a.write.contains(sort))
            return a.actor;
    return std::nullopt;
}

std::vector<Violation> validate(const Gmwf& g)
{
    std::vector<Violation> out;
    std::set<std::string> names;
    for (const auto& s : g.sorts) {
        if (s.name.empty())
            out.push_back({"sort-name", "", "sort with empty name"});
        if (!names.insert(s.name).second)
            out.push_back({"unique-sort", s.name, "sort declared twice"});
        if (s.kind == SortKind::structuring && !s.description.empty())
            out.push_back({"structuring-description", s.name,
                           "structuring sort carries a task description"});
    }
    std::set<std::string> ids;
    for (const auto& p : g.productions) {
        if (p.id.empty())
            out.push_back({"production-id", describe(p), "production without identifier"});
        else if (!ids.insert(p.id).second)
            out.push_back({"unique-production", p.id, "production identifier used twice"});
        if (!g.has_sort(p.lhs))
            out.push_back({"declared-sort", p.id, "undeclared lhs sort '" + p.lhs + "'"});
        for (const auto& x : p.rhs)
            if (!g.has_sort(x))
                out.push_back({"declared-sort", p.id, "undeclared rhs sort '" + x + "'"});
        if (p.rhs.empty() && p.mode != Mode::seq)
            out.push_back({"empty-rhs-mode", p.id, "empty right-hand side must be sequential"});
    }
    if (g.axioms.empty())
        out.push_back({"axiom", "", "grammar has no axiom"});
    for (const auto& a : g.axioms)
        if (!g.has_sort(a))
            out.push_back({"axiom", a, "axiom is not a declared sort"});
    return out;
}

std::vector<Violation> validate(const Gmawfp& model)
{
    auto out = validate(model.gmwf);
    const Gmwf& g = model.gmwf;

    std::set<std::string> actor_ids;
    for (const auto& a : model.actors)
        if (!actor_ids.insert(a.id).second)
            out.push_back({"unique-actor", a.id, "actor declared twice"});

    std::set<std::string> accredited;
    for (const auto& acc : model.accreditations) {
        if (!actor_ids.contains(acc.actor))
            out.push_back({"accreditation-actor", acc.actor, "accreditation for an undeclared actor"});
        if (!accredited.insert(acc.actor).second)
            out.push_back({"accreditation-actor", acc.actor, "actor accredited twice"});
        for (const auto* set : {&acc.read, &acc.write, &acc.execute})
            for (const auto& s : *set)
                if (!g.has_sort(s))
                    out.push_back({"declared-sort", acc.actor, "accreditation names undeclared sort '" + s + "'"});
        for (const auto& s : acc.write)
            if (!acc.read.contains(s))
                out.push_back({"write-subset-read", acc.actor, "sort '" + s + "' writable but not readable"});
        for (const auto& a : g.axioms)
            if (!acc.read.contains(a))
                out.push_back({"axiom-visibility", acc.actor, "axiom '" + a + "' not in read set"});
    }
    for (const auto& id : actor_ids)
        if (!accredited.contains(id))
            out.push_back({"accreditation-actor", id, "actor without accreditation"});

    for (const auto& s : g.sorts) {
        if (s.kind != SortKind::task)
            continue;
        std::vector<std::string> writers;
        for (const auto& acc : model.accreditations)
            if (acc.write.contains(s.name))
                writers.push_back(acc.actor);
        if (writers.size() != 1) {
            std::string who;
            for (const auto& w : writers)
                who += (who.empty() ? "" : ", ") + w;
            out.push_back({"single-writer", s.name,
                           std::to_string(writers.size()) + " writers" + (who.empty() ? "" : " (" + who + ")")});
        }
    }

    if (auto rec = is_recursive(g); rec.recursive)
        out.push_back({"non-recursive", rec.cycle.front(), "sort derives itself"});

    if (!model.initiator.empty() && !actor_ids.contains(model.initiator))
        out.push_back({"initiator", model.initiator, "initiator is not a declared actor"});
    return out;
}

RecursionReport is_recursive(const Gmwf& g)
{
    std::map<std::string, std::set<std::string>> edges;
    for (const auto& p : g.productions)
        for (const auto& x : p.rhs)
            edges[p.lhs].insert(x);

    enum class Color { white, grey, black };
    std::map<std::string, Color> color;
    std::vector<std::string> stack;
    RecursionReport report;

    std::function<bool(const std::string&)> visit = [&](const std::string& x) {
        color[x] = Color::grey;
        stack.push_back(x);
        for (const auto& y : edges[x]) {
            if (color[y] == Color::grey) {
                auto from = std::find(stack.begin(), stack.end(), y);
                report.cycle.assign(from, stack.end());
                report.cycle.push_back(y);
                return true;
            }
            if (color[y] == Color::white && visit(y))
                return true;
        }
        stack.pop_back();
        color[x] = Color::black;
        return false;
    };

    std::vector<std::string> roots;
    for (const auto& s : g.sorts)
        roots.push_back(s.name);
    for (const auto& [x, _] : edges)
        roots.push_back(x);
    for (const auto& x : roots) {
        if (color[x] == Color::white && visit(x)) {
            report.recursive = true;
            return report;
        }
    }
    return report;
}

std::string fresh_name(const Gmwf& g, std::string_view base, std::uint32_t& counter)
{
    auto taken = [&](const std::string& n) {
        return g.has_sort(n) || g.find_production(n) != nullptr;
    };
    std::string name(base);
    while (taken(name))
        name = std::string(base) + "#" + std::to_string(++counter);
    return name;
}

Augmented augment_axiom(const Gmwf& g, const std::vector<Accreditation>& acc,
                        std::string_view initiator)
{
    if (g.axioms.empty())
        throw ModelError("grammar has no axiom");
    if (std::none_of(acc.begin(), acc.end(), [&](const auto& a) { return a.actor == initiator; }))
        throw ModelError("initiator '" + std::string(initiator) + "' has no accreditation");

    Augmented out{g, acc, {}};
    out.axiom = fresh_name(out.gmwf, "A_G", out.gmwf.fresh_counter);
    out.gmwf.sorts.push_back({out.axiom, SortKind::structuring, {}});
    for (std::size_t i = 0; i < g.axioms.size(); ++i) {
        std::string id = fresh_name(out.gmwf, out.axiom + "." + std::to_string(i + 1),
                                    out.gmwf.fresh_counter);
        out.gmwf.productions.push_back({id, out.axiom, {g.axioms[i]}, Mode::seq});
    }
    out.gmwf.axioms = {out.axiom};
    for (auto& a : out.accreditations) {
        a.read.insert(out.axiom);
        if (a.actor == initiator)
            a.write.insert(out.axiom);
    }
    return out;
}

namespace {

std::string infer_initiator(const Gmawfp& model)
{
    if (!model.initiator.empty())
        return model.initiator;
    std::vector<std::string> candidates;
    for (const auto& a : model.accreditations) {
        bool all = std::all_of(model.gmwf.axioms.begin(), model.gmwf.axioms.end(),
                               [&](const auto& x) { return a.write.contains(x); });
        if (all)
            candidates.push_back(a.actor);
    }
    if (candidates.size() != 1)
        throw ModelError("cannot determine the case initiator; set \"initiator\"");
    return candidates.front();
}

}  // namespace

Gmawfp augment_axiom(const Gmawfp& model)
{
    Gmawfp out = model;
    out.initiator = infer_initiator(model);
    auto aug = augment_axiom(model.gmwf, model.accreditations, out.initiator);
    out.gmwf = std::move(aug.gmwf);
    out.accreditations = std::move(aug.accreditations);
    return out;
}

using nlohmann::json;

json to_json(const Gmwf& g)
{
    json sorts = json::array();
    for (const auto& s : g.sorts) {
        json j{{"name", s.name}, {"kind", s.kind == SortKind::task ? "task" : "structuring"}};
        if (!s.description.empty())
            j["description"] = s.description;
        sorts.push_back(std::move(j));
    }
    json productions = json::array();
    for (const auto& p : g.productions)
        productions.push_back({{"id", p.id}, {"lhs", p.lhs}, {"rhs", p.rhs}, {"mode", to_string(p.mode)}});
    json doc{{"sorts", sorts}, {"productions", productions}, {"axioms", g.axioms}};
    if (g.fresh_counter > 0)
        doc["fresh_counter"] = g.fresh_counter;
    return doc;
}

json to_json(const Gmawfp& model)
{
    json doc = to_json(model.gmwf);
    json actors = json::array();
    for (const auto& a : model.actors)
        actors.push_back({{"id", a.id}, {"address", a.address}});
    json acc = json::array();
    for (const auto& a : model.accreditations)
        acc.push_back({{"actor", a.actor}, {"read", a.read}, {"write", a.write}, {"execute", a.execute}});
    doc["actors"] = actors;
    doc["accreditations"] = acc;
    if (!model.initiator.empty())
        doc["initiator"] = model.initiator;
    return doc;
}

namespace {

SortSet sort_set(const json& doc, const char* key)
{
    SortSet out;
    if (doc.contains(key))
        for (const auto& s : doc.at(key))
            out.insert(s.get<std::string>());
    return out;
}

}  // namespace

Gmwf gmwf_from_json(const json& doc)
{
    try {
        Gmwf g;
        for (const auto& s : doc.at("sorts")) {
            if (s.is_string()) {
                g.sorts.push_back({s.get<std::string>(), SortKind::task, {}});
                continue;
            }
            Sort sort{s.at("name").get<std::string>(), SortKind::task, s.value("description", "")};
            std::string kind = s.value("kind", "task");
            if (kind == "structuring")
                sort.kind = SortKind::structuring;
            else if (kind != "task")
                throw ModelError("unknown sort kind '" + kind + "'");
            g.sorts.push_back(std::move(sort));
        }
        for (const auto& p : doc.at("productions")) {
            Production prod;
            prod.id = p.at("id").get<std::string>();
            prod.lhs = p.at("lhs").get<std::string>();
            prod.rhs = p.value("rhs", std::vector<std::string>{});
            prod.mode = mode_from_string(p.value("mode", "seq"));
            g.productions.push_back(std::move(prod));
        }
        g.axioms = doc.at("axioms").get<std::vector<std::string>>();
        g.fresh_counter = doc.value("fresh_counter", 0u);
        return g;
    } catch (const json::exception& e) {
        throw ModelError(std::string("malformed grammar: ") + e.what());
    }
}

Gmawfp gmawfp_from_json(const json& doc)
{
    Gmawfp model;
    model.gmwf = gmwf_from_json(doc);
    try {
        for (const auto& a : doc.value("actors", json::array()))
            model.actors.push_back({a.at("id").get<std::string>(), a.value("address", "")});
        for (const auto& a : doc.value("accreditations", json::array()))
            model.accreditations.push_back({a.at("actor").get<std::string>(), sort_set(a, "read"),
                                            sort_set(a, "write"), sort_set(a, "execute")});
        model.initiator = doc.value("initiator", "");
    } catch (const json::exception& e) {
        throw ModelError(std::string("malformed model: ") + e.what());
    }
    return model;
}

Gmawfp load_model(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ModelError("cannot open '" + path + "'");
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ModelError(path + ": " + e.what());
    }
    return gmawfp_from_json(doc);
}

}  // namespace wf
