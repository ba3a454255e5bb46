#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace wf {

enum class SortKind { task, structuring };
enum class Mode { seq, par };

std::string to_string(Mode mode);
Mode mode_from_string(std::string_view text);

struct Sort {
    std::string name;
    SortKind kind = SortKind::task;
    std::string description;

    bool operator==(const Sort&) const = default;
};

struct Production {
    std::string id;
    std::string lhs;
    std::vector<std::string> rhs;
    Mode mode = Mode::seq;

    bool operator==(const Production&) const = default;
};

/// "C -> E ; F", "E -> G1 || G2", "B -> ε"
std::string describe(const Production& p);

/// Same lhs, rhs and mode; ids ignored. Modes of productions with fewer
/// than two children are not compared.
bool same_shape(const Production& a, const Production& b);

struct Gmwf {
    std::vector<Sort> sorts;
    std::vector<Production> productions;
    std::vector<std::string> axioms;
    std::uint32_t fresh_counter = 0;

    const Sort* find_sort(std::string_view name) const;
    bool has_sort(std::string_view name) const { return find_sort(name) != nullptr; }
    bool is_structuring(std::string_view name) const;
    const Production* find_production(std::string_view id) const;
    std::vector<const Production*> productions_of(std::string_view lhs) const;
};

using SortSet = std::set<std::string, std::less<>>;

struct Accreditation {
    std::string actor;
    SortSet read;
    SortSet write;
    SortSet execute;

    bool operator==(const Accreditation&) const = default;
};

struct Actor {
    std::string id;
    std::string address;

    bool operator==(const Actor&) const = default;
};

struct Gmawfp {
    Gmwf gmwf;
    std::vector<Actor> actors;
    std::vector<Accreditation> accreditations;
    std::string initiator;

    /// Throws AccreditationError for an unknown actor.
    const Accreditation& accreditation_of(std::string_view actor) const;
    std::optional<std::string> writer_of(std::string_view sort) const;
};

struct Violation {
    std::string rule;
    std::string subject;
    std::string message;
};

std::vector<Violation> validate(const Gmwf& g);
std::vector<Violation> validate(const Gmawfp& model);

struct RecursionReport {
    bool recursive = false;
    std::vector<std::string> cycle;  ///< X0 -> X1 -> ... -> X0
};

RecursionReport is_recursive(const Gmwf& g);

struct Augmented {
    Gmwf gmwf;
    std::vector<Accreditation> accreditations;
    std::string axiom;
};

/// Adds a fresh single axiom above the existing ones.
Augmented augment_axiom(const Gmwf& g, const std::vector<Accreditation>& acc,
                        std::string_view initiator);
Gmawfp augment_axiom(const Gmawfp& model);

std::string fresh_name(const Gmwf& g, std::string_view base, std::uint32_t& counter);

// File format.
nlohmann::json to_json(const Gmwf& g);
nlohmann::json to_json(const Gmawfp& model);
Gmwf gmwf_from_json(const nlohmann::json& doc);
Gmawfp gmawfp_from_json(const nlohmann::json& doc);
Gmawfp load_model(const std::string& path);

}  // namespace wf
